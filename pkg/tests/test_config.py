import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from simhmimo.config import (
    ConfigError,
    config_from_dict,
    desk_config,
    parse_config,
    parse_db,
    parse_frequency,
    parse_length,
    parse_power,
)


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_empty_file_gives_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, ""))
    assert cfg.tx.atoms == cfg.rx.atoms == 100
    assert cfg.tx.layers == cfg.rx.layers == 7
    assert cfg.tx.antennas == cfg.rx.antennas == 10
    assert cfg.tx.thickness == cfg.rx.thickness == 0.04
    assert cfg.frequency == 6e9
    link = cfg.link
    assert (link.distance, link.exponent, link.shadow_sigma_db, link.ref_distance) == (250, 3.5, 9, 1)
    assert link.noise_power == 1e-14 and link.tx_power == 0.1
    assert cfg.tx_geometry().element_spacing == pytest.approx(cfg.wavelength / 2)


def test_empty_file_rejected_without_defaults(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, ""), allow_defaults=False)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.yaml")


def test_units_converted():
    assert parse_power("20 dBm") == pytest.approx(0.1)
    assert parse_power("-110dBm") == pytest.approx(1e-14)
    assert parse_power("100 mW") == pytest.approx(0.1)
    assert parse_power(0.5) == 0.5
    assert parse_frequency("6 GHz") == 6e9
    assert parse_length("4 cm") == pytest.approx(0.04)
    assert parse_db("9 dB") == 9.0


@pytest.mark.parametrize("bad", ["20 dBW", "lots", "1 GHz", True])
def test_bad_power_units(bad):
    with pytest.raises(ConfigError):
        parse_power(bad, "link.tx_power")


@given(st.floats(min_value=-60, max_value=60))
def test_dbm_round_trip(dbm):
    assert parse_power(f"{dbm!r} dBm") == pytest.approx(10 ** (dbm / 10) * 1e-3, rel=1e-9)


def test_yaml_with_units(tmp_path):
    text = """
geometry:
  tx: {side_count: 3, layers: 2, thickness: 2 cm, antennas: 2}
link:
  tx_power: 20 dBm
  noise_power: -110 dBm
  frequency: 6 GHz
scenario: {name: LayerSweep, realizations: 2, values: [1, 2]}
"""
    cfg = parse_config(write(tmp_path, text))
    assert cfg.tx.thickness == pytest.approx(0.02) and cfg.rx.layers == 7
    assert cfg.link.tx_power == pytest.approx(0.1)
    assert cfg.scenario == "LayerSweep" and cfg.values == (1, 2)
    assert cfg.wavelength == pytest.approx(299_792_458 / 6e9)


def test_inconsistent_wavelength(tmp_path):
    with pytest.raises(ConfigError, match="link.wavelength"):
        parse_config(write(tmp_path, "link: {frequency: 6 GHz, wavelength: 60 mm}"))
    # the rounded 50 mm is within tolerance of c / 6 GHz
    cfg = parse_config(write(tmp_path, "link: {frequency: 6 GHz, wavelength: 50 mm}"))
    assert cfg.wavelength == 0.05


def test_unknown_key_strict_and_lenient(tmp_path, caplog):
    p = write(tmp_path, "optimizer: {mode: armijo, stepsize: 3}")
    with pytest.raises(ConfigError, match="optimizer.stepsize"):
        parse_config(p)
    with caplog.at_level(logging.WARNING):
        cfg = parse_config(p, strict=False)
    assert "optimizer.stepsize" in caplog.text
    assert cfg.optimizer.mode == "armijo"


def test_unknown_section(tmp_path):
    with pytest.raises(ConfigError, match="solver"):
        parse_config(write(tmp_path, "solver: {}"))
    with pytest.raises(ConfigError, match="geometry.ris"):
        parse_config(write(tmp_path, "geometry: {ris: {}}"))


@pytest.mark.parametrize(
    "text, path",
    [
        ("geometry: {tx: {layers: 0}}", "geometry.tx.layers"),
        ("geometry: {rx: {antennas: 2.5}}", "geometry.rx.antennas"),
        ("optimizer: {shrink: 1.5}", "optimizer.shrink"),
        ("optimizer: {mode: newton}", "optimizer.mode"),
        ("optimizer: {shrink: 0.5 GHz}", "optimizer.shrink"),
        ("optimizer: {step_base: [1, 2]}", "optimizer.step_base"),
        ("link: {distance: -3}", "link.distance"),
        ("scenario: {name: Everything}", "scenario.name"),
        ("scenario: {realizations: 0}", "scenario.realizations"),
    ],
)
def test_errors_name_key_path(tmp_path, text, path):
    with pytest.raises(ConfigError, match=path.replace(".", r"\.")):
        parse_config(write(tmp_path, text))


def test_overlay_on_desk_base():
    cfg = config_from_dict({"scenario": {"realizations": 3}}, base=desk_config())
    assert cfg.tx.atoms == 16 and cfg.realizations == 3
    assert config_from_dict(cfg.to_dict() and {}, base=cfg) == cfg


def test_yaml_exponent_without_sign(tmp_path):
    # YAML 1.1 reads 1.0e4 as a string
    cfg = parse_config(write(tmp_path, "optimizer: {step_base: 1.0e4, min_step: 1.0e-4}"))
    assert cfg.optimizer.step_base == (1e4, 1e4, 1e4) and cfg.optimizer.min_step == 1e-4
    assert parse_config(write(tmp_path, "optimizer: {step_base: [1, 2.0e-1, 3]}")).optimizer.step_base == (1, 0.2, 3)
