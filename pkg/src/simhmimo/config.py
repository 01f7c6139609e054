"""Scenario configuration: defaults, unit parsing and YAML loading.

Keys are grouped as ``geometry.tx.*``, ``geometry.rx.*``, ``link.*``,
``optimizer.*``, ``ao.*`` and ``scenario.*``; see ``KEYS`` for the full list.
Quantities may be plain numbers in SI units or strings with a unit suffix,
e.g. ``"20 dBm"``, ``"9 dB"``, ``"6 GHz"``, ``"40 mm"``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from simhmimo.baselines import AoConfig
from simhmimo.channel import LinkParams
from simhmimo.geometry import SimGeometry
from simhmimo.optimizer import OptimizerConfig

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0

SCENARIOS = (
    "Convergence",
    "InitSensitivity",
    "LayerSweep",
    "AtomSweep",
    "AntennaSweep",
    "PhaseBaselines",
    "ComplexityTable",
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- units

_POWER = {"w": 1.0, "mw": 1e-3, "uw": 1e-6}
_FREQ = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_LENGTH = {"m": 1.0, "cm": 1e-2, "mm": 1e-3}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


def _split(value, key: str) -> tuple[float, str]:
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value), ""
    if isinstance(value, str):
        m = _QUANTITY.match(value)
        if m:
            return float(m.group(1)), m.group(2).lower()
    raise ConfigError(f"{key}: cannot read quantity {value!r}")


def _plain(value, key: str) -> float:
    x, unit = _split(value, key)
    if unit:
        raise ConfigError(f"{key}: expected a plain number, got {value!r}")
    return x


def parse_power(value, key: str = "power") -> float:
    """Watts from a number (W) or a string in W, mW, uW or dBm."""
    x, unit = _split(value, key)
    if unit == "dbm":
        return 10.0 ** (x / 10.0) * 1e-3
    if unit in ("", *_POWER):
        return x * _POWER.get(unit, 1.0)
    raise ConfigError(f"{key}: unknown power unit {unit!r} (use W, mW or dBm)")


def parse_db(value, key: str = "dB") -> float:
    x, unit = _split(value, key)
    if unit not in ("", "db"):
        raise ConfigError(f"{key}: expected a value in dB, got unit {unit!r}")
    return x


def parse_frequency(value, key: str = "frequency") -> float:
    x, unit = _split(value, key)
    if unit not in ("", *_FREQ):
        raise ConfigError(f"{key}: unknown frequency unit {unit!r}")
    return x * _FREQ.get(unit, 1.0)


def parse_length(value, key: str = "length") -> float:
    x, unit = _split(value, key)
    if unit not in ("", *_LENGTH):
        raise ConfigError(f"{key}: unknown length unit {unit!r}")
    return x * _LENGTH.get(unit, 1.0)


# ---------------------------------------------------------------- config types


@dataclass(frozen=True)
class StackSpec:
    """One metasurface stack. ``spacing=None`` means half a wavelength."""

    side_count: int = 10
    layers: int = 7
    thickness: float = 0.04
    antennas: int = 10
    spacing: float | None = None

    @property
    def atoms(self) -> int:
        return self.side_count**2

    def geometry(self, wavelength: float, side: str) -> SimGeometry:
        spacing = self.spacing if self.spacing is not None else wavelength / 2
        return SimGeometry(
            self.side_count, self.layers, spacing, self.thickness, self.antennas, wavelength, side=side
        )


@dataclass(frozen=True)
class ScenarioConfig:
    tx: StackSpec = field(default_factory=StackSpec)
    rx: StackSpec = field(default_factory=StackSpec)
    frequency: float = 6e9
    link: LinkParams = field(default_factory=LinkParams)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    ao: AoConfig = field(default_factory=AoConfig)
    scenario: str = "Convergence"
    realizations: int = 5
    seed_base: int = 0
    output_path: str = "results"
    values: tuple = ()  # sweep points; empty means the scenario default
    random_starts: int = 50
    compare_ao: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario.name: expected one of {SCENARIOS}, got {self.scenario!r}")
        if self.realizations < 1:
            raise ConfigError(f"scenario.realizations: must be >= 1, got {self.realizations}")
        if self.random_starts < 1:
            raise ConfigError("scenario.random_starts: must be >= 1")
        if self.workers < 1:
            raise ConfigError("scenario.workers: must be >= 1")
        if not self.frequency > 0:
            raise ConfigError("link.frequency: must be positive")

    @property
    def wavelength(self) -> float:
        return self.link.wavelength

    def tx_geometry(self) -> SimGeometry:
        return self.tx.geometry(self.wavelength, "tx")

    def rx_geometry(self) -> SimGeometry:
        return self.rx.geometry(self.wavelength, "rx")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["values"] = list(self.values)
        return d


def default_config() -> ScenarioConfig:
    """Full-size setup: 100 atoms per layer, 7 layers, 10 antennas per side."""
    return ScenarioConfig()


def desk_config(**overrides) -> ScenarioConfig:
    """Small setup for quick runs and CI: 16 atoms, 2 layers, 4 antennas."""
    stack = StackSpec(side_count=4, layers=2, antennas=4)
    return replace(ScenarioConfig(tx=stack, rx=stack, realizations=5), **overrides)


# ---------------------------------------------------------------- loading

_STACK_KEYS = {
    "side_count": ("int", 1, None),
    "layers": ("int", 1, None),
    "thickness": ("length", 0, None),
    "antennas": ("int", 1, None),
    "spacing": ("length", 0, None),
}
_LINK_KEYS = {
    "frequency": ("frequency", 0, None),
    "wavelength": ("length", 0, None),
    "distance": ("length", 0, None),
    "ref_distance": ("length", 0, None),
    "exponent": ("float", 0, None),
    "shadow_sigma": ("db", None, None),
    "noise_power": ("power", 0, None),
    "tx_power": ("power", 0, None),
}
_OPT_KEYS = {
    "mode": ("choice", ("fixed", "armijo"), None),
    "step_base": ("triple", 0, None),
    "shrink": ("float", 0, 1),
    "sufficient_increase": ("triple", 0, None),
    "min_step": ("float", 0, None),
    "max_iters": ("int", 0, None),
    "rel_tol": ("float", 0, None),
    "window": ("int", 1, None),
    "per_variable_search": ("bool", None, None),
    "warm_start": ("bool", None, None),
    "fixed_step": ("float", 0, None),
}
_AO_KEYS = {
    "phase_grid_points": ("int", 4, None),
    "max_outer_iters": ("int", 0, None),
    "rel_tol": ("float", 0, None),
}
_SCENARIO_KEYS = {
    "name": ("choice", SCENARIOS, None),
    "realizations": ("int", 1, None),
    "seed_base": ("int", 0, None),
    "output_path": ("str", None, None),
    "values": ("intlist", 1, None),
    "random_starts": ("int", 1, None),
    "compare_ao": ("bool", None, None),
    "workers": ("int", 1, None),
}
KEYS = {
    "geometry.tx": _STACK_KEYS,
    "geometry.rx": _STACK_KEYS,
    "link": _LINK_KEYS,
    "optimizer": _OPT_KEYS,
    "ao": _AO_KEYS,
    "scenario": _SCENARIO_KEYS,
}


def _check(path: str, raw, spec):
    kind, lo, hi = spec
    if raw is None and path.endswith(("spacing", "fixed_step", "wavelength")):
        return None
    if kind == "choice":
        if raw not in lo:
            raise ConfigError(f"{path}: expected one of {list(lo)}, got {raw!r}")
        return raw
    if kind == "bool":
        if not isinstance(raw, bool):
            raise ConfigError(f"{path}: expected true/false, got {raw!r}")
        return raw
    if kind == "str":
        if not isinstance(raw, str) or not raw:
            raise ConfigError(f"{path}: expected a non-empty string, got {raw!r}")
        return raw
    if kind == "int":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{path}: expected an integer >= {lo}, got {raw!r}")
        value = raw
    elif kind == "intlist":
        if not isinstance(raw, list) or not all(isinstance(v, int) and v >= lo for v in raw):
            raise ConfigError(f"{path}: expected a list of integers >= {lo}, got {raw!r}")
        return tuple(raw)
    elif kind == "triple":
        if isinstance(raw, (int, float, str)) and not isinstance(raw, bool):
            raw = [raw] * 3
        if not isinstance(raw, list) or len(raw) != 3:
            raise ConfigError(f"{path}: expected a number or a list of three numbers, got {raw!r}")
        vals = tuple(_plain(v, path) for v in raw)
        if min(vals) <= lo:
            raise ConfigError(f"{path}: entries must be > {lo}, got {raw!r}")
        return vals
    else:
        parse = {
            "float": _plain,
            "length": parse_length,
            "frequency": parse_frequency,
            "power": parse_power,
            "db": parse_db,
        }[kind]
        value = parse(raw, path)
    if lo is not None and not (value > lo if kind != "int" else value >= lo):
        bound = f"> {lo}" if kind != "int" else f">= {lo}"
        raise ConfigError(f"{path}: must be {bound}, got {raw!r}")
    if hi is not None and not value < hi:
        raise ConfigError(f"{path}: must be < {hi}, got {raw!r}")
    return value


def _section(data: dict, path: str, strict: bool) -> dict:
    node = data
    for part in path.split("."):
        node = node.get(part, {}) if isinstance(node, dict) else {}
    if node is None:
        node = {}
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    spec = KEYS[path]
    out = {}
    for key, raw in node.items():
        full = f"{path}.{key}"
        if key not in spec:
            msg = f"{full}: unknown key (allowed: {sorted(spec)})"
            if strict:
                raise ConfigError(msg)
            log.warning(msg)
            continue
        out[key] = _check(full, raw, spec[key])
    return out


def _unknown_top_level(data: dict, strict: bool) -> None:
    allowed = {"geometry": {"tx", "rx"}, "link": None, "optimizer": None, "ao": None, "scenario": None}
    for key, val in data.items():
        if key not in allowed:
            msg = f"{key}: unknown section (allowed: {sorted(allowed)})"
        elif key == "geometry" and isinstance(val, dict) and set(val) - allowed["geometry"]:
            msg = f"geometry.{sorted(set(val) - allowed['geometry'])[0]}: unknown section (allowed: tx, rx)"
        else:
            continue
        if strict:
            raise ConfigError(msg)
        log.warning(msg)


def config_from_dict(data: dict | None, strict: bool = True, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Validate a nested mapping and overlay it on ``base`` (full-size defaults)."""
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a mapping")
    base = base or default_config()
    _unknown_top_level(data, strict)

    tx = replace(base.tx, **_section(data, "geometry.tx", strict))
    rx = replace(base.rx, **_section(data, "geometry.rx", strict))

    link_in = _section(data, "link", strict)
    freq = link_in.pop("frequency", None)
    lam = link_in.pop("wavelength", None)
    if freq is not None and lam is not None:
        if abs(freq * lam - SPEED_OF_LIGHT) > 1e-3 * SPEED_OF_LIGHT:
            raise ConfigError(
                f"link.wavelength: {lam} m is inconsistent with link.frequency {freq} Hz "
                f"(expected {SPEED_OF_LIGHT / freq:.6g} m)"
            )
    elif freq is not None:
        lam = SPEED_OF_LIGHT / freq
    elif lam is not None:
        freq = SPEED_OF_LIGHT / lam
    else:
        freq, lam = base.frequency, base.link.wavelength
    renames = {"shadow_sigma": "shadow_sigma_db"}
    link = replace(base.link, wavelength=lam, **{renames.get(k, k): v for k, v in link_in.items()})

    optimizer = replace(base.optimizer, **_section(data, "optimizer", strict))
    ao = replace(base.ao, **_section(data, "ao", strict))

    sc = _section(data, "scenario", strict)
    if "name" in sc:
        sc["scenario"] = sc.pop("name")
    try:
        return replace(base, tx=tx, rx=rx, frequency=freq, link=link, optimizer=optimizer, ao=ao, **sc)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(
    path: str | Path,
    strict: bool = True,
    allow_defaults: bool = True,
    base: ScenarioConfig | None = None,
) -> ScenarioConfig:
    """Load a YAML scenario file.

    Unknown keys raise ``ConfigError`` when ``strict`` and are logged
    otherwise. An empty file yields the defaults only if ``allow_defaults``.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if data is None and not allow_defaults:
        raise ConfigError(f"{path}: empty config and defaults are not allowed")
    return config_from_dict(data, strict=strict, base=base)
