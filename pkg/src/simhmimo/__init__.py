"""Achievable-rate optimisation for MIMO links with stacked metasurfaces at
both ends: channel model, projected gradient ascent, baselines and
experiment harness."""

__version__ = "0.1.0"
