"""Python access to the pulseradar core.

Configs are plain dicts with the same layout as the JSON config files.
"""

import json as _json

from . import _core
from ._core import (
    Error,
    bench_xcorr,
    cross_correlate,
    dc_estimate,
    decode_frame,
    displacement,
    magnitude,
    peak_bin,
    phase,
    run_replay,
    unwrap,
    vibration_spectrum,
)

__all__ = [
    "Error",
    "bench_xcorr",
    "cross_correlate",
    "dc_estimate",
    "decode_frame",
    "default_config",
    "displacement",
    "load_config",
    "magnitude",
    "normalize_config",
    "peak_bin",
    "phase",
    "render",
    "run_batch",
    "run_replay",
    "unwrap",
    "vibration_spectrum",
]


def default_config():
    return _json.loads(_core.default_config())


def load_config(path):
    return _json.loads(_core.load_config(str(path)))


def normalize_config(config):
    """Fills defaults and validates. Returns (config, warnings)."""
    text, warnings = _core.normalize_config(_json.dumps(config))
    return _json.loads(text), warnings


def render(config, pulse_index=0):
    """Returns (rx1, rx2, truth_m, saturated) for one PRI."""
    return _core.render(_json.dumps(config), pulse_index)


def run_batch(config, pulses, out_dir):
    return _core.run_batch(_json.dumps(config), pulses, str(out_dir))
