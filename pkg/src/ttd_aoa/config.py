"""Configuration resolution for the command-line front end.

Config files are flat INI (one section per concern); every key can be
overridden by a CLI flag, unknown keys are rejected.  Frequencies accept
unit suffixes (Hz/kHz/MHz/GHz), delays accept s/ms/us/ns or the literal
``1/B``, which resolves against the effective bandwidth.  Angles are
degrees at this boundary and radians everywhere behind it.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

import numpy as np

from .estimators import AngleGrid, PeakConfig
from .model import ArrayConfig, FrequencyGrid, SignalSpec
from .montecarlo import ESTIMATOR_ORDER, SweepConfig


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""


_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}

DEFAULTS = {
    "array": {
        "m": "8",
        "d": "0.04",
        "f_c": "3.75 GHz",
        "b": "20 MHz",
        "tau_d": "1/B",
        "c": "3e8",
    },
    "signal": {
        "energy": "1.0",
        "n": "512",
    },
    "estimator": {
        "grid_min_deg": "-60",
        "grid_max_deg": "60",
        "grid_res_deg": "0.05",
        "window_b": "5",
        "clamp": "true",
    },
    "sweep": {
        "snr_min": "-20",
        "snr_max": "10",
        "snr_step": "5",
        "m_set": "8,16,32",
        "estimators": "ml,peak",
        "trials": "10000",
        "base_seed": "1234",
        "angle_mode": "fixed",
        "phi_deg": "0",
        "angle_min_deg": "-60",
        "angle_max_deg": "60",
        "angle_points": "121",
        "workers": "1",
        "strict_range": "false",
        "noiseless": "false",
    },
}

_ANGLE_MODES = {"fixed": "fixed_angle", "averaged": "averaged"}


def parse_frequency(text: str) -> float:
    """'3.75 GHz', '20MHz' or a plain number in Hz."""
    s = str(text).strip()
    m = re.fullmatch(r"([-+0-9.eE]+)\s*([kMG]?Hz)?", s)
    if not m:
        raise ConfigError(f"cannot parse frequency {text!r} (expected e.g. '20 MHz' or '2e7')")
    value = float(m.group(1))
    if m.group(2):
        value *= _FREQ_UNITS[m.group(2).lower()]
    return value


def parse_delay(text: str, bandwidth: float) -> float:
    """'50 ns', a plain number in seconds, or '1/B' against ``bandwidth``."""
    s = str(text).strip()
    if s.lower().replace(" ", "") == "1/b":
        return 1.0 / bandwidth
    m = re.fullmatch(r"([-+0-9.eE]+)\s*(s|ms|us|ns)?", s)
    if not m:
        raise ConfigError(f"cannot parse delay {text!r} (expected e.g. '50 ns', '5e-8' or '1/B')")
    value = float(m.group(1))
    if m.group(2):
        value *= _TIME_UNITS[m.group(2)]
    return value


def _parse_bool(text: str) -> bool:
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def _parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse integer list {text!r}") from exc


@dataclass
class ResolvedConfig:
    """Fully resolved run parameters plus a flat echo for the manifest."""

    array: ArrayConfig
    num_bins: int
    signal_energy: float
    angle_grid: AngleGrid
    peak: PeakConfig
    snr_grid_db: tuple
    m_set: tuple
    estimator_set: tuple
    trials: int
    base_seed: int
    angle_mode: str
    phi_deg: float
    angle_range_deg: tuple
    angle_points: int
    workers: int
    strict_range: bool
    noiseless: bool
    echo: dict = field(default_factory=dict)

    def frequency_grid(self) -> FrequencyGrid:
        return FrequencyGrid.midpoint(self.array.bandwidth, self.num_bins)

    def signal(self) -> SignalSpec:
        return SignalSpec.flat(self.signal_energy, self.array.bandwidth)

    def angle_set_rad(self) -> tuple:
        if self.angle_mode == "fixed_angle":
            return (float(np.deg2rad(self.phi_deg)),)
        lo, hi = self.angle_range_deg
        return tuple(np.deg2rad(np.linspace(lo, hi, self.angle_points)))

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(
            array_template=self.array,
            num_bins=self.num_bins,
            signal_energy=self.signal_energy,
            snr_grid_db=self.snr_grid_db,
            m_set=self.m_set,
            estimator_set=self.estimator_set,
            trials=self.trials,
            base_seed=self.base_seed,
            angle_mode=self.angle_mode,
            angle_set_rad=self.angle_set_rad(),
            angle_grid=self.angle_grid,
            peak_config=self.peak,
            noiseless=self.noiseless,
            strict_range=self.strict_range,
            workers=self.workers,
        )


def _read_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}] in {path}")
        for key, value in parser.items(section):
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}] of {path}")
            values[(section, key)] = value
    return values


def resolve_config(path: str | None = None, overrides: dict | None = None) -> ResolvedConfig:
    """Merge defaults, optional INI file and flag overrides, then validate.

    ``overrides`` maps (section, key) to string values; unknown keys are
    rejected with the offending name.
    """
    values = {(s, k): v for s, section in DEFAULTS.items() for k, v in section.items()}
    if path is not None:
        values.update(_read_file(path))
    for (section, key), value in (overrides or {}).items():
        if section not in DEFAULTS or key not in DEFAULTS[section]:
            raise ConfigError(f"unknown config key [{section}] {key}")
        if value is not None:
            values[(section, key)] = str(value)

    try:
        bandwidth = parse_frequency(values[("array", "b")])
        array = ArrayConfig(
            num_elements=int(values[("array", "m")]),
            element_spacing=float(values[("array", "d")]),
            carrier_freq=parse_frequency(values[("array", "f_c")]),
            bandwidth=bandwidth,
            ttd_delay=parse_delay(values[("array", "tau_d")], bandwidth),
            wave_speed=float(values[("array", "c")]),
        )
        num_bins = int(values[("signal", "n")])
        if num_bins < 1:
            raise ConfigError("signal n must be >= 1")
        energy = float(values[("signal", "energy")])
        grid = AngleGrid.uniform_deg(
            float(values[("estimator", "grid_min_deg")]),
            float(values[("estimator", "grid_max_deg")]),
            float(values[("estimator", "grid_res_deg")]),
        )
        peak = PeakConfig(
            window_size=int(values[("estimator", "window_b")]),
            clamp_out_of_range=_parse_bool(values[("estimator", "clamp")]),
        )
        snr_min = float(values[("sweep", "snr_min")])
        snr_max = float(values[("sweep", "snr_max")])
        snr_step = float(values[("sweep", "snr_step")])
        if snr_step <= 0 or snr_max < snr_min:
            raise ConfigError("need snr_step > 0 and snr_max >= snr_min")
        count = int(round((snr_max - snr_min) / snr_step)) + 1
        snr_grid = tuple(snr_min + i * snr_step for i in range(count))
        mode_key = str(values[("sweep", "angle_mode")]).strip().lower()
        if mode_key not in _ANGLE_MODES:
            raise ConfigError(f"angle_mode must be one of {sorted(_ANGLE_MODES)}, got {mode_key!r}")
        estimators = tuple(e.strip() for e in str(values[("sweep", "estimators")]).split(","))
        if not set(estimators) <= set(ESTIMATOR_ORDER):
            raise ConfigError(f"estimators must be a subset of {ESTIMATOR_ORDER}")
        phi_deg = float(values[("sweep", "phi_deg")])
        if abs(phi_deg) > 90.0:
            raise ConfigError("phi_deg must satisfy |phi| <= 90")

        resolved = ResolvedConfig(
            array=array,
            num_bins=num_bins,
            signal_energy=energy,
            angle_grid=grid,
            peak=peak,
            snr_grid_db=snr_grid,
            m_set=_parse_int_list(values[("sweep", "m_set")]),
            estimator_set=estimators,
            trials=int(values[("sweep", "trials")]),
            base_seed=int(values[("sweep", "base_seed")]),
            angle_mode=_ANGLE_MODES[mode_key],
            phi_deg=phi_deg,
            angle_range_deg=(
                float(values[("sweep", "angle_min_deg")]),
                float(values[("sweep", "angle_max_deg")]),
            ),
            angle_points=int(values[("sweep", "angle_points")]),
            workers=int(values[("sweep", "workers")]),
            strict_range=_parse_bool(values[("sweep", "strict_range")]),
            noiseless=_parse_bool(values[("sweep", "noiseless")]),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    resolved.echo = {f"{section}.{key}": str(values[(section, key)]) for section, key in sorted(values)}
    resolved.echo.update(
        {
            "resolved.tau_d_s": repr(array.ttd_delay),
            "resolved.f_c_hz": repr(array.carrier_freq),
            "resolved.b_hz": repr(array.bandwidth),
            "resolved.snr_grid_db": ",".join(repr(s) for s in snr_grid),
        }
    )
    return resolved
