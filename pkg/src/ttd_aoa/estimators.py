"""Angle estimators: ML grid search and smoothed-peak frequency mapping.

The ML route scans a discrete candidate-angle grid and minimizes the
residual ``sum_n |Z_n - Y_n(phi)|^2`` (equivalently maximizes the
Gaussian likelihood).  The grid pitch sets a quantization floor on the
achievable MSE, which is why the resolution is a first-class knob.

The peak route box-smooths the per-bin power |Z_n|^2 circularly, takes
the strongest bin f_hat, and maps it to an angle through

    phi_hat = arcsin( -(f tau_d) / (f + f_c) * c/d ),

the angle whose TTD beam points at f_hat.  Bin spacing limits this
estimator's accuracy no matter the SNR.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import ArrayConfig, FrequencyGrid, Observation, SignalSpec, noise_free_signal


class RangeError(ValueError):
    """arcsin argument left [-1, 1]: the peak bin is inconsistent with the
    array geometry (typically a band-edge bin at this tau_d, f_c)."""


@dataclass
class AngleGrid:
    """Ordered candidate angles for the ML search, radians."""

    angles: np.ndarray
    resolution: float

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        if self.angles.ndim != 1 or self.angles.size < 1:
            raise ValueError("angles must be a non-empty 1-D array")
        if self.angles.size > 1:
            diffs = np.diff(self.angles)
            if not np.all(diffs > 0):
                raise ValueError("angles must be strictly increasing")
            if not np.allclose(diffs, self.resolution, rtol=1e-9, atol=0.0):
                raise ValueError("angle spacing must be uniform and equal to resolution")
        if np.any(np.abs(self.angles) >= np.pi / 2):
            raise ValueError("candidate angles must satisfy |phi| < 90 deg")

    @classmethod
    def uniform_deg(cls, lo_deg: float = -60.0, hi_deg: float = 60.0, resolution_deg: float = 0.05) -> "AngleGrid":
        """Uniform grid in degrees, inclusive of both ends."""
        n = int(round((hi_deg - lo_deg) / resolution_deg)) + 1
        angles = np.deg2rad(np.linspace(lo_deg, hi_deg, n))
        return cls(angles=angles, resolution=np.deg2rad(resolution_deg))

    @property
    def num_angles(self) -> int:
        return self.angles.size


@dataclass
class PeakConfig:
    """Rectangular smoothing window for the peak method."""

    window_size: int = 5
    clamp_out_of_range: bool = True

    def __post_init__(self):
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ValueError(f"window_size must be an odd integer >= 1, got {self.window_size}")


@dataclass
class EstimateResult:
    """One angle estimate plus method-specific diagnostics."""

    phi_hat: float
    method: str
    diagnostic: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.phi_hat):
            raise ValueError("phi_hat must be finite")
        if self.method not in ("ml", "peak"):
            raise ValueError(f"unknown method {self.method!r}")


def ml_response_table(
    agrid: AngleGrid, fgrid: FrequencyGrid, sig: SignalSpec, cfg: ArrayConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Precompute Y(phi) for every candidate angle.

    Returns (table, row_energy): table[g, n] = Y_n(phi_g) and
    row_energy[g] = sum_n |Y_n(phi_g)|^2.  Reuse this across trials; it
    only depends on the configuration.
    """
    table = np.stack([noise_free_signal(a, fgrid, sig, cfg) for a in agrid.angles])
    row_energy = np.einsum("gn,gn->g", table.real, table.real) + np.einsum(
        "gn,gn->g", table.imag, table.imag
    )
    return table, row_energy


def ml_objective(samples: np.ndarray, table: np.ndarray, row_energy: np.ndarray) -> np.ndarray:
    """Residual sum |Z - Y(phi)|^2 minus the Z-only term, per candidate.

    ``samples`` may be (N,) or (T, N); output matches with a trailing
    candidate axis.  Dropping sum|Z|^2 does not move the argmin.
    """
    cross = samples @ table.conj().T
    return row_energy - 2.0 * cross.real


def ml_estimate(
    obs: Observation,
    agrid: AngleGrid,
    fgrid: FrequencyGrid,
    sig: SignalSpec,
    cfg: ArrayConfig,
    table: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> EstimateResult:
    """Grid-search ML estimate: argmin over candidates of sum |Z - Y(phi)|^2.

    Ties resolve to the smallest angle (argmin returns the first hit on an
    ascending grid).  The diagnostic carries the full residual at the
    optimum.
    """
    if table is None:
        table = ml_response_table(agrid, fgrid, sig, cfg)
    objective = ml_objective(obs.samples, *table)
    idx = int(np.argmin(objective))
    residual = float(objective[idx] + np.sum(np.abs(obs.samples) ** 2))
    return EstimateResult(phi_hat=float(agrid.angles[idx]), method="ml", diagnostic={"residual": residual})


def smooth_circular(samples: np.ndarray, window_size: int) -> np.ndarray:
    """Circular box sum of per-bin power.

    out[n] = sum_{k=-(b-1)/2}^{(b-1)/2} |Z[(n+k) mod N]|^2 for odd b.
    Accepts (..., N); smoothing runs along the last axis, so trial batches
    go through the same code path as single vectors.
    """
    z = np.asarray(samples)
    n = z.shape[-1]
    b = window_size
    if b % 2 == 0 or not 1 <= b <= n:
        raise ValueError(f"window_size must be odd and within [1, {n}], got {b}")
    power = np.abs(z) ** 2 if np.iscomplexobj(z) else np.square(z.astype(float))
    half = (b - 1) // 2
    out = power.copy()
    for k in range(1, half + 1):
        out += np.roll(power, k, axis=-1)
        out += np.roll(power, -k, axis=-1)
    return out


def angle_from_peak_freq(f_hat, cfg: ArrayConfig, clamp: bool = True):
    """arcsin map from a peak frequency to the angle it steers to.

    Arguments beyond [-1, 1] are clamped to +-90 deg when ``clamp`` is
    set, otherwise :class:`RangeError` is raised.  Broadcasts over f_hat.
    """
    f = np.asarray(f_hat, dtype=float)
    arg = -(f * cfg.ttd_delay) / (f + cfg.carrier_freq) / cfg.spacing_delay
    out_of_range = np.abs(arg) > 1.0
    if np.any(out_of_range):
        if not clamp:
            bad = np.atleast_1d(arg)[np.atleast_1d(out_of_range)][0]
            raise RangeError(
                f"arcsin argument {bad:+.6f} outside [-1, 1]; peak frequency is "
                f"inconsistent with this (tau_d, f_c, d) geometry"
            )
        arg = np.clip(arg, -1.0, 1.0)
    out = np.arcsin(arg)
    return out[()] if isinstance(out, np.ndarray) and out.ndim == 0 else out


def peak_estimate(
    obs: Observation,
    pcfg: PeakConfig,
    fgrid: FrequencyGrid,
    cfg: ArrayConfig,
) -> EstimateResult:
    """Smoothed-power peak estimate.

    Picks the bin maximizing the circularly smoothed power (ties go to
    the lowest frequency) and maps it through the arcsin relation.
    Requires tau_d > 0, otherwise every frequency maps to zero.
    """
    if not cfg.ttd_delay > 0:
        raise ValueError("peak estimation requires ttd_delay > 0 (the frequency-angle map is degenerate)")
    smoothed = smooth_circular(obs.samples, pcfg.window_size)
    idx = int(np.argmax(smoothed))
    f_hat = float(fgrid.bin_freqs[idx])
    phi_hat = float(angle_from_peak_freq(f_hat, cfg, clamp=pcfg.clamp_out_of_range))
    return EstimateResult(
        phi_hat=phi_hat,
        method="peak",
        diagnostic={"peak_freq_hz": f_hat, "smoothed_power": float(smoothed[idx])},
    )


def invert_angle_to_peak_freq(phi: float, cfg: ArrayConfig) -> float:
    """Frequency whose arcsin map returns ``phi``; test/measurement helper.

    f* = -f_c (d/c) sin(phi) / ((d/c) sin(phi) + tau_d).  Errors out when
    the denominator degenerates (the map has no finite preimage there).
    """
    if not abs(phi) < np.pi / 2:
        raise ValueError("phi must satisfy |phi| < 90 deg")
    s = cfg.spacing_delay * np.sin(phi)
    denom = s + cfg.ttd_delay
    if abs(denom) < 1e-18:
        raise ValueError("degenerate geometry: (d/c) sin(phi) + tau_d is zero; no finite peak frequency")
    return float(-cfg.carrier_freq * s / denom)
