"""Frequency-domain signal model for a true-time-delay uniform linear array.

A plane wave with carrier ``f_c`` hits an M-element ULA at angle ``phi``
(measured from the array normal).  Each element applies an incremental
baseband delay ``m * tau_d``, which makes the array response frequency
dependent: every frequency bin points the beam at a slightly different
angle.  That coupling is what the rest of the toolkit exploits.

Conventions used throughout the package:

* angles are radians internally (degrees only at CLI/CSV boundaries),
* frequencies are Hz, delays are seconds,
* the common channel gain/phase is assumed known and compensated
  (unit gain), so it never appears as a parameter,
* baseband bins live on the midpoint grid ``f_n = -B/2 + (n + 1/2) B/N``,
* the transmit spectrum is flat with real amplitude ``sqrt(E_s / B)`` per
  bin, so the per-bin SNR is ``(E_s/B) / sigma_v^2`` *before* array
  combining.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WAVE_SPEED = 3.0e8
"""Default propagation speed in m/s."""

_SINGULAR_SIN_HALF = 1e-8
"""Below this |sin(psi/2)| the geometric-series ratio is replaced by its
analytic limit."""


def _maybe_scalar(x: np.ndarray):
    """Return a Python scalar for 0-d arrays, pass arrays through."""
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


@dataclass
class ArrayConfig:
    """Physical array and waveform parameters.

    Attributes:
        num_elements: number of ULA elements M (>= 2)
        element_spacing: inter-element distance d in meters
        carrier_freq: carrier f_c in Hz
        bandwidth: two-sided baseband bandwidth B in Hz
        ttd_delay: per-element true-time-delay increment tau_d in seconds
        wave_speed: propagation speed c in m/s
    """

    num_elements: int
    element_spacing: float
    carrier_freq: float
    bandwidth: float
    ttd_delay: float
    wave_speed: float = WAVE_SPEED

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 2:
            raise ValueError(f"num_elements must be an integer >= 2, got {self.num_elements}")
        self.num_elements = int(self.num_elements)
        if not self.element_spacing > 0:
            raise ValueError(f"element_spacing must be > 0, got {self.element_spacing}")
        if not self.carrier_freq > 0:
            raise ValueError(f"carrier_freq must be > 0, got {self.carrier_freq}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not self.wave_speed > 0:
            raise ValueError(f"wave_speed must be > 0, got {self.wave_speed}")
        if self.ttd_delay < 0:
            raise ValueError(f"ttd_delay must be >= 0, got {self.ttd_delay}")
        if not self.bandwidth < 2.0 * self.carrier_freq:
            raise ValueError(
                f"bandwidth {self.bandwidth} must be < 2 * carrier_freq so every bin "
                f"sits at a positive absolute frequency"
            )

    @property
    def relative_bandwidth(self) -> float:
        """B / f_c, the knob that separates narrowband from wideband."""
        return self.bandwidth / self.carrier_freq

    @property
    def spacing_delay(self) -> float:
        """d / c in seconds; the spatial delay across one element at broadside."""
        return self.element_spacing / self.wave_speed


@dataclass
class FrequencyGrid:
    """Uniform baseband frequency bins on [-B/2, B/2].

    Bins are midpoints: ``f_n = (n - (N-1)/2) * B/N``.  The midpoint
    convention keeps quadratures endpoint-free and makes the grid exactly
    symmetric around 0 (bin k and bin N-1-k negate bitwise).
    """

    bandwidth: float
    bin_freqs: np.ndarray

    def __post_init__(self):
        self.bin_freqs = np.asarray(self.bin_freqs, dtype=float)
        if self.bin_freqs.ndim != 1 or self.bin_freqs.size < 1:
            raise ValueError("bin_freqs must be a non-empty 1-D array")
        diffs = np.diff(self.bin_freqs)
        if self.bin_freqs.size > 1:
            if not np.all(diffs > 0):
                raise ValueError("bin_freqs must be strictly increasing")
            step = self.bandwidth / self.bin_freqs.size
            if not np.allclose(diffs, step, rtol=1e-9, atol=0.0):
                raise ValueError("bin spacing must be uniform and equal to B/N")
        half = 0.5 * self.bandwidth * (1.0 + 1e-12)
        if np.any(np.abs(self.bin_freqs) > half):
            raise ValueError("all bins must lie inside [-B/2, B/2]")

    @classmethod
    def midpoint(cls, bandwidth: float, num_bins: int) -> "FrequencyGrid":
        """Midpoint grid with ``num_bins`` bins over [-B/2, B/2]."""
        if num_bins < 1:
            raise ValueError(f"num_bins must be >= 1, got {num_bins}")
        step = bandwidth / num_bins
        freqs = (np.arange(num_bins) - 0.5 * (num_bins - 1)) * step
        return cls(bandwidth=bandwidth, bin_freqs=freqs)

    @property
    def num_bins(self) -> int:
        return self.bin_freqs.size

    @property
    def delta_f(self) -> float:
        return self.bandwidth / self.num_bins


@dataclass
class SignalSpec:
    """Flat transmit spectrum: every bin carries the same real amplitude.

    ``per_bin_amplitude**2 * B`` equals the total signal energy, i.e.
    ``sum_n |X_n|^2 * delta_f = E_s``.
    """

    total_energy: float
    per_bin_amplitude: float

    def __post_init__(self):
        if not self.total_energy > 0:
            raise ValueError(f"total_energy must be > 0, got {self.total_energy}")
        if self.per_bin_amplitude < 0:
            raise ValueError("per_bin_amplitude must be >= 0")

    @classmethod
    def flat(cls, total_energy: float, bandwidth: float) -> "SignalSpec":
        """Flat, symmetric spectrum with |X_n|^2 = E_s / B."""
        return cls(total_energy=total_energy, per_bin_amplitude=float(np.sqrt(total_energy / bandwidth)))

    @property
    def per_bin_power(self) -> float:
        """|X_n|^2, identical across bins."""
        return self.per_bin_amplitude**2

    def check_consistent(self, grid: FrequencyGrid) -> None:
        """Verify sum_n |X_n|^2 * delta_f = E_s to 1e-12 relative."""
        total = self.per_bin_power * grid.num_bins * grid.delta_f
        if abs(total - self.total_energy) > 1e-12 * self.total_energy:
            raise ValueError(
                f"flat-spectrum energy mismatch: sum |X_n|^2 df = {total}, expected {self.total_energy}"
            )


@dataclass
class Observation:
    """One noisy frequency-domain snapshot Z = Y + V.

    ``noise_variance`` is the per-bin complex noise power sigma_v^2;
    it is 0.0 only when produced through the noiseless path.
    ``rng_seed`` is the 64-bit seed that regenerates V bit-identically.
    """

    samples: np.ndarray
    noise_variance: float
    rng_seed: int
    true_angle: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1:
            raise ValueError("samples must be a 1-D complex vector")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")

    @property
    def num_bins(self) -> int:
        return self.samples.size


def psi(f, phi, cfg: ArrayConfig):
    """Per-element phase increment ``2 pi [(f_c + f)(d/c) sin(phi) + f tau_d]``.

    ``f`` and ``phi`` broadcast; result in radians.  Callers must keep
    |phi| < pi/2.
    """
    f = np.asarray(f, dtype=float)
    spatial = (cfg.carrier_freq + f) * cfg.spacing_delay * np.sin(phi)
    return _maybe_scalar(2.0 * np.pi * (spatial + f * cfg.ttd_delay))


def _wrap_centered(psi_val: np.ndarray) -> np.ndarray:
    """Reduce psi to (-pi, pi] preserving the value mod 2*pi."""
    two_pi = 2.0 * np.pi
    w = np.mod(psi_val, two_pi)
    return np.where(w > np.pi, w - two_pi, w)


def _response_from_psi(psi_val, m: int) -> np.ndarray:
    """Geometric-series form of sum_{k=0..M-1} exp(-j k psi).

    Every factor is evaluated at the 2*pi-wrapped phase; the product is
    exactly periodic, so this is safe.  Near psi = 2 pi k the ratio
    degenerates 0/0 and the analytic limit M * exp(-j (M-1) psi / 2) is
    substituted instead.
    """
    pc = _wrap_centered(np.asarray(psi_val, dtype=float))
    s = np.sin(0.5 * pc)
    phase = np.exp(-0.5j * (m - 1) * pc)
    singular = np.abs(s) < _SINGULAR_SIN_HALF
    # avoid 0/0 warnings; singular lanes are overwritten below
    safe = np.where(singular, 1.0, s)
    ratio = np.sin(0.5 * m * pc) / safe
    return np.where(singular, m * phase, phase * ratio)


def array_response(f, phi, cfg: ArrayConfig):
    """Array transfer function H(f, phi) = sum_m exp(-j m psi(f, phi)).

    Uses the closed geometric-series form with explicit limit handling at
    psi = 2 pi k, where H = M exactly in magnitude.
    """
    h = _response_from_psi(psi(f, phi, cfg), cfg.num_elements)
    return _maybe_scalar(np.asarray(h))


def direct_array_response(f, phi, cfg: ArrayConfig):
    """Brute-force M-term sum; oracle for :func:`array_response`."""
    p = np.asarray(psi(f, phi, cfg), dtype=float)
    m = np.arange(cfg.num_elements)
    return _maybe_scalar(np.exp(-1j * p[..., None] * m).sum(axis=-1))


def noise_free_signal(phi: float, grid: FrequencyGrid, sig: SignalSpec, cfg: ArrayConfig) -> np.ndarray:
    """Noise-free observation Y_n = X_n H(f_n, phi) on the bin grid."""
    _check_grid_matches(grid, cfg)
    sig.check_consistent(grid)
    return sig.per_bin_amplitude * array_response(grid.bin_freqs, phi, cfg)


def observation_gradient(phi: float, grid: FrequencyGrid, sig: SignalSpec, cfg: ArrayConfig) -> np.ndarray:
    """dY/dphi per bin: X_n * (-j dpsi/dphi) * sum_m m exp(-j m psi_n).

    Feeds the likelihood score and the per-bin Fisher information sum.
    """
    _check_grid_matches(grid, cfg)
    p = np.asarray(psi(grid.bin_freqs, phi, cfg), dtype=float)
    m = np.arange(cfg.num_elements)
    weighted = (m * np.exp(-1j * p[:, None] * m)).sum(axis=1)
    dpsi_dphi = 2.0 * np.pi * (cfg.carrier_freq + grid.bin_freqs) * cfg.spacing_delay * np.cos(phi)
    return sig.per_bin_amplitude * (-1j) * dpsi_dphi * weighted


def _check_grid_matches(grid: FrequencyGrid, cfg: ArrayConfig) -> None:
    if abs(grid.bandwidth - cfg.bandwidth) > 1e-9 * cfg.bandwidth:
        raise ValueError(
            f"frequency grid bandwidth {grid.bandwidth} does not match config bandwidth {cfg.bandwidth}"
        )


def noise_variance_for_snr(sig: SignalSpec, snr_db: float) -> float:
    """Per-bin noise power for a given pre-combining per-bin SNR in dB."""
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    return sig.per_bin_power / 10.0 ** (snr_db / 10.0)


def complex_noise(rng: np.random.Generator, num_bins: int, variance: float) -> np.ndarray:
    """Circularly-symmetric complex Gaussian vector, variance per bin.

    Draw order is fixed (all real parts, then all imaginary parts) so a
    seed reproduces the same vector everywhere.
    """
    x = rng.standard_normal(2 * num_bins) * np.sqrt(0.5 * variance)
    return x[:num_bins] + 1j * x[num_bins:]


def generate_observation(
    phi: float,
    snr_db: float,
    seed: int,
    grid: FrequencyGrid,
    sig: SignalSpec,
    cfg: ArrayConfig,
    noiseless: bool = False,
) -> Observation:
    """Draw Z = Y + V with V ~ CN(0, sigma_v^2) i.i.d. per bin.

    sigma_v^2 = |X_n|^2 / 10^(snr_db/10).  The same
    (phi, snr_db, seed, grid, sig, cfg) reproduce Z bit for bit.  With
    ``noiseless=True`` the variance is forced to 0 and Z = Y exactly.
    """
    y = noise_free_signal(phi, grid, sig, cfg)
    if noiseless:
        return Observation(samples=y, noise_variance=0.0, rng_seed=int(seed), true_angle=phi)
    variance = noise_variance_for_snr(sig, snr_db)
    rng = np.random.default_rng(seed)
    v = complex_noise(rng, grid.num_bins, variance)
    return Observation(samples=y + v, noise_variance=variance, rng_seed=int(seed), true_angle=phi)
