"""Fisher information and Cramer-Rao bounds for the TTD angle estimate.

The angle information carried by one frequency bin factors into the
per-bin signal power, the phase-sensitivity term
``(2 pi (f + f_c)(d/c) cos(phi))^2`` and the array-geometry factor

    kappa(f, phi) = | sum_{m=0}^{M-1} m exp(-j m psi(f, phi)) |^2,

an even, 2*pi-periodic function of psi.  Treating the bin frequency as
uniform on [-B/2, B/2] turns the bin sum into moments of kappa
(kappa0 = E[kappa], kappa1 = E[f kappa], kappa2 = E[f^2 kappa]), and in
the narrowband limit only the ``f_c^2 kappa0`` term survives, which gives
the one-line bound :func:`crb_simplified`.

Three routes to the same number are kept side by side on purpose,
so each can serve as a check on the others:
:func:`fisher_information_exact` (per-bin sum),
:func:`fisher_information_moments` (kappa-moment form) and
:func:`crb_simplified`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import ArrayConfig, FrequencyGrid, SignalSpec, psi

# Below this |sin(psi/2)| the kappa ratio form loses most of its mantissa to
# cancellation, so the direct index-weighted sum (stable there: all terms add
# nearly in phase) takes over.
_NEAR_SINGULAR_SIN_HALF = 5e-3

DEFAULT_QUAD_BINS = 4096
DEFAULT_KAPPA_FLOOR_DB = -100.0


class ConvergenceError(RuntimeError):
    """Raised when the quadrature doubling check never settles."""


@dataclass
class KappaMoments:
    """Moments of kappa under f ~ U(-B/2, B/2) at a fixed angle."""

    kappa0: float
    kappa1: float
    kappa2: float
    quadrature_bins: int
    phi: float

    def __post_init__(self):
        if self.kappa0 < 0 or self.kappa2 < 0:
            raise ValueError("kappa0 and kappa2 are integrals of non-negative quantities")


@dataclass
class FisherResult:
    """Fisher information (rad^-2) and the matching variance bound (rad^2)."""

    fisher_info: float
    crb: float
    method: str

    def __post_init__(self):
        if self.fisher_info < 0:
            raise ValueError("fisher_info must be >= 0")
        if self.method not in ("exact_sum", "moment_form", "simplified"):
            raise ValueError(f"unknown method {self.method!r}")


def index_weighted_sum(psi_val, num_elements: int) -> np.ndarray:
    """Direct sum_m m exp(-j m psi); brute-force oracle for kappa."""
    p = np.asarray(psi_val, dtype=float)
    m = np.arange(num_elements)
    return (m * np.exp(-1j * p[..., None] * m)).sum(axis=-1)


def kappa_from_psi(psi_val, num_elements: int) -> np.ndarray:
    """kappa as a function of the phase increment psi.

    Evaluates the closed form

        [(1 - M cos((M-1)psi) + (M-1) cos(M psi))^2
         + (M sin((M-1)psi) - (M-1) sin(M psi))^2] / (16 sin^4(psi/2))

    away from psi = 2 pi k, and the direct index-weighted sum inside a
    small guard band around the singularities where the closed form
    cancels catastrophically.  At psi = 0 (mod 2 pi) this returns exactly
    (M(M-1)/2)^2.  |psi| is taken first, which makes evenness in psi hold
    bitwise.
    """
    m = num_elements
    pa = np.abs(np.asarray(psi_val, dtype=float))
    two_pi = 2.0 * np.pi
    w = np.mod(pa, two_pi)
    pc = np.where(w > np.pi, w - two_pi, w)

    s = np.sin(0.5 * pc)
    near = np.abs(s) < _NEAR_SINGULAR_SIN_HALF
    safe_pc = np.where(near, np.pi, pc)  # keeps the ratio form finite off-branch

    cos_m1 = np.cos((m - 1) * safe_pc)
    cos_m = np.cos(m * safe_pc)
    sin_m1 = np.sin((m - 1) * safe_pc)
    sin_m = np.sin(m * safe_pc)
    num = (1.0 - m * cos_m1 + (m - 1) * cos_m) ** 2 + (m * sin_m1 - (m - 1) * sin_m) ** 2
    denom = 16.0 * np.sin(0.5 * safe_pc) ** 4
    out = num / denom

    if np.any(near):
        out = np.asarray(out)
        pc_near = np.asarray(pc)[near] if np.ndim(pc) else pc
        out[near] = np.abs(index_weighted_sum(pc_near, m)) ** 2
    return out


def kappa(f, phi, cfg: ArrayConfig):
    """Array-geometry information factor kappa(f, phi); broadcasts over f, phi."""
    out = kappa_from_psi(psi(f, phi, cfg), cfg.num_elements)
    out = np.asarray(out)
    return out[()] if out.ndim == 0 else out


def kappa_peak(num_elements: int) -> float:
    """Maximum of kappa, attained at psi = 0: (M(M-1)/2)^2."""
    return (num_elements * (num_elements - 1) / 2.0) ** 2


def kappa_grid(f_points, phi_points, cfg: ArrayConfig, floor_db: float = DEFAULT_KAPPA_FLOOR_DB) -> np.ndarray:
    """10 log10(kappa) on the outer grid f_points x phi_points.

    Returns shape (len(f_points), len(phi_points)); entries below
    ``floor_db`` (including -inf from kappa = 0) are clamped to it.
    """
    f = np.atleast_1d(np.asarray(f_points, dtype=float))
    p = np.atleast_1d(np.asarray(phi_points, dtype=float))
    if f.size == 0 or p.size == 0:
        raise ValueError("f_points and phi_points must be non-empty")
    k = kappa(f[:, None], p[None, :], cfg)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(k)
    return np.maximum(db, floor_db)


def _moments_once(phi: float, cfg: ArrayConfig, quad_bins: int) -> tuple[float, float, float]:
    grid = FrequencyGrid.midpoint(cfg.bandwidth, quad_bins)
    f = grid.bin_freqs
    k = kappa(f, phi, cfg)
    return float(np.mean(k)), float(np.mean(f * k)), float(np.mean(f * f * k))


def kappa_moments(
    phi: float,
    cfg: ArrayConfig,
    quad_bins: int = DEFAULT_QUAD_BINS,
    refine: bool = True,
    rel_tol: float = 1e-6,
    max_doublings: int = 6,
) -> KappaMoments:
    """Midpoint-rule moments (kappa0, kappa1, kappa2) over [-B/2, B/2].

    With ``refine=True`` the bin count is doubled until all three moments
    move by less than ``rel_tol`` relative (each measured against a scale
    floor of kappa0 * (B/2)^i, so a moment that is legitimately zero does
    not stall the test); :class:`ConvergenceError` is raised if the check
    still fails after ``max_doublings`` doublings.  With ``refine=False``
    the moments are evaluated at exactly ``quad_bins`` midpoints, which is
    what the matched-discretization identity with the per-bin Fisher sum
    requires.
    """
    if quad_bins < 64:
        raise ValueError(f"quad_bins must be >= 64, got {quad_bins}")
    bins = int(quad_bins)
    current = _moments_once(phi, cfg, bins)
    if not refine:
        return KappaMoments(*current, quadrature_bins=bins, phi=phi)

    half_b = 0.5 * cfg.bandwidth
    for _ in range(max_doublings):
        finer = _moments_once(phi, cfg, 2 * bins)
        scales = [max(abs(finer[0]), 1e-300) * half_b**i for i in range(3)]
        ok = all(
            abs(new - old) <= rel_tol * max(abs(new), 1e-9 * scale)
            for new, old, scale in zip(finer, current, scales)
        )
        bins *= 2
        current = finer
        if ok:
            return KappaMoments(*current, quadrature_bins=bins, phi=phi)
    raise ConvergenceError(
        f"kappa moments did not converge to rel_tol={rel_tol} after "
        f"{max_doublings} doublings (reached {bins} bins) at phi={phi}"
    )


def _result(info: float, method: str) -> FisherResult:
    crb = 1.0 / info if info > 0 else np.inf
    return FisherResult(fisher_info=info, crb=crb, method=method)


def _cos_sensitivity(phi: float) -> float:
    """cos(phi) with endfire snapped to exactly zero.

    float(pi/2) leaves cos ~ 6e-17, which would turn the infinite endfire
    bound into a meaningless 1e25; anything within ~1e-12 rad of +-90 deg
    reports the sentinel instead.
    """
    c = np.cos(phi)
    return 0.0 if abs(c) < 1e-12 else float(c)


def fisher_information_exact(
    phi: float,
    grid: FrequencyGrid,
    sig: SignalSpec,
    cfg: ArrayConfig,
    noise_variance: float,
) -> FisherResult:
    """Per-bin Fisher information sum.

    I(phi) = (2/sigma_v^2) sum_n |X_n|^2 (2 pi (f_n + f_c)(d/c) cos phi)^2
             kappa(f_n, phi).

    The modulus of the per-bin derivative factorizes exactly, so this is
    an equality, not a bound.  cos(phi) = 0 gives I = 0 and an infinite
    variance bound (reported as +inf, never NaN).
    """
    if not noise_variance > 0:
        raise ValueError("noise_variance must be > 0")
    f = grid.bin_freqs
    sens = 2.0 * np.pi * (f + cfg.carrier_freq) * cfg.spacing_delay * _cos_sensitivity(phi)
    info = (2.0 / noise_variance) * sig.per_bin_power * float(np.sum(sens**2 * kappa(f, phi, cfg)))
    return _result(info, "exact_sum")


def fisher_information_moments(
    phi: float,
    sig: SignalSpec,
    cfg: ArrayConfig,
    noise_variance: float,
    num_bins: int,
    quad_bins: int = DEFAULT_QUAD_BINS,
    refine: bool = True,
    moments: KappaMoments | None = None,
) -> FisherResult:
    """Moment-form Fisher information.

    I(phi) = (2 E_s N / (B sigma_v^2)) (2 pi (d/c) cos phi)^2
             [kappa2 + 2 f_c kappa1 + f_c^2 kappa0].

    Note the 1/B: with the flat spectrum |X_n|^2 = E_s/B the prefactor is
    per-bin power times bin count, (2 N |X_n|^2 / sigma_v^2).  Writing it
    without the 1/B does not reproduce the per-bin sum.  At
    ``quad_bins = num_bins`` with ``refine=False`` this matches
    :func:`fisher_information_exact` to floating-point rounding.
    """
    if not noise_variance > 0:
        raise ValueError("noise_variance must be > 0")
    if moments is None:
        moments = kappa_moments(phi, cfg, quad_bins=quad_bins, refine=refine)
    bracket = moments.kappa2 + 2.0 * cfg.carrier_freq * moments.kappa1 + cfg.carrier_freq**2 * moments.kappa0
    scale = 2.0 * sig.total_energy * num_bins / (cfg.bandwidth * noise_variance)
    info = scale * (2.0 * np.pi * cfg.spacing_delay * _cos_sensitivity(phi)) ** 2 * bracket
    return _result(max(info, 0.0), "moment_form")


def crb_simplified(
    phi: float,
    sig: SignalSpec,
    cfg: ArrayConfig,
    noise_variance: float,
    num_bins: int,
    quad_bins: int = DEFAULT_QUAD_BINS,
    kappa0: float | None = None,
) -> float:
    """Narrowband (f_c^2 >> B^2) variance bound in rad^2.

    Var(phi_hat) >= B sigma_v^2 /
                    (2 E_s N kappa0 (2 pi f_c (d/c) cos phi)^2)

    Returns +inf at cos(phi) = 0.
    """
    if not noise_variance > 0:
        raise ValueError("noise_variance must be > 0")
    if kappa0 is None:
        kappa0 = kappa_moments(phi, cfg, quad_bins=quad_bins).kappa0
    sens = 2.0 * np.pi * cfg.carrier_freq * cfg.spacing_delay * _cos_sensitivity(phi)
    info = (2.0 * sig.total_energy * num_bins / (cfg.bandwidth * noise_variance)) * kappa0 * sens**2
    return 1.0 / info if info > 0 else np.inf


@dataclass
class KappaBandwidthRow:
    """Angle-averaged kappa moments at one (relative bandwidth, M) point."""

    beta: float
    num_elements: int
    kappa0_bar: float
    kappa1_bar: float
    kappa2_bar: float


def kappa_bandwidth_sweep(
    beta_points,
    m_points,
    cfg_base: ArrayConfig,
    phi_grid_points: int = 121,
    phi_range_deg: tuple[float, float] = (-60.0, 60.0),
    quad_bins: int = DEFAULT_QUAD_BINS,
) -> list[KappaBandwidthRow]:
    """Average kappa moments over a uniform angle grid, swept in beta and M.

    For each (beta, M): B = beta * f_c and tau_d is rescaled to keep the
    product tau_d * B of the base configuration (the delay tracks the
    inverse bandwidth).  Moments are plain (signed) means over a uniform
    ``phi_grid_points``-point grid spanning ``phi_range_deg``; the CSV
    layer reports 10 log10 of the absolute averages with a separate sign
    for kappa1, which can be negative.
    """
    betas = np.atleast_1d(np.asarray(beta_points, dtype=float))
    if np.any(betas <= 0) or np.any(betas >= 2):
        raise ValueError("beta points must lie in (0, 2)")
    phis = np.deg2rad(np.linspace(phi_range_deg[0], phi_range_deg[1], phi_grid_points))
    delay_bandwidth = cfg_base.ttd_delay * cfg_base.bandwidth

    rows = []
    for m in np.atleast_1d(m_points):
        for beta in betas:
            bandwidth = float(beta * cfg_base.carrier_freq)
            cfg = replace(
                cfg_base,
                num_elements=int(m),
                bandwidth=bandwidth,
                ttd_delay=delay_bandwidth / bandwidth,
            )
            moments = [kappa_moments(p, cfg, quad_bins=quad_bins, refine=False) for p in phis]
            rows.append(
                KappaBandwidthRow(
                    beta=float(beta),
                    num_elements=int(m),
                    kappa0_bar=float(np.mean([mo.kappa0 for mo in moments])),
                    kappa1_bar=float(np.mean([mo.kappa1 for mo in moments])),
                    kappa2_bar=float(np.mean([mo.kappa2 for mo in moments])),
                )
            )
    return rows
