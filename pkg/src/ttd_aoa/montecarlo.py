"""Reproducible Monte Carlo benchmarking of the estimators against the bound.

Every trial draws its noise from an RNG seeded by a pure function of
(base_seed, snr_index, angle_index, M, trial_index), see
:func:`trial_seed`, so any single trial can be regenerated in isolation
and the sweep result does not depend on execution order or worker count.
Both estimators score the *same* observation at matching indices, which
makes their comparison paired.

Angle handling comes in two modes:

* ``fixed_angle``: every trial uses the single configured true angle;
* ``averaged``: each trial draws its true angle uniformly from the
  configured range (continuously, so truths land anywhere inside the
  ML grid cells), and the bound column reports the CRB averaged over the
  configured angle set.

Peak-method trials whose best bin maps outside arcsin's domain are
excluded from the MSE and counted per cell (``strict_range`` turns them
into hard errors instead).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import (
    AngleGrid,
    PeakConfig,
    ml_objective,
    ml_response_table,
    smooth_circular,
)
from .fisher import crb_simplified, fisher_information_exact, kappa_moments
from .model import (
    ArrayConfig,
    FrequencyGrid,
    SignalSpec,
    complex_noise,
    noise_free_signal,
    noise_variance_for_snr,
    observation_gradient,
)

ESTIMATOR_ORDER = ("ml", "peak")
ANGLE_MODES = ("fixed_angle", "averaged")

AVERAGED_ANGLE_KEY = 0xFFFFFFFF
"""Angle-index slot used in seed derivation when angles are drawn per trial."""

_STREAM_OBSERVATION = 0
_STREAM_ANGLE = 1

_CHUNK = 512
"""Trials per processing chunk; fixed so results never depend on worker count."""


def trial_seed_sequence(
    base_seed: int, snr_index: int, angle_index: int, num_elements: int, trial_index: int, stream: int
) -> np.random.SeedSequence:
    """Counter-based per-trial seed stream.

    stream 0 feeds the observation noise, stream 1 the true-angle draw in
    averaged mode (where ``angle_index`` is :data:`AVERAGED_ANGLE_KEY`).
    """
    return np.random.SeedSequence(
        base_seed, spawn_key=(snr_index, angle_index, num_elements, trial_index, stream)
    )


def trial_seed(
    base_seed: int, snr_index: int, angle_index: int, num_elements: int, trial_index: int, stream: int = 0
) -> int:
    """64-bit observation seed derived from the trial coordinates."""
    ss = trial_seed_sequence(base_seed, snr_index, angle_index, num_elements, trial_index, stream)
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


@dataclass
class SweepConfig:
    """Everything one Monte Carlo sweep needs, by value."""

    array_template: ArrayConfig
    num_bins: int = 512
    signal_energy: float = 1.0
    snr_grid_db: tuple = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0)
    m_set: tuple = (8, 16, 32)
    estimator_set: tuple = ESTIMATOR_ORDER
    trials: int = 10_000
    base_seed: int = 1234
    angle_mode: str = "fixed_angle"
    angle_set_rad: tuple = (0.0,)
    angle_grid: AngleGrid = field(default_factory=AngleGrid.uniform_deg)
    peak_config: PeakConfig = field(default_factory=PeakConfig)
    noiseless: bool = False
    strict_range: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.snr_grid_db) == 0 or len(self.m_set) == 0 or len(self.angle_set_rad) == 0:
            raise ValueError("snr grid, m_set and angle_set must be non-empty")
        if not all(np.isfinite(self.snr_grid_db)):
            raise ValueError("snr values must be finite")
        if self.angle_mode not in ANGLE_MODES:
            raise ValueError(f"angle_mode must be one of {ANGLE_MODES}")
        if self.angle_mode == "fixed_angle" and len(self.angle_set_rad) != 1:
            raise ValueError("fixed_angle mode takes exactly one true angle")
        if self.angle_mode == "averaged" and len(self.angle_set_rad) < 2:
            raise ValueError("averaged mode needs at least two angles to define a range")
        bad = set(self.estimator_set) - set(ESTIMATOR_ORDER)
        if bad:
            raise ValueError(f"unknown estimators: {sorted(bad)}")
        if any(abs(a) >= np.pi / 2 for a in self.angle_set_rad):
            raise ValueError("true angles must satisfy |phi| < 90 deg")
        if "peak" in self.estimator_set and not self.array_template.ttd_delay > 0:
            raise ValueError("peak estimator requires ttd_delay > 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class TrialRecord:
    """One estimator run on one observation."""

    snr_db: float
    true_phi: float
    num_elements: int
    estimator: str
    phi_hat: float
    squared_error_deg2: float
    seed: int
    excluded: bool = False
    error_tag: str = ""


@dataclass
class SweepRow:
    """Aggregate for one (snr, M, estimator) cell."""

    snr_db: float
    num_elements: int
    estimator: str
    trials_used: int
    trials_excluded: int
    mse_deg2: float
    rmse_deg: float
    crb_deg2: float
    angle_averaging: str


@dataclass
class SweepReport:
    rows: list
    angle_mode: str
    base_seed: int
    trials: int


@dataclass
class FisherCheckResult:
    """Empirical score variance next to the analytic information."""

    empirical_info: float
    analytic_info: float
    trials: int
    score_mean: float
    score_mean_stderr: float

    @property
    def ratio(self) -> float:
        return self.empirical_info / self.analytic_info


class RangeErrorInSweep(RuntimeError):
    """strict_range abort: a peak trial hit the arcsin domain edge."""


def _angle_bounds(cfg: SweepConfig) -> tuple[float, float]:
    return float(min(cfg.angle_set_rad)), float(max(cfg.angle_set_rad))


def _chunk_trials(
    cfg: SweepConfig,
    acfg: ArrayConfig,
    fgrid: FrequencyGrid,
    sig: SignalSpec,
    table,
    snr_index: int,
    start: int,
    stop: int,
    estimators: tuple | None = None,
):
    """Simulate trials [start, stop); returns per-trial arrays.

    The whole chunk is vectorized, but noise draws still come one RNG per
    trial so records match :func:`run_trial` exactly.
    """
    count = stop - start
    n = fgrid.num_bins
    snr_db = cfg.snr_grid_db[snr_index]
    variance = 0.0 if cfg.noiseless else noise_variance_for_snr(sig, snr_db)
    averaged = cfg.angle_mode == "averaged"
    angle_index = AVERAGED_ANGLE_KEY if averaged else 0
    lo, hi = _angle_bounds(cfg)

    true_phi = np.empty(count)
    seeds = np.empty(count, dtype=np.uint64)
    samples = np.empty((count, n), dtype=complex)
    for i, t in enumerate(range(start, stop)):
        if averaged:
            angle_rng = np.random.default_rng(
                trial_seed_sequence(cfg.base_seed, snr_index, angle_index, acfg.num_elements, t, _STREAM_ANGLE)
            )
            true_phi[i] = angle_rng.uniform(lo, hi)
        else:
            true_phi[i] = cfg.angle_set_rad[0]
        seeds[i] = trial_seed(cfg.base_seed, snr_index, angle_index, acfg.num_elements, t, _STREAM_OBSERVATION)

    distinct = np.unique(true_phi)
    if distinct.size == 1:
        samples[:] = noise_free_signal(float(distinct[0]), fgrid, sig, acfg)
    else:
        for i in range(count):
            samples[i] = noise_free_signal(float(true_phi[i]), fgrid, sig, acfg)
    if variance > 0:
        for i in range(count):
            rng = np.random.default_rng(int(seeds[i]))
            samples[i] += complex_noise(rng, n, variance)

    if estimators is None:
        estimators = cfg.estimator_set
    out = {}
    if "ml" in estimators:
        objective = ml_objective(samples, *table)
        idx = np.argmin(objective, axis=1)
        out["ml"] = (cfg.angle_grid.angles[idx], np.zeros(count, dtype=bool))
    if "peak" in estimators:
        smoothed = smooth_circular(samples, cfg.peak_config.window_size)
        idx = np.argmax(smoothed, axis=1)
        f_hat = fgrid.bin_freqs[idx]
        arg = -(f_hat * acfg.ttd_delay) / (f_hat + acfg.carrier_freq) / acfg.spacing_delay
        bad = np.abs(arg) > 1.0
        if np.any(bad) and cfg.strict_range:
            t_bad = start + int(np.flatnonzero(bad)[0])
            raise RangeErrorInSweep(
                f"trial {t_bad} (snr={snr_db} dB, M={acfg.num_elements}): peak bin maps outside arcsin domain"
            )
        out["peak"] = (np.arcsin(np.clip(arg, -1.0, 1.0)), bad)
    return true_phi, seeds, out


def run_trial(
    cfg: SweepConfig,
    num_elements: int,
    estimator: str,
    snr_index: int,
    trial_index: int,
) -> TrialRecord:
    """Run a single trial exactly as the sweep would.

    Reproduces the sweep's record for the same coordinates, including the
    drawn angle in averaged mode.
    """
    if estimator not in cfg.estimator_set:
        raise ValueError(f"estimator {estimator!r} not in the configured set {cfg.estimator_set}")
    acfg = replace(cfg.array_template, num_elements=num_elements)
    fgrid = FrequencyGrid.midpoint(acfg.bandwidth, cfg.num_bins)
    sig = SignalSpec.flat(cfg.signal_energy, acfg.bandwidth)
    table = ml_response_table(cfg.angle_grid, fgrid, sig, acfg) if estimator == "ml" else None
    true_phi, seeds, results = _chunk_trials(
        cfg, acfg, fgrid, sig, table, snr_index, trial_index, trial_index + 1, estimators=(estimator,)
    )
    phi_hat, excluded = results[estimator]
    return _make_record(cfg, snr_index, num_elements, estimator, true_phi[0], seeds[0], phi_hat[0], excluded[0])


def _make_record(cfg, snr_index, m, estimator, true_phi, seed, phi_hat, excluded) -> TrialRecord:
    err_deg = np.rad2deg(phi_hat - true_phi)
    return TrialRecord(
        snr_db=float(cfg.snr_grid_db[snr_index]),
        true_phi=float(true_phi),
        num_elements=int(m),
        estimator=estimator,
        phi_hat=float(phi_hat),
        squared_error_deg2=float("nan") if excluded else float(err_deg * err_deg),
        seed=int(seed),
        excluded=bool(excluded),
        error_tag="arcsin_range" if excluded else "",
    )


def _cell_crb_deg2(cfg: SweepConfig, acfg: ArrayConfig, sig: SignalSpec, snr_db: float) -> float:
    if cfg.noiseless:
        return 0.0
    variance = noise_variance_for_snr(sig, snr_db)
    kappa0_cache = {}

    def crb_at(phi):
        key = round(float(phi), 15)
        if key not in kappa0_cache:
            kappa0_cache[key] = kappa_moments(phi, acfg).kappa0
        return crb_simplified(phi, sig, acfg, variance, cfg.num_bins, kappa0=kappa0_cache[key])

    rad2 = (
        crb_at(cfg.angle_set_rad[0])
        if cfg.angle_mode == "fixed_angle"
        else float(np.mean([crb_at(p) for p in cfg.angle_set_rad]))
    )
    return rad2 * np.rad2deg(1.0) ** 2


def run_sweep(cfg: SweepConfig) -> SweepReport:
    """Full (SNR x M x estimator) Monte Carlo sweep.

    Deterministic for a given config: per-trial RNG streams depend only on
    indices, chunking is fixed, and rows come out in canonical
    (M, SNR, estimator) order whatever ``workers`` is set to.
    """
    rows = []
    est_order = [e for e in ESTIMATOR_ORDER if e in cfg.estimator_set]
    chunks = [(t, min(t + _CHUNK, cfg.trials)) for t in range(0, cfg.trials, _CHUNK)]

    for m in cfg.m_set:
        acfg = replace(cfg.array_template, num_elements=int(m))
        fgrid = FrequencyGrid.midpoint(acfg.bandwidth, cfg.num_bins)
        sig = SignalSpec.flat(cfg.signal_energy, acfg.bandwidth)
        table = ml_response_table(cfg.angle_grid, fgrid, sig, acfg) if "ml" in cfg.estimator_set else None
        for snr_index, snr_db in enumerate(cfg.snr_grid_db):

            def job(span):
                return _chunk_trials(cfg, acfg, fgrid, sig, table, snr_index, span[0], span[1])

            if cfg.workers > 1:
                with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                    parts = list(pool.map(job, chunks))
            else:
                parts = [job(span) for span in chunks]

            true_phi = np.concatenate([p[0] for p in parts])
            for est in est_order:
                phi_hat = np.concatenate([p[2][est][0] for p in parts])
                excluded = np.concatenate([p[2][est][1] for p in parts])
                used = ~excluded
                err_deg = np.rad2deg(phi_hat[used] - true_phi[used])
                mse = float(np.mean(err_deg**2)) if used.any() else float("nan")
                rows.append(
                    SweepRow(
                        snr_db=float(snr_db),
                        num_elements=int(m),
                        estimator=est,
                        trials_used=int(used.sum()),
                        trials_excluded=int(excluded.sum()),
                        mse_deg2=mse,
                        rmse_deg=float(np.sqrt(mse)),
                        crb_deg2=_cell_crb_deg2(cfg, acfg, sig, snr_db),
                        angle_averaging=cfg.angle_mode,
                    )
                )
    return SweepReport(rows=rows, angle_mode=cfg.angle_mode, base_seed=cfg.base_seed, trials=cfg.trials)


def empirical_fisher_check(
    phi: float,
    snr_db: float,
    trials: int,
    grid: FrequencyGrid,
    sig: SignalSpec,
    cfg: ArrayConfig,
    seed: int = 0,
    batch: int = 4096,
) -> FisherCheckResult:
    """Validate the information chain end to end via the score identity.

    The likelihood score at the true angle,
    dL/dphi = (2/sigma_v^2) sum_n Re{ conj(dY_n/dphi) (Z_n - Y_n) },
    has zero mean and variance equal to the Fisher information.  This
    draws ``trials`` independent noise realizations from one seeded
    stream (fixed batch size, so results are reproducible), computes the
    score per draw and returns its sample variance next to
    :func:`fisher_information_exact`.
    """
    variance = noise_variance_for_snr(sig, snr_db)
    grad = observation_gradient(phi, grid, sig, cfg)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x5C03E,)))
    scores = np.empty(trials)
    done = 0
    scale = np.sqrt(0.5 * variance)
    while done < trials:
        take = min(batch, trials - done)
        v = scale * (rng.standard_normal((take, grid.num_bins)) + 1j * rng.standard_normal((take, grid.num_bins)))
        scores[done : done + take] = (2.0 / variance) * (v @ grad.conj()).real
        done += take
    analytic = fisher_information_exact(phi, grid, sig, cfg, variance).fisher_info
    return FisherCheckResult(
        empirical_info=float(np.var(scores, ddof=1)),
        analytic_info=analytic,
        trials=trials,
        score_mean=float(np.mean(scores)),
        score_mean_stderr=float(np.std(scores, ddof=1) / np.sqrt(trials)),
    )
