"""Angle-of-arrival estimation for true-time-delay uniform linear arrays.

The package splits into:

* :mod:`ttd_aoa.model`:      frequency-domain TTD/ULA signal model
* :mod:`ttd_aoa.fisher`:     kappa geometry factor, Fisher information,
  Cramer-Rao bounds
* :mod:`ttd_aoa.estimators`: ML grid search and smoothed-peak estimators
* :mod:`ttd_aoa.montecarlo`: reproducible MSE sweeps and the score-variance
  validation of the information chain
* :mod:`ttd_aoa.cli`:        ``ttd-aoa`` command-line front end with CSV output
"""

__version__ = "0.1.0"

from .estimators import (
    AngleGrid,
    EstimateResult,
    PeakConfig,
    RangeError,
    angle_from_peak_freq,
    invert_angle_to_peak_freq,
    ml_estimate,
    peak_estimate,
    smooth_circular,
)
from .fisher import (
    ConvergenceError,
    FisherResult,
    KappaMoments,
    crb_simplified,
    fisher_information_exact,
    fisher_information_moments,
    kappa,
    kappa_bandwidth_sweep,
    kappa_grid,
    kappa_moments,
    kappa_peak,
)
from .model import (
    ArrayConfig,
    FrequencyGrid,
    Observation,
    SignalSpec,
    array_response,
    generate_observation,
    noise_free_signal,
    psi,
)
from .montecarlo import (
    FisherCheckResult,
    SweepConfig,
    SweepReport,
    TrialRecord,
    empirical_fisher_check,
    run_sweep,
    run_trial,
    trial_seed,
)

__all__ = [
    "__version__",
    "AngleGrid",
    "ArrayConfig",
    "ConvergenceError",
    "EstimateResult",
    "FisherCheckResult",
    "FisherResult",
    "FrequencyGrid",
    "KappaMoments",
    "Observation",
    "PeakConfig",
    "RangeError",
    "SignalSpec",
    "SweepConfig",
    "SweepReport",
    "TrialRecord",
    "angle_from_peak_freq",
    "array_response",
    "crb_simplified",
    "empirical_fisher_check",
    "fisher_information_exact",
    "fisher_information_moments",
    "generate_observation",
    "invert_angle_to_peak_freq",
    "kappa",
    "kappa_bandwidth_sweep",
    "kappa_grid",
    "kappa_moments",
    "kappa_peak",
    "ml_estimate",
    "noise_free_signal",
    "peak_estimate",
    "psi",
    "run_sweep",
    "run_trial",
    "smooth_circular",
    "trial_seed",
]
