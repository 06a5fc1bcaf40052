"""Fisher-information / bound tests.

Covers:
  - kappa: exact peak values, closed form vs brute-force sum, small-psi
    Taylor oracle, periodicity, bitwise evenness
  - kappa_grid dB surface and clamping
  - kappa moments: constant-integrand case, the full-period identity
    kappa0 = sum m^2 when tau_d B = 1 at broadside, bound invariants,
    quadrature convergence contract and its failure path
  - the three Fisher routes agreeing with each other, scaling laws,
    the infinite-bound sentinel at cos(phi) = 0
  - simplified vs full bound in the narrowband regime
  - bandwidth sweep structure and narrowband dominance
  - the measured kappa-moment phi-asymmetry matching its analytic
    window-span prediction (model property; see also acceptance 7)
"""

import numpy as np
import pytest

from ttd_aoa.fisher import (
    ConvergenceError,
    crb_simplified,
    fisher_information_exact,
    fisher_information_moments,
    index_weighted_sum,
    kappa,
    kappa_bandwidth_sweep,
    kappa_from_psi,
    kappa_grid,
    kappa_moments,
    kappa_peak,
)
from ttd_aoa.model import ArrayConfig, FrequencyGrid, SignalSpec, psi

PAPER = dict(num_elements=8, element_spacing=0.04, carrier_freq=3.75e9, bandwidth=20e6, ttd_delay=5e-8)


def paper_cfg(**kw):
    return ArrayConfig(**{**PAPER, **kw})


# ------------------------------------------------------------ kappa


def test_kappa_peak_values():
    assert kappa_from_psi(np.array(0.0), 8) == 784.0
    assert kappa_from_psi(np.array(2 * np.pi * 3), 8) == 784.0
    assert kappa_peak(8) == 784.0
    assert kappa(0.0, 0.0, paper_cfg()) == 784.0


def test_kappa_m2_is_unity():
    rng = np.random.default_rng(0)
    ps = rng.uniform(-20, 20, 500)
    assert np.allclose(kappa_from_psi(ps, 2), 1.0, rtol=1e-9)


def test_kappa_closed_vs_direct():
    rng = np.random.default_rng(1)
    for m in (8, 16, 32):
        cfg = paper_cfg(num_elements=m)
        f = rng.uniform(-10e6, 10e6, 3000)
        phi = rng.uniform(np.deg2rad(-60), np.deg2rad(60), 3000)
        k = kappa(f, phi, cfg)
        k_direct = np.abs(index_weighted_sum(np.asarray(psi(f, phi, cfg)), m)) ** 2
        rel = np.abs(k - k_direct) / k_direct
        assert rel.max() <= 1e-9, f"M={m}: worst {rel.max():.2e}"


def test_kappa_taylor_oracle_near_zero():
    # kappa(psi)/kappa(0) = 1 - c2 psi^2 + O(psi^4) with
    # c2 = sum m^3 / sum m - (sum m^2 / sum m)^2; independent series check
    for m in (8, 32):
        mm = np.arange(m)
        c2 = (mm**3).sum() / mm.sum() - ((mm**2).sum() / mm.sum()) ** 2
        ps = np.logspace(-7, -3, 40)
        ratio = kappa_from_psi(ps, m) / kappa_peak(m)
        assert np.allclose(ratio, 1 - c2 * ps**2, atol=c2**2 * float(ps.max()) ** 4 * 5 + 1e-13)


def test_kappa_periodic_and_even():
    rng = np.random.default_rng(2)
    ps = rng.uniform(-10, 10, 400)
    for m in (2, 8, 64):
        k = kappa_from_psi(ps, m)
        k_shift = kappa_from_psi(ps + 2 * np.pi, m)
        assert np.allclose(k_shift, k, rtol=1e-9)
        # evenness is forced bitwise by |psi| at entry
        assert np.array_equal(kappa_from_psi(-ps, m), k)


def test_kappa_grid_examples():
    cfg = paper_cfg()
    peak_db = 10 * np.log10(784.0)
    single = kappa_grid([0.0], [0.0], cfg)
    assert single.shape == (1, 1)
    assert single[0, 0] == pytest.approx(peak_db, abs=1e-9)
    assert peak_db == pytest.approx(28.9432, abs=5e-4)

    f = np.linspace(-10e6, 10e6, 101)
    phi = np.deg2rad(np.linspace(-60, 60, 81))
    grid = kappa_grid(f, phi, cfg)
    assert grid.shape == (101, 81)
    assert grid.max() <= peak_db + 1e-6
    clamped = kappa_grid(f, phi, cfg, floor_db=20.0)
    assert clamped.min() == 20.0
    with pytest.raises(ValueError):
        kappa_grid([], [0.0], cfg)


# ---------------------------------------------------------- moments


def test_moments_constant_kappa_case():
    # M=2, tau_d=0, phi=0: kappa(f) = 1 for all f
    cfg = paper_cfg(num_elements=2, ttd_delay=0.0)
    mo = kappa_moments(0.0, cfg, quad_bins=4096)
    assert mo.kappa0 == pytest.approx(1.0, rel=1e-12)
    assert abs(mo.kappa1) <= 1e-12 * (cfg.bandwidth / 2)
    assert mo.kappa2 == pytest.approx(cfg.bandwidth**2 / 12, rel=1e-6)


def test_moments_full_period_identity():
    # tau_d * B = 1 at phi=0 sweeps psi over exactly one period, where the
    # mean of kappa is sum m^2 (uniform quadrature is exact for the
    # trigonometric polynomial kappa)
    for m in (2, 8, 32):
        cfg = paper_cfg(num_elements=m)
        mo = kappa_moments(0.0, cfg, quad_bins=4096, refine=False)
        expected = float((np.arange(m) ** 2).sum())
        assert mo.kappa0 == pytest.approx(expected, rel=1e-12)
        # odd pairs cancel to summation rounding on the symmetric grid
        assert abs(mo.kappa1) <= 1e-12 * (cfg.bandwidth / 2) * mo.kappa0


def test_moment_bound_invariants():
    rng = np.random.default_rng(3)
    for _ in range(60):
        m = int(rng.integers(2, 33))
        f_c = rng.uniform(1e9, 10e9)
        beta = rng.uniform(0.001, 0.5)
        cfg = ArrayConfig(m, rng.uniform(0.01, 0.1), f_c, beta * f_c, rng.uniform(0, 3) / (beta * f_c))
        phi = rng.uniform(-1.0, 1.0)
        mo = kappa_moments(phi, cfg, quad_bins=256, refine=False)
        half = cfg.bandwidth / 2
        assert mo.kappa0 >= 0 and mo.kappa2 >= 0
        assert abs(mo.kappa1) <= half * mo.kappa0 * (1 + 1e-12)
        assert mo.kappa2 <= half**2 * mo.kappa0 * (1 + 1e-12)


def test_moment_convergence_contract():
    cfg = paper_cfg()
    a = kappa_moments(0.3, cfg, quad_bins=4096, refine=False)
    b = kappa_moments(0.3, cfg, quad_bins=8192, refine=False)
    for x, y, scale in (
        (a.kappa0, b.kappa0, b.kappa0),
        (a.kappa1, b.kappa1, b.kappa0 * cfg.bandwidth / 2),
        (a.kappa2, b.kappa2, b.kappa0 * (cfg.bandwidth / 2) ** 2),
    ):
        assert abs(x - y) < 1e-6 * max(abs(y), 1e-9 * scale)
    refined = kappa_moments(0.3, cfg, quad_bins=4096)
    assert refined.quadrature_bins >= 8192


def test_moment_nonconvergence_raises():
    cfg = paper_cfg(num_elements=64)
    with pytest.raises(ConvergenceError):
        kappa_moments(0.5, cfg, quad_bins=64, rel_tol=1e-15, max_doublings=1)
    with pytest.raises(ValueError):
        kappa_moments(0.0, cfg, quad_bins=32)


def test_moment_asymmetry_matches_window_prediction():
    """The +-phi moment windows span psi ranges differing by
    4 pi B (d/c) sin(phi); the induced kappa0 asymmetry is
    2 delta (kappa(A + pi) - kappa0) to first order.  Checking the
    measured asymmetry against this prediction pins the implementation
    independent of any wished-for symmetry."""
    cfg = paper_cfg()
    phi = np.deg2rad(60.0)
    delta = cfg.bandwidth * cfg.spacing_delay * np.sin(phi)
    a_center = 2 * np.pi * cfg.carrier_freq * cfg.spacing_delay * np.sin(phi)
    kappa_edge = float(kappa_from_psi(np.array(a_center + np.pi), cfg.num_elements))
    kappa0_bar = float((np.arange(cfg.num_elements) ** 2).sum())
    predicted = 2 * delta * (kappa_edge - kappa0_bar)

    plus = kappa_moments(phi, cfg, quad_bins=16384, refine=False)
    minus = kappa_moments(-phi, cfg, quad_bins=16384, refine=False)
    measured = plus.kappa0 - minus.kappa0
    assert measured == pytest.approx(predicted, rel=0.05)


# ------------------------------------------------------ Fisher info


def _sig_grid(cfg, n=512, energy=1.0):
    return SignalSpec.flat(energy, cfg.bandwidth), FrequencyGrid.midpoint(cfg.bandwidth, n)


def test_fisher_endfire_sentinel():
    cfg = paper_cfg()
    sig, grid = _sig_grid(cfg)
    res = fisher_information_exact(np.pi / 2, grid, sig, cfg, 1e-8)
    assert res.fisher_info == pytest.approx(0.0, abs=1e-18)
    assert res.crb == np.inf and not np.isnan(res.crb)
    assert crb_simplified(np.pi / 2, sig, cfg, 1e-8, 512) == np.inf


def test_fisher_noise_scaling():
    cfg = paper_cfg()
    sig, grid = _sig_grid(cfg)
    a = fisher_information_exact(0.2, grid, sig, cfg, 1e-8)
    b = fisher_information_exact(0.2, grid, sig, cfg, 2e-8)
    assert b.fisher_info == pytest.approx(a.fisher_info / 2, rel=1e-12)
    assert b.crb == pytest.approx(2 * a.crb, rel=1e-12)


def test_fisher_exact_vs_moments_matched_bins():
    rng = np.random.default_rng(4)
    for _ in range(100):
        m = int(rng.integers(2, 33))
        f_c = rng.uniform(1e9, 10e9)
        beta = rng.uniform(0.001, 0.3)
        n = int(rng.integers(64, 1024))
        cfg = ArrayConfig(m, rng.uniform(0.01, 0.1), f_c, beta * f_c, rng.uniform(0, 2) / (beta * f_c))
        sig = SignalSpec.flat(rng.uniform(0.1, 10.0), cfg.bandwidth)
        grid = FrequencyGrid.midpoint(cfg.bandwidth, n)
        phi = rng.uniform(-1.0, 1.0)
        var = sig.per_bin_power / 10 ** (rng.uniform(-20, 10) / 10)
        exact = fisher_information_exact(phi, grid, sig, cfg, var)
        moment = fisher_information_moments(phi, sig, cfg, var, num_bins=n, quad_bins=n, refine=False)
        assert moment.fisher_info == pytest.approx(exact.fisher_info, rel=1e-4)
        assert moment.method == "moment_form" and exact.method == "exact_sum"


def test_fisher_m2_closed_form():
    # M=2, tau_d=0, phi=0: kappa = 1, so
    # I = (2 E_s N / (B sigma^2)) (2 pi d/c)^2 (f_c^2 + <f^2>)
    cfg = paper_cfg(num_elements=2, ttd_delay=0.0)
    n = 512
    sig, grid = _sig_grid(cfg, n)
    var = 2.5e-9
    mean_f2 = cfg.bandwidth**2 / 12 * (1 - 1 / n**2)  # midpoint-grid second moment
    expected = (
        (2 * sig.total_energy * n / (cfg.bandwidth * var))
        * (2 * np.pi * cfg.spacing_delay) ** 2
        * (cfg.carrier_freq**2 + mean_f2)
    )
    got = fisher_information_exact(0.0, grid, sig, cfg, var).fisher_info
    assert got == pytest.approx(expected, rel=1e-12)
    # continuum form with B^2/12 agrees to the N^-2 discretization error
    approx = (
        (2 * sig.total_energy * n / (cfg.bandwidth * var))
        * (2 * np.pi * cfg.spacing_delay) ** 2
        * (cfg.carrier_freq**2 + cfg.bandwidth**2 / 12)
    )
    assert got == pytest.approx(approx, rel=1e-4)


def test_simplified_vs_full_bound_narrowband():
    cfg = paper_cfg()
    sig, grid = _sig_grid(cfg)
    var = 1e-8
    for phi_deg in (0.0, -30.0, 30.0, 60.0):
        phi = np.deg2rad(phi_deg)
        full = fisher_information_moments(phi, sig, cfg, var, num_bins=512).crb
        simple = crb_simplified(phi, sig, cfg, var, 512)
        assert simple / full == pytest.approx(1.0, abs=0.01)


def test_crb_ordering_and_scaling():
    sig = SignalSpec.flat(1.0, 20e6)
    var = sig.per_bin_power  # 0 dB
    crbs = {
        m: crb_simplified(0.0, sig, paper_cfg(num_elements=m), var, 512) for m in (8, 16, 32)
    }
    assert crbs[32] < crbs[16] < crbs[8]
    cfg = paper_cfg()
    assert crb_simplified(0.0, sig, cfg, var, 1024) == pytest.approx(
        crb_simplified(0.0, sig, cfg, var, 512) / 2, rel=1e-12
    )


def test_fisher_result_validation():
    from ttd_aoa.fisher import FisherResult

    with pytest.raises(ValueError):
        FisherResult(fisher_info=-1.0, crb=1.0, method="exact_sum")
    with pytest.raises(ValueError):
        FisherResult(fisher_info=1.0, crb=1.0, method="bogus")


# ------------------------------------------------- bandwidth sweep


def test_bandwidth_sweep_structure_and_dominance():
    cfg = paper_cfg()
    betas = [0.005, 0.05, 0.5]
    rows = kappa_bandwidth_sweep(betas, [8, 16], cfg, phi_grid_points=41, quad_bins=1024)
    assert len(rows) == 6
    at = {(r.beta, r.num_elements): r for r in rows}
    r = at[(0.005, 8)]
    # narrowband: both correction terms sit >= 30 dB under f_c^2 kappa0
    f_c = cfg.carrier_freq
    assert 2 * f_c * abs(r.kappa1_bar) < 1e-3 * f_c**2 * r.kappa0_bar
    assert r.kappa2_bar < 1e-3 * f_c**2 * r.kappa0_bar
    # relative contributions grow with beta
    for m in (8, 16):
        ratios1 = [2 * f_c * abs(at[(b, m)].kappa1_bar) / (f_c**2 * at[(b, m)].kappa0_bar) for b in betas]
        ratios2 = [at[(b, m)].kappa2_bar / (f_c**2 * at[(b, m)].kappa0_bar) for b in betas]
        assert ratios1 == sorted(ratios1)
        assert ratios2 == sorted(ratios2)


def test_bandwidth_sweep_rescales_delay():
    # the tau_d * B product of the base configuration is preserved
    cfg = paper_cfg()  # tau_d * B = 1
    rows = kappa_bandwidth_sweep([0.1], [2], cfg, phi_grid_points=3, quad_bins=256)
    # with M=2 kappa == 1 identically, so kappa0 stays 1 regardless of delay
    assert rows[0].kappa0_bar == pytest.approx(1.0, rel=1e-9)
    with pytest.raises(ValueError):
        kappa_bandwidth_sweep([2.5], [8], cfg)
