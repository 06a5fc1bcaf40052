"""Command-line front end.

Subcommands map one-to-one onto the toolkit's capabilities:

* ``kappa``:    kappa surfaces, kappa-moment curves, bandwidth sweeps
* ``crb``:      simplified Cramer-Rao bound over an SNR grid
* ``sweep``:    Monte Carlo MSE benchmark of the estimators vs the bound
* ``estimate``: single-shot estimation on one synthetic observation
* ``check-fi``: empirical score-variance validation of the Fisher chain

Every run writes one CSV plus a ``.manifest`` sidecar that pins the
resolved configuration and seed.  Exit codes: 0 success, 2 validation
error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .config import ConfigError, ResolvedConfig, parse_frequency, resolve_config
from .estimators import RangeError, ml_estimate, peak_estimate
from .fisher import (
    ConvergenceError,
    crb_simplified,
    kappa_bandwidth_sweep,
    kappa_grid,
    kappa_moments,
)
from .model import generate_observation, noise_variance_for_snr
from .montecarlo import RangeErrorInSweep, empirical_fisher_check, run_sweep
from .reporting import RunManifest, write_csv, write_manifest

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; flags override file values")
    p.add_argument("--out", help="output CSV path (default: <command>.csv)")
    p.add_argument("--seed", type=int, help="base RNG seed")
    p.add_argument("--M", help="element count, or comma list for sweep commands (e.g. 8,16,32)")
    p.add_argument("--tau-d", dest="tau_d", help="TTD increment: seconds, '50ns', or '1/B'")
    p.add_argument("--noiseless", action="store_true", default=None, help="disable noise (Z = Y exactly)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttd-aoa",
        description="Angle-of-arrival estimation toolkit for true-time-delay uniform linear arrays",
    )
    parser.add_argument("--version", action="version", version=f"ttd-aoa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kappa", help="kappa surface / moments / bandwidth sweep")
    _add_common(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--single", action="store_true", help="single (f, phi) point")
    mode.add_argument("--moments", action="store_true", help="kappa moments over an angle grid")
    mode.add_argument("--beta-sweep", action="store_true", help="angle-averaged moments vs relative bandwidth")
    p.add_argument("--f", default="0", help="frequency for --single (suffix ok)")
    p.add_argument("--phi", type=float, help="angle in degrees (for --single)")
    p.add_argument("--f-points", type=int, default=201, help="frequency grid size (surface mode)")
    p.add_argument("--phi-points", type=int, default=241, help="angle grid size")
    p.add_argument("--phi-min", type=float, default=-60.0)
    p.add_argument("--phi-max", type=float, default=60.0)
    p.add_argument("--beta-min", type=float, default=0.005)
    p.add_argument("--beta-max", type=float, default=0.5)
    p.add_argument("--beta-points", type=int, default=9)
    p.add_argument("--quad-bins", type=int, default=4096)

    p = sub.add_parser("crb", help="simplified CRB over the SNR grid")
    _add_common(p)
    p.add_argument("--snr-min", type=float)
    p.add_argument("--snr-max", type=float)
    p.add_argument("--snr-step", type=float)
    p.add_argument("--phi", type=float, help="angle in degrees (|phi| <= 90)")

    p = sub.add_parser("sweep", help="Monte Carlo MSE sweep of the estimators")
    _add_common(p)
    p.add_argument("--snr-min", type=float)
    p.add_argument("--snr-max", type=float)
    p.add_argument("--snr-step", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--phi", type=float, help="true angle in degrees (fixed mode)")
    p.add_argument("--angle-mode", choices=["fixed", "averaged"])
    p.add_argument("--grid-res-deg", type=float)
    p.add_argument("--window-b", type=int)
    p.add_argument("--estimators", help="comma subset of ml,peak")
    p.add_argument("--workers", type=int)
    p.add_argument("--strict-range", action="store_true", default=None)

    p = sub.add_parser("estimate", help="single-shot estimate on one observation")
    _add_common(p)
    p.add_argument("--estimator", choices=["ml", "peak", "both"], default="both")
    p.add_argument("--snr", type=float, default=0.0, help="per-bin SNR in dB")
    p.add_argument("--phi", type=float, help="true angle in degrees")
    p.add_argument("--grid-res-deg", type=float)
    p.add_argument("--window-b", type=int)
    p.add_argument("--strict-range", action="store_true", default=None)

    p = sub.add_parser("check-fi", help="empirical score variance vs analytic Fisher information")
    _add_common(p)
    p.add_argument("--snr", type=float, default=0.0)
    p.add_argument("--phi", type=float)
    p.add_argument("--trials", type=int, default=100_000)

    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    ov = {}
    get = lambda name: getattr(args, name, None)
    if get("M") is not None:
        if "," in str(args.M):
            ov[("sweep", "m_set")] = args.M
        else:
            ov[("array", "m")] = args.M
            ov[("sweep", "m_set")] = args.M
    if get("tau_d") is not None:
        ov[("array", "tau_d")] = args.tau_d
    if get("seed") is not None:
        ov[("sweep", "base_seed")] = args.seed
    if get("noiseless") is not None:
        ov[("sweep", "noiseless")] = "true"
    if get("trials") is not None:
        ov[("sweep", "trials")] = args.trials
    if get("phi") is not None and args.command in ("sweep", "estimate", "check-fi", "crb"):
        ov[("sweep", "phi_deg")] = args.phi
    if get("angle_mode") is not None:
        ov[("sweep", "angle_mode")] = args.angle_mode
    if get("grid_res_deg") is not None:
        ov[("estimator", "grid_res_deg")] = args.grid_res_deg
    if get("window_b") is not None:
        ov[("estimator", "window_b")] = args.window_b
    if get("estimators") is not None:
        ov[("sweep", "estimators")] = args.estimators
    if get("workers") is not None:
        ov[("sweep", "workers")] = args.workers
    if get("strict_range") is not None:
        ov[("sweep", "strict_range")] = "true"
        ov[("estimator", "clamp")] = "false"
    for name in ("snr_min", "snr_max", "snr_step"):
        if get(name) is not None:
            ov[("sweep", name)] = getattr(args, name)
    return ov


def _manifest(resolved: ResolvedConfig, schema: str) -> RunManifest:
    return RunManifest(
        tool_version=__version__,
        schema=schema,
        command=" ".join(sys.argv),
        base_seed=resolved.base_seed,
        config_echo=resolved.echo,
    )


def _emit(out: str, schema: str, rows, resolved: ResolvedConfig, extra_notes: tuple = ()) -> None:
    write_csv(out, schema, rows, extra_notes)
    write_manifest(out, _manifest(resolved, schema))
    print(f"wrote {out} (+ manifest)")


def cmd_kappa(resolved: ResolvedConfig, args: argparse.Namespace) -> int:
    out = args.out or "kappa.csv"
    cfg = resolved.array
    if args.moments:
        phis = np.linspace(args.phi_min, args.phi_max, args.phi_points)
        rows = []
        for pd in phis:
            mo = kappa_moments(np.deg2rad(pd), cfg, quad_bins=args.quad_bins)
            rows.append((pd, mo.kappa0, mo.kappa1, mo.kappa2))
        _emit(out, "moments", rows, resolved)
        return EXIT_OK
    if args.beta_sweep:
        betas = np.geomspace(args.beta_min, args.beta_max, args.beta_points)
        table = kappa_bandwidth_sweep(
            betas, resolved.m_set, cfg, phi_grid_points=resolved.angle_points, quad_bins=args.quad_bins
        )
        db = lambda x: -np.inf if x == 0 else 10.0 * np.log10(abs(x))
        rows = [
            (r.beta, r.num_elements, db(r.kappa0_bar), db(r.kappa1_bar), int(np.sign(r.kappa1_bar)), db(r.kappa2_bar))
            for r in table
        ]
        _emit(out, "kappa_beta", rows, resolved, ("kappa columns = 10*log10(|angle-averaged moment|)",))
        return EXIT_OK
    if args.single:
        f = parse_frequency(args.f)
        phi_deg = args.phi if args.phi is not None else 0.0
        db = kappa_grid([f], [np.deg2rad(phi_deg)], cfg)[0, 0]
        _emit(out, "kappa", [(f, phi_deg, db)], resolved)
        print(f"kappa({f:g} Hz, {phi_deg:g} deg) = {db:.4f} dB")
        return EXIT_OK
    f_pts = np.linspace(-cfg.bandwidth / 2, cfg.bandwidth / 2, args.f_points)
    phi_pts_deg = np.linspace(args.phi_min, args.phi_max, args.phi_points)
    grid_db = kappa_grid(f_pts, np.deg2rad(phi_pts_deg), cfg)
    rows = [
        (f_pts[i], phi_pts_deg[j], grid_db[i, j])
        for i in range(args.f_points)
        for j in range(args.phi_points)
    ]
    _emit(out, "kappa", rows, resolved)
    return EXIT_OK


def cmd_crb(resolved: ResolvedConfig, args: argparse.Namespace) -> int:
    out = args.out or "crb.csv"
    phi_deg = resolved.phi_deg
    if not abs(phi_deg) <= 90.0:
        raise ConfigError("crb: |phi| must be <= 90 deg")
    rows = []
    rad2deg2 = np.rad2deg(1.0) ** 2
    for m in resolved.m_set:
        acfg = replace(resolved.array, num_elements=int(m))
        sig = resolved.signal()
        kappa0 = kappa_moments(np.deg2rad(phi_deg), acfg).kappa0
        for snr in resolved.snr_grid_db:
            variance = noise_variance_for_snr(sig, snr)
            crb = crb_simplified(
                np.deg2rad(phi_deg), sig, acfg, variance, resolved.num_bins, kappa0=kappa0
            )
            rows.append((snr, int(m), phi_deg, crb * rad2deg2))
    _emit(out, "crb", rows, resolved)
    return EXIT_OK


def cmd_sweep(resolved: ResolvedConfig, args: argparse.Namespace) -> int:
    out = args.out or "sweep.csv"
    report = run_sweep(resolved.sweep_config())
    rows = [
        (
            r.snr_db,
            r.num_elements,
            r.estimator,
            r.trials_used,
            r.trials_excluded,
            r.mse_deg2,
            r.rmse_deg,
            r.crb_deg2,
        )
        for r in report.rows
    ]
    _emit(out, "sweep", rows, resolved, (f"angle_averaging = {report.angle_mode}",))
    return EXIT_OK


def cmd_estimate(resolved: ResolvedConfig, args: argparse.Namespace) -> int:
    out = args.out or "estimate.csv"
    if abs(resolved.phi_deg) >= 90.0:
        raise ConfigError("estimate: |phi| must be < 90 deg")
    cfg = resolved.array
    fgrid = resolved.frequency_grid()
    sig = resolved.signal()
    phi = float(np.deg2rad(resolved.phi_deg))
    obs = generate_observation(
        phi, args.snr, resolved.base_seed, fgrid, sig, cfg, noiseless=resolved.noiseless
    )
    wanted = ("ml", "peak") if args.estimator == "both" else (args.estimator,)
    if "peak" in wanted and not cfg.ttd_delay > 0:
        raise ConfigError("peak estimator requested but tau_d = 0 makes the frequency-angle map degenerate")
    rows = []
    for est in wanted:
        if est == "ml":
            res = ml_estimate(obs, resolved.angle_grid, fgrid, sig, cfg)
            extra = (res.diagnostic["residual"], "", "")
        else:
            res = peak_estimate(obs, resolved.peak, fgrid, cfg)
            extra = ("", res.diagnostic["peak_freq_hz"], res.diagnostic["smoothed_power"])
        phi_hat_deg = float(np.rad2deg(res.phi_hat))
        rows.append(
            (est, args.snr, cfg.num_elements, resolved.phi_deg, phi_hat_deg, abs(phi_hat_deg - resolved.phi_deg))
            + extra
        )
        print(f"{est}: phi_hat = {phi_hat_deg:+.4f} deg (truth {resolved.phi_deg:+.4f})")
    _emit(out, "estimate", rows, resolved)
    return EXIT_OK


def cmd_check_fi(resolved: ResolvedConfig, args: argparse.Namespace) -> int:
    out = args.out or "fi_check.csv"
    if abs(resolved.phi_deg) >= 90.0:
        raise ConfigError("check-fi: |phi| must be < 90 deg")
    res = empirical_fisher_check(
        float(np.deg2rad(resolved.phi_deg)),
        args.snr,
        args.trials,
        resolved.frequency_grid(),
        resolved.signal(),
        resolved.array,
        seed=resolved.base_seed,
    )
    _emit(
        out,
        "fi_check",
        [(resolved.phi_deg, args.snr, args.trials, res.empirical_info, res.analytic_info, res.ratio)],
        resolved,
    )
    print(f"empirical/analytic Fisher information ratio = {res.ratio:.4f}")
    return EXIT_OK


_COMMANDS = {
    "kappa": cmd_kappa,
    "crb": cmd_crb,
    "sweep": cmd_sweep,
    "estimate": cmd_estimate,
    "check-fi": cmd_check_fi,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        resolved = resolve_config(args.config, _overrides_from_args(args))
        if args.command == "sweep" and "peak" in resolved.estimator_set and not resolved.array.ttd_delay > 0:
            raise ConfigError("peak estimator requested but tau_d = 0 makes the frequency-angle map degenerate")
        return _COMMANDS[args.command](resolved, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RangeError, RangeErrorInSweep, ConvergenceError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
