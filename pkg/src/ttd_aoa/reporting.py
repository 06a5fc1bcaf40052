"""CSV emission with fixed schemas and reproduction manifests.

Each output CSV starts with a deterministic ``#`` comment preamble
stating the conventions a reader needs (SNR definition, bin placement,
angle units) and then a mandatory header row.  Nothing in the CSV varies
between identical runs, so byte comparison is a valid regression check.
The accompanying ``<out>.manifest`` sidecar records the full resolved
configuration, seed and timestamp, enough to regenerate the CSV exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timezone

SCHEMA_VERSION = "1"

CONVENTION_NOTES = (
    "snr_definition = per-bin SNR |X_n|^2 / sigma_v^2, before array combining",
    "frequency_bins = midpoints f_n = -B/2 + (n + 1/2) * B/N",
    "angle_units = degrees in CSV columns, radians internally",
    "infinite_crb_token = inf",
)

SCHEMAS = {
    "kappa": ("f_hz", "phi_deg", "kappa_db"),
    "moments": ("phi_deg", "kappa0", "kappa1", "kappa2"),
    "kappa_beta": ("beta", "M", "kappa0_db", "kappa1_db", "kappa1_sign", "kappa2_db"),
    "crb": ("snr_db", "M", "phi_deg", "crb_deg2"),
    "sweep": (
        "snr_db",
        "M",
        "estimator",
        "trials_used",
        "trials_excluded",
        "mse_deg2",
        "rmse_deg",
        "crb_deg2",
    ),
    "fi_check": ("phi_deg", "snr_db", "trials", "empirical_I", "analytic_I", "ratio"),
    "estimate": (
        "estimator",
        "snr_db",
        "M",
        "true_phi_deg",
        "phi_hat_deg",
        "abs_error_deg",
        "residual",
        "peak_freq_hz",
        "smoothed_power",
    ),
}


@dataclass
class RunManifest:
    """Sidecar metadata sufficient to regenerate a CSV byte for byte."""

    tool_version: str
    schema: str
    command: str
    base_seed: int
    config_echo: dict
    created_utc: str = ""

    def __post_init__(self):
        if not self.created_utc:
            self.created_utc = datetime.now(timezone.utc).isoformat(timespec="seconds")


def format_cell(value) -> str:
    """Stable text for one CSV cell; floats use shortest round-trip repr."""
    import numpy as np

    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str, schema: str, rows, extra_notes: tuple = ()) -> None:
    """Write rows under a named schema with the convention preamble."""
    columns = SCHEMAS[schema]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema = {schema} v{SCHEMA_VERSION}\n")
        for note in CONVENTION_NOTES + tuple(extra_notes):
            fh.write(f"# {note}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row arity {len(row)} does not match schema {schema!r}")
            writer.writerow([format_cell(v) for v in row])


def manifest_path(csv_path: str) -> str:
    return csv_path + ".manifest"


def write_manifest(csv_path: str, manifest: RunManifest) -> None:
    with open(manifest_path(csv_path), "w", encoding="utf-8") as fh:
        fh.write(f"tool = ttd-aoa {manifest.tool_version}\n")
        fh.write(f"schema = {manifest.schema} v{SCHEMA_VERSION}\n")
        fh.write(f"created_utc = {manifest.created_utc}\n")
        fh.write(f"command = {manifest.command}\n")
        fh.write(f"base_seed = {manifest.base_seed}\n")
        for note in CONVENTION_NOTES:
            fh.write(f"convention: {note}\n")
        for key, value in manifest.config_echo.items():
            fh.write(f"config: {key} = {value}\n")


def read_manifest_config(path: str) -> dict:
    """Recover the ``section.key -> value`` echo from a manifest file."""
    echo = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("config: "):
                key, _, value = line[len("config: ") :].partition(" = ")
                echo[key.strip()] = value.rstrip("\n")
    return echo
