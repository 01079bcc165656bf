"""Parameter sweeps: one run per value, a summary table and log-log exponents."""
from pathlib import Path
import logging

import numpy as np
import pandas as pd
from django.conf import settings
from joblib import Parallel, delayed

from . import diagnostics
from .exceptions import ConfigError, PhaseLabError
from .scenarios import at_hbar, run_config
from .snapshots import write_manifest

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = {"hbar": "hbar", "D": "D", "m": "mass"}
COLUMNS = [
    "value", "status", "t_D", "t0", "tD_over_t0", "max_flux_deviation",
    "final_negativity_volume", "initial_max_abs", "message",
]


def parse_values(text):
    values = [chunk.strip() for chunk in str(text or "").split(",") if chunk.strip()]
    if not values:
        raise ConfigError("the sweep needs at least one value")
    try:
        return [float(v) for v in values]
    except ValueError:
        raise ConfigError(f"sweep values must be numbers, got {text!r}") from None


def _point(config, parameter, value, output_dir):
    """One sweep point; failures become a row instead of stopping the sweep."""
    changes = {SWEEP_PARAMETERS[parameter]: value}
    if parameter == "D":
        changes["decoherence"] = True
    row = dict.fromkeys(COLUMNS, np.nan)
    row.update(value=value, status="ok", message="")
    try:
        if parameter == "hbar":
            config, changes = at_hbar(config, value), {}
        trajectory = run_config(config, output_dir=output_dir, label=f"{parameter}={value:g}", **changes)
    except PhaseLabError as exc:
        logger.error(f"sweep point {parameter}={value:g} failed: {exc}")
        row.update(status="error", message=f"{type(exc).__name__}: {exc}")
        return row

    t0 = trajectory.decoherence.timescale(trajectory.hamiltonian.mass)
    t_d = diagnostics.positivity_time(trajectory)
    fluxes = [abs(f) for record in trajectory.records for f in record.flux_deviation if np.isfinite(f)]
    row.update(
        t_D=np.nan if t_d is None else t_d,
        t0=np.nan if t0 is None else t0,
        tD_over_t0=np.nan if t_d is None or t0 is None else t_d / t0,
        max_flux_deviation=max(fluxes) if fluxes else np.nan,
        final_negativity_volume=trajectory.records[-1].negativity_volume,
        initial_max_abs=trajectory.snapshots[0].max_abs,
    )
    return row


def fit_exponent(x, y):
    """Slope of log y against log x over the points where both are positive and finite."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if keep.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


def run_sweep(config, parameter, values, output_dir, n_jobs=None):
    """Run every value (in parallel when PHASELAB_THREADS > 1) and write summary.csv and exponents.json."""
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"cannot sweep {parameter!r}; choose one of {sorted(SWEEP_PARAMETERS)}")
    if not values:
        raise ConfigError("the sweep needs at least one value")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_jobs = settings.PHASELAB_THREADS if n_jobs is None else n_jobs
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_point)(config, parameter, value, out / f"{parameter}={value:g}") for value in values
    )
    summary = pd.DataFrame(rows, columns=COLUMNS).sort_values("value", kind="stable")
    summary.to_csv(out / "summary.csv", index=False, float_format="%.17g")

    exponents = {
        "parameter": parameter,
        "max_flux_deviation": fit_exponent(summary["value"], summary["max_flux_deviation"]),
        "initial_max_abs": fit_exponent(summary["value"], summary["initial_max_abs"]),
        "t_D": fit_exponent(summary["value"], summary["t_D"]),
    }
    write_manifest(exponents, out / "exponents.json")
    failed = int((summary["status"] != "ok").sum())
    logger.info(f"sweep over {parameter} finished: {len(rows)} points, {failed} failed")
    return summary, exponents
