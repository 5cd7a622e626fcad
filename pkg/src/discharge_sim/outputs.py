"""Deterministic file outputs: per-step monitor timeseries, field
snapshots, sweep and convergence reports (CSV, 17-significant-digit
decimals, LF endings) and a meta.json audit record.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from . import __version__
from .geometry import Mesh
from .model import State

__all__ = [
    "format_value",
    "write_timeseries",
    "write_fields",
    "write_sweep_report",
    "write_convergence_report",
    "write_tail_report",
    "write_dependence_report",
    "write_meta",
]

TIMESERIES_COLUMNS = (
    "t", "min_p", "min_n", "L2_p", "L2_n", "H1_p", "H1_n",
    "charge_residual", "Y", "bihari_bound", "clamp_active", "source_finite",
)


def format_value(x) -> str:
    """Fixed decimal formatting: 17 significant digits for floats, 0/1 for
    booleans, empty for missing monitors.
    """
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _open_lf(path):
    return open(path, "w", encoding="utf-8", newline="\n")


def write_timeseries(path, records) -> None:
    """One row per step; records may be MonitorRecord objects or mappings
    covering a subset of the columns (missing monitors give empty cells).
    """
    with _open_lf(path) as f:
        f.write(",".join(TIMESERIES_COLUMNS) + "\n")
        for rec in records:
            get = rec.get if isinstance(rec, dict) else lambda c, r=rec: getattr(r, c, None)
            f.write(",".join(format_value(get(c)) for c in TIMESERIES_COLUMNS) + "\n")


def write_fields(outdir, step_index: int, mesh: Mesh, state: State) -> str:
    """Snapshot fields_{step:06}.csv: i,j,x,y,p,n,phi row-major in j then i."""
    path = os.path.join(outdir, f"fields_{step_index:06}.csv")
    with _open_lf(path) as f:
        f.write("i,j,x,y,p,n,phi\n")
        for j in range(mesh.ny + 1):
            for i in range(mesh.nx + 1):
                f.write(",".join((
                    str(i), str(j),
                    format_value(mesh.x[i, j]), format_value(mesh.y[i, j]),
                    format_value(state.p[i, j]), format_value(state.n[i, j]),
                    format_value(state.phi[i, j]),
                )) + "\n")
    return path


def write_sweep_report(path, report) -> None:
    """Pairwise consecutive-level differences of the truncation sweep."""
    with _open_lf(path) as f:
        f.write("M_low,M_high,diff_p,diff_n,ratio_p,ratio_n,failed\n")
        levels = report.levels
        for k, (a, b) in enumerate(zip(levels, levels[1:])):
            rp = report.ratios_p[k - 1] if k > 0 else None
            rn = report.ratios_n[k - 1] if k > 0 else None
            failed = (a in report.failures) or (b in report.failures)
            f.write(",".join((
                format_value(a), format_value(b),
                format_value(report.diffs_p[k]), format_value(report.diffs_n[k]),
                format_value(rp), format_value(rn),
                "1" if failed else "0",
            )) + "\n")


def write_convergence_report(path, report) -> None:
    with _open_lf(path) as f:
        f.write("field,nx,ny,error_L2,order\n")
        for fieldname, nx, ny, err, order in report.rows():
            f.write(",".join((fieldname, str(nx), str(ny),
                              format_value(err), format_value(order))) + "\n")


def write_tail_report(path, report) -> None:
    with _open_lf(path) as f:
        f.write("delta,w\n")
        for d, w in zip(report.deltas, report.w):
            f.write(f"{format_value(d)},{format_value(w)}\n")
        f.write(f"# fit_a1,{format_value(report.a1)}\n")
        f.write(f"# fit_a2,{format_value(report.a2)}\n")


def write_dependence_report(path, report) -> None:
    with _open_lf(path) as f:
        f.write("t,D\n")
        for t, d in zip(report.times, report.D):
            f.write(f"{format_value(t)},{format_value(d)}\n")


def write_meta(outdir, *, config_text: str, wall_time: float,
               early_stop: str | None = None, cause: str | None = None,
               extra: dict | None = None) -> None:
    meta = {
        "version": __version__,
        "config": config_text,
        "wall_time_s": wall_time,
        "early_stop": early_stop,
        "cause": cause,
    }
    if extra:
        meta.update(extra)
    with _open_lf(os.path.join(outdir, "meta.json")) as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
