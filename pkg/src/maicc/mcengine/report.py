"""CSV rendering for Monte Carlo summaries and selection tables.

Floats are written with 17 significant digits so that a CSV round-trips to
the exact binary value. Headers are fixed:

* summary (long): ``point,axis,axis_value,estimator,criterion,c,reps,mse,
  mse_se,bias,bias_se,pct_improvement,pct_improvement_se``
* grid (wide): ``point,<axis>`` followed by, per estimator label ``L``,
  ``L:mse,L:mse_se,L:pct_improvement,L:pct_improvement_se``
* selection: ``criterion,c_rule,<order>...``
"""

import csv
import io

from .engine import McSummary, SelectionTable, run_mse_experiment
from .spec import ExperimentSpec

SUMMARY_HEADER = [
    "point", "axis", "axis_value", "estimator", "criterion", "c", "reps",
    "mse", "mse_se", "bias", "bias_se", "pct_improvement", "pct_improvement_se",
]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return "%.17g" % float(x)


def summary_rows(summary: McSummary):
    axis = summary.spec.sweep_axis or "point"
    rows = []
    for pt in summary.points:
        for s in pt.stats:
            rows.append([
                str(pt.index), axis, fmt(pt.axis_value), s.key, s.name.value,
                fmt(s.c_used), str(summary.spec.reps), fmt(s.mse), fmt(s.mse_se),
                fmt(s.bias), fmt(s.bias_se), fmt(s.pct_improvement),
                fmt(s.pct_improvement_se),
            ])
    return SUMMARY_HEADER, rows


def grid_rows(summary: McSummary):
    axis = summary.spec.sweep_axis or "point"
    header = ["point", axis]
    for key in summary.keys:
        header += [f"{key}:mse", f"{key}:mse_se", f"{key}:pct_improvement", f"{key}:pct_improvement_se"]
    rows = []
    for pt in summary.points:
        row = [str(pt.index), fmt(pt.axis_value)]
        for s in pt.stats:
            row += [fmt(s.mse), fmt(s.mse_se), fmt(s.pct_improvement), fmt(s.pct_improvement_se)]
        rows.append(row)
    return header, rows


def improvement_grid(spec: ExperimentSpec, threads=1):
    """Run ``spec`` and return ``(header, rows)`` with one row per grid point."""
    return grid_rows(run_mse_experiment(spec, threads=threads))


def selection_rows(table: SelectionTable, spec: ExperimentSpec):
    header = ["criterion", "c_rule"] + [str(k) for k in table.orders]
    rows = []
    for est in spec.estimators:
        if est.name.value in ("MAICC", "MAIC"):
            if est.c is not None:
                rule = f"c={fmt(est.c)}"
            else:
                ratio = est.c_ratio if est.c_ratio is not None else spec.grid[0].c_ratio
                rule = "c=cbar(n,k,q)" if ratio is None else f"c={fmt(ratio)}*cbar(n,k,q)"
        else:
            rule = ""
        rows.append([est.key, rule] + [str(int(c)) for c in table.counts[est.key]])
    return header, rows


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
