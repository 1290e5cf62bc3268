"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 numerical failure (singular
matrices, too few degrees of freedom), 4 a verification check failed.
"""

import argparse
import csv
import io
import sys

import numpy as np

from . import __version__
from .criteria import (
    CriterionName,
    ModelDims,
    aic,
    aic_known_sigma,
    aicc,
    cbar,
    maic,
    maicc,
    sure_mat_regression,
)
from .errors import MaiccError, NumericError, ValidationError
from .mcengine import (
    grid_rows,
    load_spec,
    run_mse_experiment,
    run_selection_experiment,
    selection_rows,
    summary_rows,
    to_csv,
)
from .mcengine.report import fmt
from .regression import fit_mle, read_matrix_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

CRITERIA_HEADER = ["criterion", "value", "c_used", "cbar", "conditions_met", "status"]


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_fit(args):
    X = read_matrix_csv(args.design, header=args.header)
    Y = read_matrix_csv(args.response, header=args.header)
    if Y.shape[0] != X.shape[0]:
        raise ValidationError(
            f"response has {Y.shape[0]} rows but design has {X.shape[0]}"
        )
    fit = fit_mle(X, Y)
    sigma = None
    if args.sigma:
        sigma = read_matrix_csv(args.sigma, header=args.header)
    return fit, sigma


def criteria_table(fit, sigma=None):
    """Rows for every criterion; unavailable ones carry the reason in ``status``."""
    dims = ModelDims.of(fit)
    rows = []
    cb = None
    if dims.dof_margin > 0:
        cb = cbar(dims)

    def add(name, thunk):
        try:
            cv = thunk()
        except NumericError as exc:
            rows.append([name.value, "", "", "", "false", f"unavailable: {exc}"])
            return
        cbar_col = fmt(cb) if name is CriterionName.MAICC else ""
        rows.append([name.value, fmt(cv.value), fmt(cv.c_used), cbar_col,
                     str(cv.conditions_met).lower(), "ok"])

    add(CriterionName.AIC, lambda: aic(fit, dims))
    add(CriterionName.AICC, lambda: aicc(fit, dims))
    add(CriterionName.MAICC, lambda: maicc(fit, dims))
    if sigma is not None:
        add(CriterionName.AIC_KNOWN, lambda: aic_known_sigma(fit, sigma))
        add(CriterionName.MAIC, lambda: maic(fit, sigma))
        rows.append([CriterionName.SURE_MAT.value, fmt(sure_mat_regression(fit, sigma)),
                     "", "", "true", "ok"])
    return CRITERIA_HEADER, rows


def _matrix_csv(label, M):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([label])
    for row in np.atleast_2d(M):
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _criteria_output(fit, sigma):
    header, rows = criteria_table(fit, sigma)
    if all(r[-1] != "ok" for r in rows[:3]):
        raise NumericError(
            "no unknown-covariance criterion is available: " + rows[0][-1].split(": ", 1)[-1]
        )
    return to_csv(header, rows)


def cmd_fit(args):
    fit, sigma = _load_fit(args)
    text = _matrix_csv("Bhat", fit.Bhat) + "\n" + _matrix_csv("SigmaHat", fit.SigmaHat) + "\n"
    _emit(text + _criteria_output(fit, sigma), args.out)
    return EXIT_OK


def cmd_criteria(args):
    fit, sigma = _load_fit(args)
    _emit(_criteria_output(fit, sigma), args.out)
    return EXIT_OK


def _spec(args):
    return load_spec(args.spec).with_overrides(seed=args.seed, reps=args.reps)


def cmd_mc_mse(args):
    summary = run_mse_experiment(_spec(args), threads=args.threads)
    _emit(to_csv(*summary_rows(summary)), args.out)
    return EXIT_OK


def cmd_figure(args):
    summary = run_mse_experiment(_spec(args), threads=args.threads)
    _emit(to_csv(*grid_rows(summary)), args.out)
    return EXIT_OK


def cmd_var_select(args):
    spec = _spec(args)
    table = run_selection_experiment(spec, threads=args.threads)
    _emit(to_csv(*selection_rows(table, spec)), args.out)
    return EXIT_OK


def cmd_verify(args):
    from .verify import NEGATIVE_Z, run_battery

    res = run_battery(args.battery, seed=args.seed or 0, reps=args.reps)
    header = ["identity_id", "config", "statistic_kind", "statistic", "result"]
    rows = [r.row() for r in res.checks]
    for r in res.controls:
        row = r.row()
        row[-1] = "rejected" if r.statistic > NEGATIVE_Z else "NOT_REJECTED"
        rows.append(row)
    _emit(to_csv(header, rows), args.out)
    return EXIT_OK if res.ok else EXIT_VERIFY


def build_parser():
    ap = argparse.ArgumentParser(
        prog="maicc",
        description="Loss estimators of the KL discrepancy: criteria, Monte Carlo studies, identity checks.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write output here instead of stdout")

    def data(p):
        p.add_argument("design", help="CSV design matrix, n rows by p columns")
        p.add_argument("response", help="CSV response matrix, n rows by q columns")
        p.add_argument("--sigma", help="CSV known noise covariance (q by q) for the known-covariance criteria")
        p.add_argument("--header", action="store_true", help="CSV files start with a header row")
        common(p)

    def mc(p):
        p.add_argument("--spec", required=True, help="experiment JSON, or the name of a bundled spec")
        p.add_argument("--seed", type=int, help="override the spec's seed")
        p.add_argument("--reps", type=int, help="override the spec's replication count")
        p.add_argument("--threads", type=int, default=1)
        common(p)

    p = sub.add_parser("fit", help="ML fit plus every applicable criterion")
    data(p)
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser("criteria", help="criterion table only")
    data(p)
    p.set_defaults(func=cmd_criteria)
    p = sub.add_parser("mc-mse", help="per-estimator MSE summary (long CSV)")
    mc(p)
    p.set_defaults(func=cmd_mc_mse)
    p = sub.add_parser("figure", help="one row per grid point (wide CSV)")
    mc(p)
    p.set_defaults(func=cmd_figure)
    p = sub.add_parser("var-select", help="order selection frequencies")
    mc(p)
    p.set_defaults(func=cmd_var_select)
    p = sub.add_parser("verify", help="run the identity-check battery")
    p.add_argument("--battery", default="default", choices=("default", "quick"))
    p.add_argument("--seed", type=int, help="battery seed (default 0)")
    p.add_argument("--reps", type=int, help="override replications per Monte Carlo check")
    common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MaiccError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
