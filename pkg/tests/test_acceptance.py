"""Acceptance checks. Each criterion prints one ``[PASS]``/``[FAIL]`` line.

Monte Carlo runs use the bundled specs at their stored seeds and
replication counts; results are cached per module so each experiment runs
once.
"""

import time

import numpy as np
import pytest

from conftest import record
from maicc import cli
from maicc.criteria import ModelDims, cbar, johnstone, thm1_estimator
from maicc.mcengine import bundled_specs, load_spec, run_mse_experiment, run_selection_experiment
from maicc.verify import NEGATIVE_Z, run_battery

THREADS = 4
Z = 3.0


class Runs:
    """Lazy cache of experiment results with wall time."""

    def __init__(self):
        self.mse = {}
        self.times = {}

    def get(self, name):
        if name not in self.mse:
            t0 = time.perf_counter()
            self.mse[name] = run_mse_experiment(load_spec(name), threads=THREADS)
            self.times[name] = time.perf_counter() - t0
        return self.mse[name]


@pytest.fixture(scope="module")
def runs():
    return Runs()


def paired_se(x):
    return x.std(ddof=1) / np.sqrt(x.size)


def test_criterion_1_aicc_unbiased(runs):
    summary = runs.get("aicc_unbiased")
    parts, ok = [], True
    for pt in summary.points:
        st = pt["AICC"]
        good = abs(st.bias) < Z * st.bias_se
        ok &= good
        parts.append(f"q={pt.dims.q}#{pt.index} bias={st.bias:+.3f}±{st.bias_se:.3f}")
    per_point = runs.times["aicc_unbiased"] / len(summary.points)
    ok &= per_point < 60
    record(1, ok, "; ".join(parts) + f"; {per_point:.1f}s/point")
    assert ok


def test_criterion_2_aic_dominated(runs):
    summary = runs.get("aicc_unbiased")
    parts, ok = [], True
    for pt in summary.points:
        e_a, e_c = pt.errors["AIC"], pt.errors["AICC"]
        diff = e_a**2 - e_c**2
        gap, se = diff.mean(), paired_se(diff)
        shift_sq = e_a.mean() ** 2
        good = gap > Z * se and abs(gap - shift_sq) < Z * se
        ok &= good
        parts.append(f"#{pt.index} gap={gap:.3f}±{se:.3f} bias²={shift_sq:.3f}")
    record(2, ok, "; ".join(parts))
    assert ok


def test_criterion_3_maicc_dominates_aicc(runs):
    parts, ok = [], True
    for name in ("fig_norm_uni", "fig_sigma1"):
        summary = runs.get(name)
        for pt in summary.points:
            st = pt["MAICC"]
            good = st.pct_improvement >= -Z * st.pct_improvement_se
            if pt.index == 0:
                good &= st.pct_improvement > Z * st.pct_improvement_se
            ok &= good
            parts.append(f"{name}[{pt.axis_value:g}]={st.pct_improvement:.2f}±{st.pct_improvement_se:.2f}%")
    record(3, ok, " ".join(parts))
    assert ok


def test_criterion_4_table1():
    spec = load_spec("table1")
    t0 = time.perf_counter()
    table = run_selection_experiment(spec, threads=THREADS)
    elapsed = time.perf_counter() - t0
    f_aicc, f_maicc = table.frequency("AICC", 5), table.frequency("MAICC", 5)
    a = f_maicc - f_aicc > 0
    b = abs(f_aicc - 460) <= 60 and abs(f_maicc - 492) <= 60
    ok = a and b and elapsed < 30
    record(4, ok, f"k=5 counts AICc={f_aicc} (target 460±60), MAICc={f_maicc} (target 492±60), "
                  f"AIC={table.frequency('AIC', 5)}; (a)={'pass' if a else 'FAIL'} (b)={'pass' if b else 'FAIL'}; "
                  f"{elapsed:.1f}s")
    assert ok


def test_criterion_5_known_mean(runs):
    parts, ok = [], True
    mat = runs.get("fig_matsuda")
    for pt in mat.points:
        if pt.axis_value not in (0.0, 10.0):
            continue
        st = pt["THM1"]
        good = st.pct_improvement > Z * st.pct_improvement_se
        ok &= good
        parts.append(f"THM1 sigma1={pt.axis_value:g}: {st.pct_improvement:.2f}±{st.pct_improvement_se:.2f}%")
    st = runs.get("fig_johnstone").points[0]["JOHNSTONE"]
    good = st.pct_improvement > Z * st.pct_improvement_se
    ok &= good
    parts.append(f"Johnstone theta=0: {st.pct_improvement:.2f}±{st.pct_improvement_se:.2f}%")
    record(5, ok, "; ".join(parts))
    assert ok


def test_criterion_6a_c_sweep_peak(runs):
    pts = runs.get("fig_c_uni").points
    vals = [(pt.axis_value, pt["MAICC"].pct_improvement) for pt in pts]
    best = max(vals, key=lambda v: v[1])[0]
    ok = 0.5 < best < 1.1
    record("6(a)", ok, "c/cbar -> pct: " + " ".join(f"{c:g}:{v:.2f}" for c, v in vals)
           + f"; argmax at {best:g}, required in (0.5, 1.1)")
    assert ok


def diff_se(a, b):
    return np.hypot(a.pct_improvement_se, b.pct_improvement_se)


def test_criterion_6b_sample_size(runs):
    pts = {int(pt.axis_value): pt["MAICC"] for pt in runs.get("fig_n_uni").points}
    ns = [30, 50, 100]
    ok = all(pts[a].pct_improvement > pts[b].pct_improvement - Z * diff_se(pts[a], pts[b])
             for a, b in zip(ns, ns[1:]))
    record("6(b)", ok, "n -> pct: " + " ".join(f"{n}:{pts[n].pct_improvement:.2f}±{pts[n].pct_improvement_se:.2f}"
                                              for n in ns))
    assert ok


def test_criterion_6c_correlation_peak(runs):
    pts = runs.get("fig_rq").points
    vals = [(pt.axis_value, pt["MAICC"].pct_improvement) for pt in pts]
    best = max(vals, key=lambda v: v[1])[0]
    ok = best == 0.0
    record("6(c)", ok, "r -> pct: " + " ".join(f"{r:g}:{v:.3f}" for r, v in vals) + f"; argmax at r={best:g}")
    assert ok


def test_criterion_7_battery():
    t0 = time.perf_counter()
    res = run_battery("default", seed=0)
    elapsed = time.perf_counter() - t0
    failed = [r.row() for r in res.checks if not r.passed]
    weak = [r.row() for r in res.controls if r.statistic <= NEGATIVE_Z]
    ok = res.ok and elapsed < 300
    detail = (f"{len(res.checks) - len(failed)}/{len(res.checks)} checks pass, "
              f"{len(res.controls) - len(weak)}/{len(res.controls)} controls rejected at z>{NEGATIVE_Z:g}, {elapsed:.0f}s")
    if failed:
        detail += "; failing: " + ", ".join(f"{r[0]}[{r[1]}] {r[2]}={r[3]}" for r in failed)
    if weak:
        detail += "; controls not rejected: " + ", ".join(f"{r[0]}[{r[1]}]" for r in weak)
    record(7, ok, detail)
    assert ok


def test_criterion_8_internal_consistency():
    t0 = time.perf_counter()
    gen = np.random.default_rng(8)
    worst_est = 0.0
    for _ in range(100):
        p = int(gen.integers(3, 15))
        y = gen.standard_normal((p, 1)) * gen.uniform(0.1, 5)
        a, b = thm1_estimator(y).value, johnstone(y[:, 0]).value
        worst_est = max(worst_est, abs(a - b) / abs(b))
    worst_c = 0.0
    for p in range(5, 21):
        for n in range(p + 3, 101):
            # single-response form of the bound
            a, b = cbar(ModelDims(n, p, 1)), 4 * n * n * (p - 4) / ((n - p) * (n - p + 2))
            worst_c = max(worst_c, abs(a - b) / max(abs(b), 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst_est <= 1e-12 and worst_c <= 1e-12 and elapsed < 1
    record(8, ok, f"max rel diff thm1 vs johnstone {worst_est:.1e}, cbar vs single-response form {worst_c:.1e}, "
                  f"{elapsed:.2f}s")
    assert ok


def test_criterion_9_determinism(tmp_path):
    mismatched = []
    for name in bundled_specs():
        spec = load_spec(name)
        cmd = "var-select" if spec.candidate_orders else "mc-mse"
        reps = "200" if cmd == "var-select" else "3000"
        outs = []
        for threads in ("1", "4"):
            out = tmp_path / f"{name}_{threads}.csv"
            assert cli.main([cmd, "--spec", name, "--reps", reps, "--threads", threads, "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        if outs[0] != outs[1]:
            mismatched.append(name)
    ok = not mismatched
    record(9, ok, f"{len(bundled_specs())} bundled specs, threads 1 vs 4 byte-identical"
           + (f"; mismatched: {mismatched}" if mismatched else ""))
    assert ok
