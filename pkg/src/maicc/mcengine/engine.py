"""Seeded Monte Carlo runs: paired MSE comparisons and order selection.

Replications are processed in fixed-size blocks; block ``b`` draws from
``RngStream(seed, b)``. Block boundaries depend only on ``reps`` and
``block_size``, never on the thread count, and per-replication errors are
written into preallocated arrays before any reduction, so results are
bit-identical for any scheduling. The same block streams are reused at every
grid point (common random numbers), which keeps sweeps smooth.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..criteria import (
    CriterionName,
    ModelDims,
    aic_known_value,
    aic_value,
    aicc_value,
    cbar_value,
    johnstone_value,
    matsuda_value,
    thm1_value,
)
from ..errors import ValidationError
from ..matstat import (
    DOMAIN_DESIGN,
    RngStream,
    inv_gram_traces,
    logdet_spd,
    logdet_spd_batch,
    trace_solve_spd,
)
from ..regression import LOG_2PIE, kl_known_sigma_value, kl_value, read_matrix_csv
from .spec import ExperimentSpec, GridPoint, validate

N = CriterionName


@dataclass
class EstimatorStats:
    key: str
    name: CriterionName
    c_used: object
    mse: float
    mse_se: float
    bias: float
    bias_se: float
    pct_improvement: float
    pct_improvement_se: float


@dataclass
class PointSummary:
    index: int
    axis_value: float
    dims: ModelDims
    stats: list
    errors: dict = field(repr=False, default_factory=dict)

    def __getitem__(self, key) -> EstimatorStats:
        for s in self.stats:
            if s.key == key:
                return s
        raise KeyError(key)


@dataclass
class McSummary:
    spec: ExperimentSpec
    points: list

    @property
    def keys(self):
        return [e.key for e in self.spec.estimators]


@dataclass
class SelectionTable:
    """Selected-order counts per criterion, summing to ``realizations``."""

    orders: tuple
    counts: dict
    realizations: int

    def frequency(self, key, order) -> int:
        return int(self.counts[key][self.orders.index(order)])


def _blocks(reps, block_size):
    starts = range(0, reps, block_size)
    return [(b, s, min(block_size, reps - s)) for b, s in enumerate(starts)]


def _run_blocks(spec, fn, threads):
    blocks = _blocks(spec.reps, spec.block_size)
    if threads and threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(fn, blocks))
    else:
        results = [fn(b) for b in blocks]
    return blocks, results


def fixed_design(spec: ExperimentSpec, n: int, p: int) -> np.ndarray:
    """The design used when X is not redrawn: a file, or N(0,1) entries from the design stream."""
    src = spec.x_source
    if isinstance(src, dict) and "file" in src:
        X = read_matrix_csv(src["file"], header=bool(src.get("header", False)))
        if X.shape[0] != n or X.shape[1] < p:
            raise ValidationError(f"design file is {X.shape}, need {n} rows and >= {p} columns")
        return X[:, :p]
    if src not in ("generated", None):
        raise ValidationError(f"bad x_source {src!r}")
    gen = RngStream(spec.seed, 0, DOMAIN_DESIGN).generator()
    return gen.standard_normal((n, p))


def _fit_batch(X, Y):
    """Batched ML fit. X is (m, n, p) or (n, p); Y is (m, n, q)."""
    n = Y.shape[-2]
    Q, R = np.linalg.qr(X)
    Qt = np.swapaxes(Q, -1, -2)
    QtY = Qt @ Y
    Bhat = np.linalg.solve(R, QtY) if R.ndim == 3 else np.linalg.solve(R[None], QtY)
    resid = Y - Q @ QtY
    Rg = np.swapaxes(resid, -1, -2) @ resid
    G = np.swapaxes(QtY, -1, -2) @ QtY
    return Bhat, R, Rg / n, Rg, G


def _regression_block(spec, pt: GridPoint, X_fixed, blk):
    b, _, m = blk
    d = pt.dims
    n, p, q = d.n, d.p, d.q
    gen = RngStream(spec.seed, b).generator()
    X = gen.standard_normal((m, n, p)) if X_fixed is None else X_fixed
    L = np.linalg.cholesky(pt.Sigma)
    Y = X @ pt.coef + gen.standard_normal((m, n, q)) @ L.T
    Bhat, R, Sh, Rg, G = _fit_batch(X, Y)
    D = R @ (Bhat - pt.coef)
    err_gram = np.swapaxes(D, -1, -2) @ D
    out = {}
    if spec.setting == "regression":
        logdet = logdet_spd_batch(Sh)
        target = kl_value(n, q, Sh, pt.Sigma, err_gram, logdet)
        trace = None
        for est in spec.estimators:
            if est.name is N.AIC:
                v = aic_value(n, p, q, logdet)
            elif est.name is N.AICC:
                v = aicc_value(n, p, q, logdet)
            else:
                if trace is None:
                    trace = trace_solve_spd(G, Sh)
                v = aicc_value(n, p, q, logdet) - est.constant(d, pt.c_ratio) * trace
            out[est.key] = v - target
    else:
        lds = logdet_spd(pt.Sigma)
        target = kl_known_sigma_value(n, q, lds, pt.Sigma, err_gram)
        aic_k = aic_known_value(n, p, q, lds, pt.Sigma, Rg)
        trace = None
        for est in spec.estimators:
            if est.name is N.AIC_KNOWN:
                out[est.key] = aic_k - target
            elif est.name is N.SURE_MAT:
                sure = aic_k - n * q * LOG_2PIE - n * lds
                loss = target - n * q * LOG_2PIE - n * lds
                out[est.key] = sure - loss
            else:
                if trace is None:
                    trace = trace_solve_spd(G, np.broadcast_to(pt.Sigma, G.shape))
                out[est.key] = aic_k - est.constant(d, pt.c_ratio) * trace - target
    return out


def _normal_mean_block(spec, pt: GridPoint, blk):
    b, _, m = blk
    p, q = pt.dims.p, pt.dims.q
    gen = RngStream(spec.seed, b).generator()
    noise = gen.standard_normal((m, p, q))
    Y = pt.coef + noise
    loss = (noise * noise).sum(axis=(-2, -1))
    out = {}
    tr1 = sv = None
    for est in spec.estimators:
        if est.name in (N.SURE_MAT, N.SURE_VEC):
            v = np.full(m, float(p * q))
        elif est.name is N.JOHNSTONE:
            v = johnstone_value(p, (Y * Y).sum(axis=(-2, -1)))
        elif est.name is N.THM1:
            if tr1 is None:
                tr1, _ = inv_gram_traces(Y)
            v = thm1_value(p, q, tr1)
        else:
            if sv is None:
                sv = np.linalg.svd(Y, compute_uv=False)
            v = matsuda_value(p, q, sv)
        out[est.key] = v - loss
    return out


def _summarize(spec, pt, errors) -> PointSummary:
    base = errors[spec.baseline_key]
    a = base * base
    Ma = a.mean()
    N_ = a.size
    root = np.sqrt(N_)
    stats = []
    for est in spec.estimators:
        e = errors[est.key]
        sq = e * e
        Mb = sq.mean()
        ratio = Mb / Ma
        resid = sq - ratio * a
        if N_ > 1:
            mse_se = sq.std(ddof=1) / root
            bias_se = e.std(ddof=1) / root
            pct_se = 100.0 * resid.std(ddof=1) / root / Ma
        else:
            mse_se = bias_se = pct_se = float("nan")
        stats.append(
            EstimatorStats(
                key=est.key,
                name=est.name,
                c_used=est.constant(pt.dims, pt.c_ratio),
                mse=float(Mb),
                mse_se=float(mse_se),
                bias=float(e.mean()),
                bias_se=float(bias_se),
                pct_improvement=float(100.0 * (Ma - Mb) / Ma),
                pct_improvement_se=float(pct_se),
            )
        )
    return PointSummary(pt.index, pt.axis_value(spec.sweep_axis), pt.dims, stats, errors)


def run_point(spec: ExperimentSpec, pt: GridPoint, threads=1) -> PointSummary:
    if spec.setting == "normal_mean":
        fn = lambda blk: _normal_mean_block(spec, pt, blk)  # noqa: E731
    else:
        X_fixed = None if spec.redraw_x else fixed_design(spec, pt.dims.n, pt.dims.p)
        fn = lambda blk: _regression_block(spec, pt, X_fixed, blk)  # noqa: E731
    blocks, results = _run_blocks(spec, fn, threads)
    errors = {}
    for est in spec.estimators:
        arr = np.empty(spec.reps)
        for (_, start, m), res in zip(blocks, results):
            arr[start:start + m] = res[est.key]
        errors[est.key] = arr
    return _summarize(spec, pt, errors)


def run_mse_experiment(spec: ExperimentSpec, threads=1) -> McSummary:
    """Paired MSE comparison of every estimator at every grid point.

    All estimators are evaluated on the same replications, so the
    improvement standard errors use the paired (delta-method) variance.
    """
    validate(spec)
    return McSummary(spec, [run_point(spec, pt, threads) for pt in spec.grid])


def _selection_block(spec, pt, orders, X_fixed, blk):
    b, _, m = blk
    d = pt.dims
    n, q = d.n, d.q
    gen = RngStream(spec.seed, b).generator()
    X = gen.standard_normal((m, n, d.p)) if X_fixed is None else X_fixed
    L = np.linalg.cholesky(pt.Sigma)
    Y = X @ pt.coef + gen.standard_normal((m, n, q)) @ L.T
    values = {est.key: np.full((m, len(orders)), np.inf) for est in spec.estimators}
    for j, k in enumerate(orders):
        dk = ModelDims(n, k, q)
        if n - k < q:
            continue
        _, _, Sh, _, G = _fit_batch(X[..., :k], Y)
        logdet = logdet_spd_batch(Sh)
        for est in spec.estimators:
            if est.name is N.AIC:
                values[est.key][:, j] = aic_value(n, k, q, logdet)
            elif dk.dof_margin > 0:
                v = aicc_value(n, k, q, logdet)
                if est.name is N.MAICC:
                    v = v - est.constant(dk, pt.c_ratio) * trace_solve_spd(G, Sh)
                values[est.key][:, j] = v
    # argmin returns the first minimum, i.e. ties go to the smaller order
    return {key: np.argmin(v, axis=1) for key, v in values.items()}


def run_selection_experiment(spec: ExperimentSpec, candidate_orders=None, threads=1) -> SelectionTable:
    """Order selection among nested models using the first k columns of X.

    Candidates where a criterion is undefined (n - k - q - 1 <= 0 for AICc
    and MAICc) get +inf. MAICc uses the constant evaluated at each
    candidate's own dimensions.
    """
    validate(spec)
    if spec.setting != "regression":
        raise ValidationError("order selection needs the 'regression' setting")
    if len(spec.grid) != 1:
        raise ValidationError("order selection uses exactly one grid point")
    pt = spec.grid[0]
    orders = tuple(candidate_orders or spec.candidate_orders or range(1, pt.dims.p + 1))
    if any(not 1 <= k <= pt.dims.p for k in orders):
        raise ValidationError(f"candidate orders must lie in 1..{pt.dims.p}")
    orders = tuple(sorted(set(orders)))
    X_fixed = None if spec.redraw_x else fixed_design(spec, pt.dims.n, pt.dims.p)
    fn = lambda blk: _selection_block(spec, pt, orders, X_fixed, blk)  # noqa: E731
    blocks, results = _run_blocks(spec, fn, threads)
    counts = {}
    for est in spec.estimators:
        sel = np.concatenate([res[est.key] for res in results])
        counts[est.key] = np.bincount(sel, minlength=len(orders))
    return SelectionTable(orders, counts, spec.reps)


def cbar_for(dims: ModelDims) -> float:
    return float(cbar_value(dims.n, dims.p, dims.q))
