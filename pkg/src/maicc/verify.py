"""Numerical oracles for the matrix identities behind the dominance results.

Derivative identities are checked against central finite differences.
Expectation identities are checked by Monte Carlo: when both sides are
random they are evaluated on the same draws and the z-score of the paired
difference is reported, otherwise the sample mean is compared with the
closed form component by component and the largest |z| is reported.

Negative controls feed a deliberately wrong right-hand side through the same
machinery and must be rejected at ``z > NEGATIVE_Z``.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DegreesOfFreedomError, ValidationError
from .matstat import DOMAIN_AUXILIARY, RngStream, _checked_singular_values, as_matrix, cholesky

FD_TOL = 1e-5
FD_STEP = 1e-5
Z_TOL = 3.0
NEGATIVE_Z = 5.0
PERTURBATION = 1.1
DEFAULT_REPS = 100_000
CONTROL_REPS = 1_000_000
BLOCK = 1 << 16


class IdentityId(str, Enum):
    A1_inv_gram_deriv = "A1_inv_gram_deriv"
    A2_trace_deriv = "A2_trace_deriv"
    A3_divergence = "A3_divergence"
    B1_stein = "B1_stein"
    B2_trace_product = "B2_trace_product"
    B3_wishart_inv_mean = "B3_wishart_inv_mean"
    B4_inv_A_inv = "B4_inv_A_inv"
    B5_trinv_times_inv = "B5_trinv_times_inv"
    B6_trinv_times_S = "B6_trinv_times_S"
    B7_SAS_inv = "B7_SAS_inv"
    B8a_exp0 = "B8a_exp0"
    B8b_exp = "B8b_exp"


WISHART_IDS = (
    IdentityId.B2_trace_product,
    IdentityId.B3_wishart_inv_mean,
    IdentityId.B4_inv_A_inv,
    IdentityId.B5_trinv_times_inv,
    IdentityId.B6_trinv_times_S,
    IdentityId.B7_SAS_inv,
)


@dataclass
class IdentityCheckReport:
    """Outcome of one identity check.

    ``statistic`` is a max absolute error (finite-difference checks) or a
    max |z| (Monte Carlo checks); ``passed`` means ``statistic < tolerance``.
    """

    identity_id: IdentityId
    statistic_kind: str
    statistic: float
    tolerance: float
    passed: bool
    config: dict = field(default_factory=dict)

    def row(self):
        cfg = ";".join(f"{k}={v}" for k, v in self.config.items())
        return [self.identity_id.value, cfg, self.statistic_kind, "%.6g" % self.statistic,
                "pass" if self.passed else "FAIL"]


def _report(identity, kind, stat, tol, config):
    stat = float(stat)
    return IdentityCheckReport(identity, kind, stat, tol, bool(stat < tol), config)


def _inv_gram(Z):
    return np.linalg.inv(np.swapaxes(Z, -1, -2) @ Z)


def _tr(M):
    return np.trace(M, axis1=-2, axis2=-1)


def _full_rank(Z):
    Z = as_matrix(Z, "Z")
    _checked_singular_values(Z)
    return Z


# ---------------------------------------------------------------- derivatives

def central_difference(f: Callable, Z, h_scale=FD_STEP) -> np.ndarray:
    """Jacobian of ``f`` at ``Z`` with shape ``Z.shape + f(Z).shape``.

    Step ``h_ij = h_scale * (1 + |Z_ij|)``.
    """
    Z = np.asarray(Z, dtype=np.float64)
    out = None
    for idx in np.ndindex(Z.shape):
        h = h_scale * (1.0 + abs(Z[idx]))
        Zp = Z.copy()
        Zm = Z.copy()
        Zp[idx] += h
        Zm[idx] -= h
        d = (np.asarray(f(Zp)) - np.asarray(f(Zm))) / (2.0 * h)
        if out is None:
            out = np.empty(Z.shape + d.shape)
        out[idx] = d
    return out


def inv_gram_jacobian(Z) -> np.ndarray:
    """Analytic ∂((ZᵀZ)⁻¹)_kl / ∂Z_ij as an array indexed [i, j, k, l]."""
    W = _inv_gram(Z)
    ZW = Z @ W
    # -W_kj (ZW)_il - (W Zᵀ)_ki W_jl
    return -np.einsum("kj,il->ijkl", W, ZW) - np.einsum("ik,jl->ijkl", ZW, W)


def _inv_gram_error(Z, h_scale):
    return np.max(np.abs(central_difference(_inv_gram, Z, h_scale) - inv_gram_jacobian(Z)))


def _trace_error(Z, S, h_scale):
    W = _inv_gram(Z)
    analytic = -2.0 * Z @ W @ S @ W
    fd = central_difference(lambda M: _tr(S @ _inv_gram(M)), Z, h_scale)
    return np.max(np.abs(fd - analytic))


def divergence_closed_form(Z, A, B) -> float:
    """(p-q-2) tr(WAWB) - tr(AW) tr(WB) with W = (ZᵀZ)⁻¹."""
    p, q = Z.shape
    W = _inv_gram(Z)
    return float((p - q - 2) * _tr(W @ A @ W @ B) - _tr(A @ W) * _tr(W @ B))


def _divergence_fd(Z, A, B, h_scale):
    jac = central_difference(lambda M: M @ _inv_gram(M) @ A @ _inv_gram(M) @ B, Z, h_scale)
    p, q = Z.shape
    return float(sum(jac[i, j, i, j] for i in range(p) for j in range(q)))


def _divergence_error(Z, A, B, h_scale):
    return abs(_divergence_fd(Z, A, B, h_scale) - divergence_closed_form(Z, A, B))


def check_deriv_inv_gram(Z, tol=FD_TOL, h_scale=FD_STEP) -> IdentityCheckReport:
    Z = _full_rank(Z)
    err = _inv_gram_error(Z, h_scale)
    return _report(IdentityId.A1_inv_gram_deriv, "max_abs_error", err, tol,
                   {"p": Z.shape[0], "q": Z.shape[1]})


def check_deriv_trace(Z, S, tol=FD_TOL, h_scale=FD_STEP) -> IdentityCheckReport:
    Z = _full_rank(Z)
    S = as_matrix(S, "S")
    cholesky(S, "S")
    err = _trace_error(Z, S, h_scale)
    return _report(IdentityId.A2_trace_deriv, "max_abs_error", err, tol,
                   {"p": Z.shape[0], "q": Z.shape[1]})


def check_divergence_identity(Z, A, B, tol=FD_TOL, h_scale=FD_STEP) -> IdentityCheckReport:
    """Divergence of Z W A W B against its closed form.

    The closed form needs A or B symmetric; for two non-symmetric matrices
    it does not hold and the check reports the discrepancy.
    """
    Z = _full_rank(Z)
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    err = _divergence_error(Z, A, B, h_scale)
    return _report(IdentityId.A3_divergence, "abs_error", err, tol,
                   {"p": Z.shape[0], "q": Z.shape[1]})


def step_halving_ratios(Z, S, A, B, h_scale=1e-2) -> dict:
    """err(h) / err(h/2) for each derivative identity; ≈4 for a second-order scheme.

    A coarse ``h_scale`` is used so that truncation error dominates rounding.
    """
    Z = _full_rank(Z)
    pairs = {
        IdentityId.A1_inv_gram_deriv: lambda h: _inv_gram_error(Z, h),
        IdentityId.A2_trace_deriv: lambda h: _trace_error(Z, S, h),
        IdentityId.A3_divergence: lambda h: _divergence_error(Z, A, B, h),
    }
    return {k: float(f(h_scale) / f(h_scale / 2.0)) for k, f in pairs.items()}


# -------------------------------------------------------- Monte Carlo helpers

def _blocks(reps):
    return [(b, min(BLOCK, reps - s)) for b, s in enumerate(range(0, reps, BLOCK))]


def _collect(reps, seed, draw):
    """Concatenate per-block arrays ``draw(generator, m)`` along axis 0."""
    if reps < 2:
        raise ValidationError("Monte Carlo checks need reps >= 2")
    parts = [draw(RngStream(seed, b, DOMAIN_AUXILIARY).generator(), m) for b, m in _blocks(reps)]
    return np.concatenate(parts, axis=0)


def mean_z_scores(samples, target) -> np.ndarray:
    """Componentwise (mean - target) / SE; zero-variance components give 0 or inf."""
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.shape[0]
    flat = samples.reshape(n, -1)
    tgt = np.broadcast_to(np.asarray(target, dtype=np.float64), samples.shape[1:]).reshape(-1)
    diff = flat.mean(axis=0) - tgt
    se = flat.std(axis=0, ddof=1) / np.sqrt(n)
    scale = np.maximum(np.abs(tgt), 1.0)
    z = np.empty_like(diff)
    ok = se > 1e-12 * scale
    z[ok] = diff[ok] / se[ok]
    z[~ok] = np.where(np.abs(diff[~ok]) <= 1e-10 * scale[~ok], 0.0, np.inf)
    return z


def _unique(M, symmetric):
    """Upper-triangular components of symmetric matrices, all components otherwise."""
    if not symmetric:
        return M.reshape(M.shape[0], -1)
    iu = np.triu_indices(M.shape[-1])
    return M[:, iu[0], iu[1]]


# ----------------------------------------------------------------- Stein

def _g_linear(Z, W):
    return Z


def _g_inv_gram(Z, W):
    return Z @ W


def _g_inv_gram_sq(Z, W):
    return Z @ W @ W


def _div_linear(p, q, W):
    return np.full(W.shape[0], float(p * q))


def _div_inv_gram(p, q, W):
    return (p - q - 1) * _tr(W)


def _div_inv_gram_sq(p, q, W):
    t1 = _tr(W)
    return (p - q - 2) * _tr(W @ W) - t1 * t1


STEIN_FUNCTIONS = {
    "linear": (_g_linear, _div_linear),
    "inv_gram": (_g_inv_gram, _div_inv_gram),
    "inv_gram_sq": (_g_inv_gram_sq, _div_inv_gram_sq),
    "constant": (None, None),
}


def _paired_z(lhs, rhs):
    return float(np.abs(mean_z_scores(lhs - rhs, 0.0))[0])


def check_stein(Zbar, g_id: str, reps=DEFAULT_REPS, seed=0, rhs_scale=1.0) -> IdentityCheckReport:
    """E[tr((Z - Z̄)ᵀ g(Z))] = E[div g(Z)] for Z ~ N_{p,q}(Z̄, I, I).

    ``g_id`` names a registry entry: ``linear`` (g = Z), ``inv_gram``
    (g = Z(ZᵀZ)⁻¹), ``inv_gram_sq`` (g = Z(ZᵀZ)⁻²) or ``constant``
    (g = all-ones matrix, divergence 0). ``rhs_scale`` multiplies the
    divergence and exists for negative controls.
    """
    if g_id not in STEIN_FUNCTIONS:
        raise ValidationError(f"unknown test function {g_id!r}; choose from {sorted(STEIN_FUNCTIONS)}")
    Zbar = as_matrix(Zbar, "Zbar")
    p, q = Zbar.shape
    g, div = STEIN_FUNCTIONS[g_id]
    if g_id in ("inv_gram", "inv_gram_sq") and p < q + 4:
        raise DegreesOfFreedomError(f"{g_id} needs p >= q + 4 for finite moments, got p={p}, q={q}")

    def draw(gen, m):
        E = gen.standard_normal((m, p, q))
        Z = Zbar + E
        if g is None:
            lhs = E.sum(axis=(-2, -1))
            rhs = np.zeros(m)
        else:
            W = _inv_gram(Z) if g_id != "linear" else np.empty((m, 0, 0))
            lhs = (E * g(Z, W)).sum(axis=(-2, -1))
            rhs = div(p, q, W)
        return np.stack([lhs, rhs_scale * rhs], axis=1)

    s = _collect(reps, seed, draw)
    z = _paired_z(s[:, 0], s[:, 1])
    return _report(IdentityId.B1_stein, "z_score", z, Z_TOL,
                   {"g": g_id, "p": p, "q": q, "zbar_norm": round(float(np.linalg.norm(Zbar)), 6),
                    "reps": reps})


# --------------------------------------------------------------- Wishart

def wishart_closed_form(identity_id, d, Sigma, A=None, B=None):
    """Closed-form expectation for S ~ W_q(d, Σ).

    Returns ``(value, symmetric)``. ``A`` must be symmetric for B4.
    """
    identity_id = IdentityId(identity_id)
    Sigma = as_matrix(Sigma, "Sigma")
    q = Sigma.shape[0]
    Si = np.linalg.inv(Sigma)
    I = np.eye(q)
    m1 = d - q - 1
    m3 = d - q - 3
    need = {IdentityId.B4_inv_A_inv: m3, IdentityId.B5_trinv_times_inv: m3}.get(identity_id)
    if (need is not None and need <= 0) or (identity_id != IdentityId.B2_trace_product and m1 <= 0):
        raise DegreesOfFreedomError(f"{identity_id.value} is undefined at d={d}, q={q}")
    if identity_id is IdentityId.B2_trace_product:
        v = (d * np.trace(A @ Sigma @ B @ Sigma) + d * np.trace(A.T @ Sigma @ B @ Sigma)
             + d * d * np.trace(A @ Sigma) * np.trace(B @ Sigma))
        return np.array([v]), False
    if identity_id is IdentityId.B3_wishart_inv_mean:
        return Si / m1, True
    den = (d - q) * m1 * m3 if need is not None else None
    if identity_id is IdentityId.B4_inv_A_inv:
        return np.trace(Si @ A) * Si / den + Si @ A @ Si / ((d - q) * m3), True
    if identity_id is IdentityId.B5_trinv_times_inv:
        return ((d - q - 2) * np.trace(Si) * Si + 2.0 * Si @ Si) / den, True
    if identity_id is IdentityId.B6_trinv_times_S:
        return d / m1 * np.trace(Si) * Sigma - 2.0 / m1 * I, True
    if identity_id is IdentityId.B7_SAS_inv:
        return (d * Sigma @ A @ Si - A.T - np.trace(A) * I) / m1, False
    raise ValidationError(f"{identity_id.value} is not a Wishart identity")


def _wishart_statistic(identity_id, S, A, B):
    if identity_id is IdentityId.B2_trace_product:
        return (_tr(A @ S) * _tr(B @ S))[:, None, None]
    if identity_id is IdentityId.B6_trinv_times_S:
        return _tr(np.linalg.inv(S))[:, None, None] * S
    if identity_id is IdentityId.B7_SAS_inv:
        return S @ A @ np.linalg.inv(S)
    Si = np.linalg.inv(S)
    if identity_id is IdentityId.B3_wishart_inv_mean:
        return Si
    if identity_id is IdentityId.B4_inv_A_inv:
        return Si @ A @ Si
    return _tr(Si)[:, None, None] * Si


def check_wishart_identity(identity_id, d, q=None, scale=None, reps=DEFAULT_REPS, seed=0,
                           A=None, B=None, rhs_scale=1.0) -> IdentityCheckReport:
    """Monte Carlo mean of the identity's matrix statistic against its closed form.

    Test matrices default to fixed deterministic choices: ``A`` symmetric
    positive definite for B4 and non-symmetric otherwise, ``B`` a second
    non-symmetric matrix. ``scale`` defaults to I_q.
    """
    identity_id = IdentityId(identity_id)
    if identity_id not in WISHART_IDS:
        raise ValidationError(f"{identity_id.value} is not a Wishart identity")
    Sigma = np.eye(q) if scale is None else as_matrix(scale, "scale")
    q = Sigma.shape[0]
    L = cholesky(Sigma, "scale")
    if A is None:
        A = default_test_matrix(q, symmetric=identity_id is IdentityId.B4_inv_A_inv, shift=0)
    if B is None:
        B = default_test_matrix(q, symmetric=False, shift=1)
    target, symmetric = wishart_closed_form(identity_id, d, Sigma, A, B)
    if d < q:
        raise DegreesOfFreedomError(f"Wishart dof {d} below dimension {q}")

    def draw(gen, m):
        G = gen.standard_normal((m, d, q)) @ L.T
        S = np.swapaxes(G, -1, -2) @ G
        return _unique(_wishart_statistic(identity_id, S, A, B), symmetric)

    s = _collect(reps, seed, draw)
    tgt = _unique((rhs_scale * np.atleast_2d(target))[None], symmetric)[0]
    z = float(np.max(np.abs(mean_z_scores(s, tgt))))
    return _report(identity_id, "max_z_score", z, Z_TOL, {"d": d, "q": q, "reps": reps})


def default_test_matrix(q, symmetric, shift=0) -> np.ndarray:
    """Deterministic q×q test matrix; SPD when ``symmetric``."""
    i, j = np.indices((q, q))
    M = np.cos(1.0 + i + 2.0 * j + shift) + np.eye(q)
    if symmetric:
        return M @ M.T + np.eye(q)
    return M


# --------------------------------------------------- cross expectations

def cross_coefficients(which, n, p, q):
    """Coefficients (a, b, c) of E trW, E trW² and E (trW)² on the right-hand side."""
    if which == "exp0":
        return float(p * q), -2.0 * (p - q - 2), 2.0
    if which == "exp":
        m = n - p - q - 1
        if m <= 0:
            raise DegreesOfFreedomError(f"needs n - p - q - 1 > 0, got n={n}, p={p}, q={q}")
        return (p * ((n - p) * q - 2) / m, -2.0 * ((n - p - 1) * (p - q - 2) + 2) / m,
                2.0 * (n - q - 2) / m)
    raise ValidationError(f"unknown cross expectation {which!r}; use 'exp0' or 'exp'")


def check_cross_expectation(which, p, q, n=None, Zbar=None, reps=DEFAULT_REPS, seed=0,
                            coef_scale=(1.0, 1.0, 1.0), force_mean_s=False) -> IdentityCheckReport:
    """Paired check of the trace cross-moment identities.

    ``exp0``: E[tr((Z-Z̄)ᵀ(Z-Z̄)) trW] with W = (ZᵀZ)⁻¹.
    ``exp``: E[tr((Z-Z̄)ᵀ(Z-Z̄)S⁻¹) tr(SW)] with S ~ W_q(n-p, I/n) independent of Z.

    ``coef_scale`` multiplies the three right-hand coefficients and
    ``force_mean_s`` replaces S by its mean; both exist for negative controls.
    """
    if p < q + 4:
        raise DegreesOfFreedomError(f"needs p >= q + 4 for finite moments, got p={p}, q={q}")
    Zbar = np.zeros((p, q)) if Zbar is None else as_matrix(Zbar, "Zbar")
    if Zbar.shape != (p, q):
        raise ValidationError(f"Zbar must be {p}x{q}")
    if which == "exp" and n is None:
        raise ValidationError("'exp' needs n")
    a, b, c = (s * k for s, k in zip(coef_scale, cross_coefficients(which, n, p, q)))

    def draw(gen, m):
        E = gen.standard_normal((m, p, q))
        W = _inv_gram(Zbar + E)
        t1 = _tr(W)
        rhs = a * t1 + b * _tr(W @ W) + c * t1 * t1
        EtE = np.swapaxes(E, -1, -2) @ E
        if which == "exp0":
            lhs = _tr(EtE) * t1
        elif force_mean_s:
            lhs = _tr(EtE) * t1
        else:
            G = gen.standard_normal((m, n - p, q)) / np.sqrt(n)
            S = np.swapaxes(G, -1, -2) @ G
            lhs = _tr(EtE @ np.linalg.inv(S)) * _tr(S @ W)
        return np.stack([lhs, rhs], axis=1)

    s = _collect(reps, seed, draw)
    z = _paired_z(s[:, 0], s[:, 1])
    ident = IdentityId.B8a_exp0 if which == "exp0" else IdentityId.B8b_exp
    cfg = {"p": p, "q": q}
    if which == "exp":
        cfg["n"] = n
    cfg.update(zbar_norm=round(float(np.linalg.norm(Zbar)), 6), reps=reps)
    return _report(ident, "z_score", z, Z_TOL, cfg)


# ---------------------------------------------------------------- battery

BATTERY_P = (6, 8, 12)
BATTERY_Q = (1, 2, 3)
BATTERY_DOF = (10, 20)


def well_conditioned(p, q, gen, smin=0.3) -> np.ndarray:
    """N(0,1) p×q matrix redrawn until its smallest singular value is at least ``smin``."""
    while True:
        Z = gen.standard_normal((p, q))
        if np.linalg.svd(Z, compute_uv=False)[-1] >= smin:
            return Z


def shifted_mean(p, q, size=2.0) -> np.ndarray:
    """Rank-one mean matrix size·e₁e₁ᵀ."""
    M = np.zeros((p, q))
    M[0, 0] = size
    return M


def wishart_finite_variance(identity_id, d, q) -> bool:
    """Whether the Monte Carlo statistic has finite variance.

    Second moments of S⁻¹ need d > q + 3 and those of S⁻¹·S⁻¹ need d > q + 7.
    """
    identity_id = IdentityId(identity_id)
    if identity_id in (IdentityId.B4_inv_A_inv, IdentityId.B5_trinv_times_inv):
        return d > q + 7
    if identity_id in (IdentityId.B3_wishart_inv_mean, IdentityId.B6_trinv_times_S):
        return d > q + 3
    return True


def stein_finite_variance(g_id, p, q) -> bool:
    """Whether both sides of the Stein check have finite variance.

    Terms in (ZᵀZ)⁻¹ need p > q + 3; terms in (ZᵀZ)⁻² or (tr (ZᵀZ)⁻¹)²
    need p > q + 7.
    """
    if g_id == "inv_gram":
        return p > q + 3
    if g_id == "inv_gram_sq":
        return p > q + 7
    return True


def cross_finite_variance(p, q) -> bool:
    return p > q + 7


@dataclass
class BatteryResult:
    checks: list
    controls: list

    @property
    def checks_passed(self) -> bool:
        return all(r.passed for r in self.checks)

    @property
    def controls_rejected(self) -> bool:
        return all(r.statistic > NEGATIVE_Z for r in self.controls)

    @property
    def ok(self) -> bool:
        return self.checks_passed and self.controls_rejected


def _exp_n(p):
    return p + 20


def run_battery(name="default", seed=0, reps=None, control_reps=None) -> BatteryResult:
    """Run every check over the parameter battery, plus the negative controls.

    ``default`` uses p ∈ {6, 8, 12}, q ∈ {1, 2, 3}, d ∈ {10, 20} at 10⁵ reps
    (controls at 10⁶). ``quick`` uses the same configurations at 2·10⁴ reps
    with controls at 2·10⁵, which is enough for the controls here but not a
    substitute for the default run.
    """
    if name not in ("default", "quick"):
        raise ValidationError(f"unknown battery {name!r}; use 'default' or 'quick'")
    if reps is None:
        reps = DEFAULT_REPS if name == "default" else 20_000
    if control_reps is None:
        control_reps = CONTROL_REPS if name == "default" else 200_000
    gen = RngStream(seed, 0, DOMAIN_AUXILIARY + 1).generator()
    checks = []
    pq = [(p, q) for p in BATTERY_P for q in BATTERY_Q]

    for p, q in pq:
        Z = well_conditioned(p, q, gen)
        S = default_test_matrix(q, symmetric=True, shift=2)
        A = default_test_matrix(q, symmetric=True, shift=3)
        B = default_test_matrix(q, symmetric=False, shift=4)
        checks.append(check_deriv_inv_gram(Z))
        checks.append(check_deriv_trace(Z, S))
        checks.append(check_divergence_identity(Z, A, B))

    k = 0
    for q in BATTERY_Q:
        Sigma = np.eye(q) + 0.3 * np.ones((q, q))
        for d in BATTERY_DOF:
            for ident in WISHART_IDS:
                if not wishart_finite_variance(ident, d, q):
                    continue
                k += 1
                checks.append(check_wishart_identity(ident, d, scale=Sigma, reps=reps, seed=seed + k))

    for p, q in pq:
        for zb in (np.zeros((p, q)), shifted_mean(p, q)):
            for g_id in STEIN_FUNCTIONS:
                if not stein_finite_variance(g_id, p, q):
                    continue
                k += 1
                checks.append(check_stein(zb, g_id, reps=reps, seed=seed + k))
            if not cross_finite_variance(p, q):
                continue
            k += 1
            checks.append(check_cross_expectation("exp0", p, q, Zbar=zb, reps=reps, seed=seed + k))
            k += 1
            checks.append(check_cross_expectation("exp", p, q, n=_exp_n(p), Zbar=zb, reps=reps,
                                                  seed=seed + k))
    return BatteryResult(checks, negative_controls(seed=seed + 10_000, reps=control_reps))


def negative_controls(seed=0, reps=CONTROL_REPS) -> list:
    """Checks run against a right-hand side scaled by ``PERTURBATION``; each must reach z > 5.

    One per Monte Carlo identity, plus ``exp`` with S replaced by its mean.
    """
    out = []
    p, q, n = 12, 2, 32
    zb = shifted_mean(p, q)
    for i, g_id in enumerate(("linear", "inv_gram", "inv_gram_sq")):
        out.append(check_stein(zb, g_id, reps=reps, seed=seed + i, rhs_scale=PERTURBATION))
    Sigma = np.eye(q) + 0.3 * np.ones((q, q))
    for i, ident in enumerate(WISHART_IDS):
        out.append(check_wishart_identity(ident, 20, scale=Sigma, reps=reps, seed=seed + 10 + i,
                                          rhs_scale=PERTURBATION))
    lead = (PERTURBATION, 1.0, 1.0)
    out.append(check_cross_expectation("exp0", p, q, Zbar=zb, reps=reps, seed=seed + 20, coef_scale=lead))
    out.append(check_cross_expectation("exp", p, q, n=n, Zbar=zb, reps=reps, seed=seed + 21, coef_scale=lead))
    out.append(check_cross_expectation("exp", p, q, n=n, Zbar=zb, reps=reps, seed=seed + 22,
                                       force_mean_s=True))
    for r in out:
        r.config["control"] = "forced_mean_S" if r is out[-1] else "perturbed_rhs"
    return out
