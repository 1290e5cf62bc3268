"""Information criteria and loss estimators of the KL discrepancy.

Scalar entry points return :class:`CriterionValue`. The ``*_value`` helpers
further down evaluate the same formulas on stacked arrays and are what the
Monte Carlo engine calls, so both paths share one implementation.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DegreesOfFreedomError, SingularityError, ValidationError
from .matstat import EPS, as_matrix, cholesky, logdet_spd, trace_solve_spd
from .regression import LOG_2PI, LOG_2PIE, FitResult


class CriterionName(str, Enum):
    AIC_KNOWN = "AIC_KNOWN"
    MAIC = "MAIC"
    AIC = "AIC"
    AICC = "AICC"
    MAICC = "MAICC"
    SURE_VEC = "SURE_VEC"
    JOHNSTONE = "JOHNSTONE"
    SURE_MAT = "SURE_MAT"
    MATSUDA = "MATSUDA"
    THM1 = "THM1"


@dataclass(frozen=True)
class ModelDims:
    n: int
    p: int
    q: int

    def __post_init__(self):
        for k in ("n", "p", "q"):
            v = getattr(self, k)
            if int(v) != v or v < 1:
                raise ValidationError(f"{k} must be a positive integer, got {v!r}")
            object.__setattr__(self, k, int(v))
        if self.n < self.p:
            raise ValidationError(f"need n >= p, got n={self.n}, p={self.p}")

    @property
    def dof_margin(self) -> int:
        """n - p - q - 1; AICc needs it positive."""
        return self.n - self.p - self.q - 1

    @classmethod
    def of(cls, fit: FitResult) -> "ModelDims":
        return cls(fit.n, fit.p, fit.q)


@dataclass(frozen=True)
class CriterionValue:
    """A named estimate of the discrepancy and the hypotheses it satisfies.

    ``conditions`` maps a readable hypothesis (``"p >= 2q+3"``) to whether it
    holds at the given dimensions; ``conditions_met`` is their conjunction.
    """

    name: CriterionName
    value: float
    c_used: Optional[float] = None
    conditions: dict = field(default_factory=dict)

    @property
    def conditions_met(self) -> bool:
        return all(self.conditions.values())


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------


def n_params(p, q):
    """pq + q(q+1)/2, the number of free parameters of (B, Sigma)."""
    return p * q + q * (q + 1) / 2


def aic_penalty(n, p, q):
    return 2.0 * n_params(p, q)


def aicc_penalty(n, p, q):
    return 2.0 * n / (n - p - q - 1) * n_params(p, q)


def neg2_loglik(n, q, logdet_sigma_hat):
    """−2 log p(Y | B̂, Σ̂) = nq log(2π) + n log det Σ̂ + nq."""
    return n * q * (LOG_2PI + 1.0) + n * np.asarray(logdet_sigma_hat)


def aic_value(n, p, q, logdet_sigma_hat):
    return neg2_loglik(n, q, logdet_sigma_hat) + aic_penalty(n, p, q)


def aicc_value(n, p, q, logdet_sigma_hat):
    # nq + aicc_penalty == nq(n + p)/(n - p - q - 1), the unbiased form
    return neg2_loglik(n, q, logdet_sigma_hat) + aicc_penalty(n, p, q)


def aic_known_value(n, p, q, logdet_sigma, sigma, residual_gram):
    return (
        n * q * LOG_2PI
        + n * logdet_sigma
        + trace_solve_spd(sigma, residual_gram)
        + 2.0 * p * q
    )


def maic_constant(p, q):
    """2(p - 2q - 2)/q, the fixed coefficient of the known-covariance correction."""
    return 2.0 * (p - 2 * q - 2) / q


def cbar_value(n, p, q):
    dfm = n - p - q - 1
    return (
        4.0 * n * n / ((n - p) * (q * (n - p) + 2.0))
        * (p - 2 * q - 2 - (q * q + q - 2) / dfm)
    )


def thm1_value(p, q, tr_inv_gram):
    return p * q - maic_constant(p, q) * np.asarray(tr_inv_gram)


def johnstone_value(p, sq_norm):
    return p - 2.0 * (p - 4) / np.asarray(sq_norm)


def matsuda_coefficients(p, q):
    i = np.arange(1, q + 1)
    return 4.0 * (p - q - 2 * i - 1) / q


def matsuda_value(p, q, singular_values):
    """``singular_values`` sorted descending along the last axis."""
    s = np.asarray(singular_values)
    return p * q - (matsuda_coefficients(p, q) * s**-2.0).sum(axis=-1)


# ---------------------------------------------------------------------------
# scalar API
# ---------------------------------------------------------------------------


def _require_dof(dims: ModelDims):
    if dims.dof_margin <= 0:
        raise DegreesOfFreedomError(
            f"n - p - q - 1 = {dims.dof_margin} <= 0 (n={dims.n}, p={dims.p}, q={dims.q})"
        )


def _logdet_sigma_hat(fit: FitResult) -> float:
    if fit.n - fit.p < fit.q:
        raise SingularityError(f"SigmaHat is singular: n - p = {fit.n - fit.p} < q = {fit.q}")
    if fit.sigma_hat_singular:
        raise SingularityError("SigmaHat is numerically singular")
    return logdet_spd(fit.SigmaHat, "SigmaHat")


def _fitted_trace(fit: FitResult, S) -> float:
    """tr(S ((XB̂)ᵀ(XB̂))⁻¹), refusing a numerically singular fitted Gram."""
    G = fit.fitted_gram
    ev = np.linalg.eigvalsh(G)
    if ev[0] <= (max(fit.n, fit.q) * EPS) ** 2 * max(ev[-1], 0.0) or ev[0] <= 0:
        raise SingularityError(
            "fitted Gram (XB̂)ᵀ(XB̂) is singular",
            smallest_singular_value=float(np.sqrt(max(ev[0], 0.0))),
        )
    return float(trace_solve_spd(G, S))


def aic_known_sigma(fit: FitResult, sigma) -> CriterionValue:
    """AIC for known Σ: −2 log p(Y | B̂, Σ) + 2pq."""
    sigma = as_matrix(sigma, "Sigma")
    cholesky(sigma, "Sigma")
    v = aic_known_value(
        fit.n, fit.p, fit.q, logdet_spd(sigma, "Sigma"), sigma, fit.residual_gram
    )
    return CriterionValue(CriterionName.AIC_KNOWN, float(v))


def maic(fit: FitResult, sigma, c: Optional[float] = None) -> CriterionValue:
    """Known-Σ AIC minus c·tr(Σ ((XB̂)ᵀ(XB̂))⁻¹), with c = 2(p−2q−2)/q by default.

    The value is returned even when p < 2q + 3; the condition flag records
    that dominance over AIC is then not guaranteed.
    """
    base = aic_known_sigma(fit, sigma)
    c_default = maic_constant(fit.p, fit.q)
    c = c_default if c is None else float(c)
    t = _fitted_trace(fit, as_matrix(sigma, "Sigma"))
    return CriterionValue(
        CriterionName.MAIC,
        base.value - c * t,
        c_used=c,
        conditions={"p >= 2q+3": fit.p >= 2 * fit.q + 3, "c = 2(p-2q-2)/q": c == c_default},
    )


def aic(fit: FitResult, dims: Optional[ModelDims] = None) -> CriterionValue:
    """−2 log p(Y | B̂, Σ̂) + 2(pq + q(q+1)/2).

    The maximized log-likelihood contributes nq log(2π) + n log det Σ̂ + nq;
    the constant nq does not change model rankings but is required for the
    value to be on the scale of the KL discrepancy.
    """
    dims = dims or ModelDims.of(fit)
    v = aic_value(dims.n, dims.p, dims.q, _logdet_sigma_hat(fit))
    return CriterionValue(CriterionName.AIC, float(v))


def aicc(fit: FitResult, dims: Optional[ModelDims] = None) -> CriterionValue:
    """Corrected AIC; exactly unbiased for the expected KL discrepancy.

    Raises
    ------
    DegreesOfFreedomError
        If n - p - q - 1 <= 0.
    """
    dims = dims or ModelDims.of(fit)
    _require_dof(dims)
    v = aicc_value(dims.n, dims.p, dims.q, _logdet_sigma_hat(fit))
    return CriterionValue(CriterionName.AICC, float(v), conditions={"n-p-q-1 > 0": True})


def cbar(dims: ModelDims) -> float:
    """Upper bound on the MAICc constant that still guarantees dominance of AICc.

    May be zero or negative, in which case no c > 0 is covered.
    """
    _require_dof(dims)
    return float(cbar_value(dims.n, dims.p, dims.q))


def maicc(fit: FitResult, dims: Optional[ModelDims] = None, c: Optional[float] = None) -> CriterionValue:
    """AICc − c·tr(Σ̂ ((XB̂)ᵀ(XB̂))⁻¹); ``c`` defaults to :func:`cbar`."""
    dims = dims or ModelDims.of(fit)
    base = aicc(fit, dims)
    cb = cbar(dims)
    c = cb if c is None else float(c)
    t = _fitted_trace(fit, fit.SigmaHat)
    return CriterionValue(
        CriterionName.MAICC,
        base.value - c * t,
        c_used=c,
        conditions={"n-p-q-1 > 0": True, "cbar > 0": cb > 0, "0 < c <= cbar": 0 < c <= cb},
    )


def sure_vec(y, g: Callable, div_g: Optional[Callable] = None) -> float:
    """Stein's unbiased risk estimate p + 2∇·g(y) + ‖g(y)‖² for ŷ = y + g(y).

    Without ``div_g`` the divergence is taken by central differences with
    step ε^{1/3}(1 + |yᵢ|).
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    gy = np.asarray(g(y), dtype=np.float64).ravel()
    if gy.shape != y.shape:
        raise ValidationError(f"g(y) has shape {gy.shape}, expected {y.shape}")
    if div_g is not None:
        div = float(div_g(y))
    else:
        div = 0.0
        for i in range(y.size):
            h = EPS ** (1 / 3) * (1.0 + abs(y[i]))
            e = np.zeros_like(y)
            e[i] = h
            gp = np.asarray(g(y + e), dtype=np.float64).ravel()[i]
            gm = np.asarray(g(y - e), dtype=np.float64).ravel()[i]
            div += (gp - gm) / (2 * h)
    return float(y.size + 2.0 * div + gy @ gy)


def johnstone(y) -> CriterionValue:
    """p − 2(p − 4)‖y‖⁻², improving on SURE = p for the MLE when p >= 5."""
    y = np.asarray(y, dtype=np.float64).ravel()
    p = y.size
    ss = float(y @ y)
    if ss == 0.0:
        raise SingularityError("johnstone estimator undefined at y = 0", 0.0)
    return CriterionValue(
        CriterionName.JOHNSTONE, float(johnstone_value(p, ss)), conditions={"p >= 5": p >= 5}
    )


def _mean_matrix(Y):
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    return as_matrix(Y, "Y")


def _full_rank_singular_values(Y):
    s = np.linalg.svd(Y, compute_uv=False)
    if Y.shape[0] < Y.shape[1] or s[-1] <= max(Y.shape) * EPS * s[0]:
        smin = float(s[-1]) if Y.shape[0] >= Y.shape[1] else 0.0
        raise SingularityError(f"Y of shape {Y.shape} is rank deficient", smin)
    return s


def matsuda(Y) -> CriterionValue:
    """pq − Σᵢ cᵢ σᵢ(Y)⁻², cᵢ = 4(p − q − 2i − 1)/q, σ sorted descending.

    Ties among singular values are harmless: the sum is evaluated at the
    sorted values, which is well defined.
    """
    Y = _mean_matrix(Y)
    p, q = Y.shape
    s = _full_rank_singular_values(Y)
    return CriterionValue(
        CriterionName.MATSUDA,
        float(matsuda_value(p, q, s)),
        conditions={"p >= 3q+2": p >= 3 * q + 2, "q >= 2": q >= 2},
    )


def thm1_estimator(Y) -> CriterionValue:
    """pq − (2(p − 2q − 2)/q)·tr((YᵀY)⁻¹); equals :func:`johnstone` when q = 1."""
    Y = _mean_matrix(Y)
    p, q = Y.shape
    s = _full_rank_singular_values(Y)
    return CriterionValue(
        CriterionName.THM1,
        float(thm1_value(p, q, np.sum(s**-2.0))),
        conditions={"p >= 2q+3": p >= 2 * q + 3},
    )


def sure_mat_regression(fit: FitResult, sigma) -> float:
    """SURE for M̂ = XB̂ under the Mahalanobis loss: tr(Σ⁻¹R) + (2p − n)q."""
    sigma = as_matrix(sigma, "Sigma")
    cholesky(sigma, "Sigma")
    return float(trace_solve_spd(sigma, fit.residual_gram) + (2 * fit.p - fit.n) * fit.q)


def all_criteria(fit: FitResult, sigma=None) -> list:
    """Every regression criterion applicable to ``fit``.

    Criteria whose preconditions fail are skipped; callers that need the
    reason should call the individual functions.
    """
    out = []
    funcs = [aic, aicc, maicc]
    for f in funcs:
        try:
            out.append(f(fit))
        except (DegreesOfFreedomError, SingularityError):
            pass
    if sigma is not None:
        out.append(aic_known_sigma(fit, sigma))
        try:
            out.append(maic(fit, sigma))
        except SingularityError:
            pass
    return out


__all__ = [
    "CriterionName",
    "CriterionValue",
    "ModelDims",
    "LOG_2PIE",
    "aic",
    "aic_known_sigma",
    "aicc",
    "all_criteria",
    "cbar",
    "johnstone",
    "maic",
    "maicc",
    "matsuda",
    "sure_mat_regression",
    "sure_vec",
    "thm1_estimator",
]
