"""Multivariate linear regression: data generation, ML fitting, KL discrepancy.

The model is ``Y = X B + E`` with the rows of ``E`` i.i.d. ``N_q(0, Sigma)``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ShapeError, SingularityError, ValidationError
from .matstat import (
    EPS,
    as_matrix,
    cholesky,
    logdet_spd,
    logdet_spd_batch,
    trace_solve_spd,
)

LOG_2PI = float(np.log(2.0 * np.pi))
LOG_2PIE = LOG_2PI + 1.0


@dataclass(frozen=True)
class RegressionTruth:
    """Ground truth (X, B, Sigma) of the data-generating process."""

    X: np.ndarray
    B: np.ndarray
    Sigma: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        B = as_matrix(self.B, "B")
        Sigma = as_matrix(self.Sigma, "Sigma")
        if B.shape[0] != X.shape[1]:
            raise ShapeError(f"B has {B.shape[0]} rows but X has {X.shape[1]} columns")
        if Sigma.shape != (B.shape[1], B.shape[1]):
            raise ShapeError(f"Sigma must be {B.shape[1]}x{B.shape[1]}, got {Sigma.shape}")
        if X.shape[0] < X.shape[1]:
            raise ValidationError(f"need n >= p, got n={X.shape[0]}, p={X.shape[1]}")
        _check_design_rank(X)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Sigma", Sigma)
        object.__setattr__(self, "chol", cholesky(Sigma, "Sigma"))

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def q(self):
        return self.B.shape[1]


@dataclass(frozen=True)
class FitResult:
    """Maximum likelihood estimates plus the Gram matrices the criteria reuse.

    ``residual_gram`` is (Y - X B̂)ᵀ(Y - X B̂) and ``fitted_gram`` is
    (X B̂)ᵀ(X B̂); ``SigmaHat`` is ``residual_gram / n``.
    """

    Bhat: np.ndarray
    SigmaHat: np.ndarray
    residual_gram: np.ndarray
    fitted_gram: np.ndarray
    n: int
    p: int
    q: int

    @property
    def sigma_hat_singular(self) -> bool:
        """True when Σ̂ is numerically singular (always so when n - p < q).

        The residual Gram is compared with the total sum of squares
        ‖Y‖² = tr(R) + tr(G), so an exact fit whose residuals are pure
        rounding noise counts as singular.
        """
        if self.n - self.p < self.q:
            return True
        ev = np.linalg.eigvalsh(self.residual_gram)
        scale = np.trace(self.residual_gram)
        if self.fitted_gram is not None:
            scale += np.trace(self.fitted_gram)
        return bool(ev[0] <= max(self.n, self.q) * EPS * scale)


def _check_design_rank(X):
    s = np.linalg.svd(X, compute_uv=False)
    if s[-1] <= max(X.shape) * EPS * s[0]:
        raise SingularityError(
            f"design matrix is rank deficient (smallest singular value {s[-1]:.3g})",
            smallest_singular_value=float(s[-1]),
        )


def generate_response(truth: RegressionTruth, rng) -> np.ndarray:
    """Draw Y = X B + E with E ~ N_{n,q}(O, I_n, Sigma)."""
    gen = rng.generator() if hasattr(rng, "generator") else rng
    E = gen.standard_normal((truth.n, truth.q)) @ truth.chol.T
    return truth.X @ truth.B + E


def fit_mle(X, Y) -> FitResult:
    """ML fit through the thin QR factorization of X (no explicit inverse)."""
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    n, p = X.shape
    if Y.shape[0] != n:
        raise ShapeError(f"Y has {Y.shape[0]} rows but X has {n}")
    if n < p:
        raise ValidationError(f"need n >= p, got n={n}, p={p}")
    Q, R = np.linalg.qr(X)
    rdiag = np.abs(np.diag(R))
    if rdiag.min() <= max(n, p) * EPS * rdiag.max():
        _check_design_rank(X)
    QtY = Q.T @ Y
    Bhat = solve_triangular(R, QtY, lower=False)
    resid = Y - Q @ QtY
    residual_gram = resid.T @ resid
    residual_gram = 0.5 * (residual_gram + residual_gram.T)
    fitted_gram = QtY.T @ QtY
    fitted_gram = 0.5 * (fitted_gram + fitted_gram.T)
    return FitResult(
        Bhat=Bhat,
        SigmaHat=residual_gram / n,
        residual_gram=residual_gram,
        fitted_gram=fitted_gram,
        n=n,
        p=p,
        q=Y.shape[1],
    )


def kl_value(n, q, sigma_hat, sigma, error_gram, logdet_sigma_hat=None):
    """Closed-form KL discrepancy on arrays (leading batch axes allowed).

    ``error_gram`` is (B̂ - B)ᵀ XᵀX (B̂ - B). Inputs are assumed valid.
    """
    if logdet_sigma_hat is None:
        logdet_sigma_hat = logdet_spd_batch(sigma_hat)
    sigma = np.broadcast_to(sigma, np.shape(sigma_hat))
    return (
        n * q * LOG_2PI
        + n * logdet_sigma_hat
        + n * trace_solve_spd(sigma_hat, sigma)
        + trace_solve_spd(sigma_hat, error_gram)
    )


def kl_known_sigma_value(n, q, logdet_sigma, sigma, error_gram):
    return n * q * LOG_2PIE + n * logdet_sigma + trace_solve_spd(sigma, error_gram)


def _error_gram(X, Bhat, B):
    D = X @ (np.asarray(Bhat, dtype=np.float64) - B)
    return D.T @ D


def kl_discrepancy(truth: RegressionTruth, fit: FitResult) -> float:
    """d((B, Σ), (B̂, Σ̂)) = −2 E_truth[log p(Ỹ | B̂, Σ̂)] in closed form.

    Raises
    ------
    SingularityError
        If Σ̂ is singular.
    """
    if fit.sigma_hat_singular:
        raise SingularityError("SigmaHat is singular")
    logdet = logdet_spd(fit.SigmaHat, "SigmaHat")
    eg = _error_gram(truth.X, fit.Bhat, truth.B)
    return float(kl_value(truth.n, truth.q, fit.SigmaHat, truth.Sigma, eg, logdet))


def kl_discrepancy_known_sigma(truth: RegressionTruth, Bhat) -> float:
    """KL discrepancy of the plug-in N(X B̂, Σ) when Σ is known."""
    eg = _error_gram(truth.X, Bhat, truth.B)
    return float(
        kl_known_sigma_value(
            truth.n, truth.q, logdet_spd(truth.Sigma, "Sigma"), truth.Sigma, eg
        )
    )


def coefficients_from_singular_values(p, q, singular_values) -> np.ndarray:
    """p×q matrix U diag(σ) Vᵀ with U, V the leading identity columns.

    Missing trailing singular values are zero, so ``[5.0]`` with q=2 gives a
    rank-one B with σ₁(B)=5.
    """
    sv = np.zeros(q)
    given = np.atleast_1d(np.asarray(singular_values, dtype=np.float64))
    if given.size > q or p < q:
        raise ShapeError(f"at most min(p, q)={min(p, q)} singular values, got {given.size}")
    if np.any(given < 0):
        raise ValidationError("singular values must be non-negative")
    sv[: given.size] = given
    B = np.zeros((p, q))
    B[np.arange(q), np.arange(q)] = sv
    return B


def read_matrix_csv(path, header=False) -> np.ndarray:
    """Read a numeric CSV into an (rows, cols) array; one optional header row."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return as_matrix(data, str(path))
