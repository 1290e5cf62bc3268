"""Matrix-variate sampling and the dense linear algebra the estimators share.

Every sampler takes an :class:`RngStream`, so a draw is a pure function of
``(master_seed, stream_index)``. Samplers accept an optional ``size`` that
prepends a batch axis; the Monte Carlo engine relies on this.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CovarianceError, DegreesOfFreedomError, ShapeError, SingularityError

EPS = np.finfo(np.float64).eps

# spawn-key domains, so design draws never collide with replication draws
DOMAIN_REPLICATION = 0
DOMAIN_DESIGN = 1
DOMAIN_AUXILIARY = 2


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(master_seed, stream_index)``.

    Backed by the counter-based Philox generator seeded through
    :class:`numpy.random.SeedSequence`, whose spawn key carries the stream
    index. Distinct keys give independent streams; equal keys give
    bit-identical sequences.
    """

    master_seed: int
    stream_index: int = 0
    domain: int = DOMAIN_REPLICATION

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            int(self.master_seed), spawn_key=(int(self.domain), int(self.stream_index))
        )
        return np.random.Generator(np.random.Philox(seq))


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def as_matrix(a, name="matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} has non-finite entries")
    return arr


def cholesky(a, name="matrix") -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Raises
    ------
    CovarianceError
        If ``a`` is not square, not symmetric to 1e-12 relative, or not
        positive definite.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise CovarianceError(f"{name} must be square, got shape {a.shape}")
    scale = max(np.abs(a).max(), np.finfo(np.float64).tiny)
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise CovarianceError(f"{name} is not symmetric")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise CovarianceError(f"{name} is not positive definite") from exc


def logdet_spd(a, name="matrix") -> float:
    """log det of an SPD matrix through its Cholesky factor."""
    L = cholesky(a, name)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def sample_matrix_normal(mean, row_cov, col_cov, rng, size=None) -> np.ndarray:
    """Draw from N_{r,c}(mean, row_cov, col_cov).

    The draw is ``mean + Lr @ G @ Lc.T`` with ``G`` standard normal and
    ``Lr``, ``Lc`` the Cholesky factors, so ``vec`` of the result has
    covariance ``col_cov ⊗ row_cov``.
    """
    mean = np.asarray(mean, dtype=np.float64)
    if mean.ndim != 2:
        raise ShapeError(f"mean must be 2-D, got shape {mean.shape}")
    r, c = mean.shape
    Lr = cholesky(row_cov, "row_cov")
    Lc = cholesky(col_cov, "col_cov")
    if Lr.shape[0] != r or Lc.shape[0] != c:
        raise ShapeError(
            f"mean is {r}x{c} but covariances are {Lr.shape[0]} and {Lc.shape[0]}"
        )
    gen = _as_generator(rng)
    shape = (r, c) if size is None else (int(size), r, c)
    G = gen.standard_normal(shape)
    return mean + Lr @ G @ Lc.T


def sample_wishart(dof, scale, rng, size=None) -> np.ndarray:
    """Draw S = GᵀG with G ~ N_{dof,q}(O, I, scale), i.e. S ~ W_q(dof, scale)."""
    L = cholesky(scale, "scale")
    q = L.shape[0]
    dof = int(dof)
    if dof < q:
        raise DegreesOfFreedomError(
            f"Wishart dof={dof} is below dimension {q}; draws would be singular"
        )
    gen = _as_generator(rng)
    shape = (dof, q) if size is None else (int(size), dof, q)
    G = gen.standard_normal(shape) @ L.T
    S = np.swapaxes(G, -1, -2) @ G
    return 0.5 * (S + np.swapaxes(S, -1, -2))


def _checked_singular_values(Z) -> np.ndarray:
    Z = as_matrix(Z, "Z")
    s = np.linalg.svd(Z, compute_uv=False)
    tol = max(Z.shape) * EPS * s[0]
    if Z.shape[0] < Z.shape[1] or s[-1] <= tol:
        smin = float(s[-1]) if Z.shape[0] >= Z.shape[1] else 0.0
        raise SingularityError(
            f"matrix of shape {Z.shape} is rank deficient (smallest singular value {smin:.3g})",
            smallest_singular_value=smin,
        )
    return s


def trace_inv_gram(Z) -> float:
    """tr((ZᵀZ)⁻¹) = Σ σᵢ(Z)⁻², from the singular values of Z."""
    s = _checked_singular_values(Z)
    return float(np.sum(s**-2))


def trace_inv_gram_sq(Z) -> float:
    """tr((ZᵀZ)⁻²) = Σ σᵢ(Z)⁻⁴."""
    s = _checked_singular_values(Z)
    return float(np.sum(s**-4))


def inv_gram_traces(Z) -> tuple:
    """Batched (tr((ZᵀZ)⁻¹), tr((ZᵀZ)⁻²)) over the leading axes of ``Z``.

    No rank check; callers in the Monte Carlo path work with draws that are
    almost surely full rank.
    """
    s2 = np.linalg.svd(Z, compute_uv=False) ** -2.0
    return s2.sum(axis=-1), (s2 * s2).sum(axis=-1)


def trace_solve_spd(G, S) -> np.ndarray:
    """Batched tr(G⁻¹ S) for SPD ``G`` via Cholesky solves, no explicit inverse."""
    L = np.linalg.cholesky(G)
    # tr(G^{-1} S) = tr(L^{-T} L^{-1} S); use the solve on S then the transpose
    X = np.linalg.solve(L, S)
    Y = np.linalg.solve(np.swapaxes(L, -1, -2), X)
    return np.trace(Y, axis1=-2, axis2=-1)


def logdet_spd_batch(A) -> np.ndarray:
    L = np.linalg.cholesky(A)
    return 2.0 * np.log(np.diagonal(L, axis1=-2, axis2=-1)).sum(axis=-1)
