import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maicc.criteria import (
    CriterionName,
    ModelDims,
    aic,
    aic_known_sigma,
    aicc,
    all_criteria,
    cbar,
    cbar_value,
    johnstone,
    maic,
    maicc,
    matsuda,
    sure_mat_regression,
    sure_vec,
    thm1_estimator,
)
from maicc.errors import DegreesOfFreedomError, SingularityError, ValidationError
from maicc.regression import LOG_2PI, LOG_2PIE, FitResult, fit_mle

L2P = np.log(2 * np.pi)


def synthetic_fit(n, p, q, sigma_hat=None, fitted_gram=None):
    """FitResult with prescribed Σ̂ and fitted Gram, for formula checks."""
    S = np.eye(q) if sigma_hat is None else np.asarray(sigma_hat, float)
    G = np.eye(q) if fitted_gram is None else np.asarray(fitted_gram, float)
    return FitResult(np.zeros((p, q)), S, n * S, G, n, p, q)


def random_fit(gen, n=30, p=10, q=2, scale=1.0):
    X = gen.standard_normal((n, p))
    B = gen.standard_normal((p, q))
    return fit_mle(X, X @ B + scale * gen.standard_normal((n, q)))


def zero_residual_fit(gen, n, p, q):
    X = gen.standard_normal((n, p))
    return fit_mle(X, X @ gen.standard_normal((p, q)))


# known covariance --------------------------------------------------------


def test_aic_known_zero_residual(gen):
    f = zero_residual_fit(gen, 20, 5, 2)
    v = aic_known_sigma(f, np.eye(2)).value
    assert v == pytest.approx(40 * L2P + 20, abs=1e-9)
    assert v == pytest.approx(93.515, abs=5e-4)


def test_maic_unit_fitted_singular_values():
    f = synthetic_fit(20, 7, 2)
    cv = maic(f, np.eye(2))
    base = aic_known_sigma(f, np.eye(2)).value
    assert cv.value == pytest.approx(base - 2.0, rel=1e-14)
    assert cv.c_used == pytest.approx(1.0)
    assert cv.conditions_met


def test_maic_boundary_coefficient_zero():
    f = synthetic_fit(20, 6, 2)
    cv = maic(f, np.eye(2))
    assert cv.value == aic_known_sigma(f, np.eye(2)).value
    assert not cv.conditions_met


def test_maic_correction_positive(gen):
    f = random_fit(gen, p=8, q=2)
    S = np.array([[1.0, 0.2], [0.2, 2.0]])
    assert maic(f, S).value < aic_known_sigma(f, S).value


def test_maic_singular_fitted_gram():
    f = synthetic_fit(20, 7, 2, fitted_gram=np.diag([1.0, 0.0]))
    with pytest.raises(SingularityError):
        maic(f, np.eye(2))


def test_sure_mat_regression_zero_residual(gen):
    f = zero_residual_fit(gen, 20, 5, 2)
    assert sure_mat_regression(f, np.eye(2)) == pytest.approx(-20.0, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sure_mat_is_shifted_aic(seed):
    gen = np.random.default_rng(seed)
    f = random_fit(gen, n=15, p=4, q=2)
    A = gen.standard_normal((2, 2))
    S = A @ A.T + 0.5 * np.eye(2)
    lhs = sure_mat_regression(f, S) + 15 * 2 * LOG_2PIE + 15 * np.linalg.slogdet(S)[1]
    assert lhs == pytest.approx(aic_known_sigma(f, S).value, abs=1e-10 * max(1.0, abs(lhs)))


# unknown covariance ------------------------------------------------------


def test_aic_unit_determinant():
    # −2 log-likelihood carries nq on top of nq log 2π + n log det Σ̂
    v = aic(synthetic_fit(20, 5, 2)).value
    assert v == pytest.approx(40 * L2P + 40 + 26, rel=1e-14)
    assert v == pytest.approx(139.515, abs=5e-4)


def test_aic_single_response_reduction(gen):
    f = random_fit(gen, n=25, p=4, q=1)
    s2 = f.SigmaHat[0, 0]
    assert aic(f).value == pytest.approx(25 * np.log(2 * np.pi * s2) + 25 + 2 * (4 + 1), rel=1e-12)


def test_aicc_unit_determinant():
    v = aicc(synthetic_fit(30, 10, 1)).value
    assert v == pytest.approx(30 * L2P + 30 + 60 / 18 * 11, rel=1e-14)
    assert v == pytest.approx(121.803, abs=5e-4)


def test_aicc_unbiased_form():
    # nq + penalty equals nq(n+p)/(n-p-q-1)
    n, p, q = 30, 10, 2
    v = aicc(synthetic_fit(n, p, q)).value
    assert v == pytest.approx(n * q * L2P + n * q * (n + p) / (n - p - q - 1), rel=1e-14)


def test_aicc_dof_error():
    with pytest.raises(DegreesOfFreedomError):
        aicc(synthetic_fit(13, 10, 2))


def test_aicc_singular_sigma_hat(gen):
    with pytest.raises(SingularityError):
        aic(zero_residual_fit(gen, 20, 5, 2))


def test_aicc_minus_aic_formula():
    for n, p, q in [(30, 10, 1), (20, 5, 2), (100, 3, 3)]:
        f = synthetic_fit(n, p, q)
        k = p * q + q * (q + 1) / 2
        gap = aicc(f).value - aic(f).value
        assert gap == pytest.approx(2 * k * (n / (n - p - q - 1) - 1), rel=1e-12)
        assert gap > 0


def test_aicc_minus_aic_constant_across_fits(gen):
    gaps = np.array([aicc(f).value - aic(f).value for f in (random_fit(gen, scale=10 ** gen.uniform(-2, 2)) for _ in range(100))])
    # the gap is a function of (n, p, q) only; floating point leaves ulp-level residue
    assert np.ptp(gaps) <= 1e-12 * np.abs(gaps).max() * 100


def test_aicc_gap_vanishes_for_large_n():
    gaps = [aicc(synthetic_fit(n, 3, 2)).value - aic(synthetic_fit(n, 3, 2)).value for n in (10, 100, 10_000, 1_000_000)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    n, k = 1_000_000, 3 * 2 + 3
    # both values are ~4e6, so the difference keeps only ~1e-9 absolute accuracy
    assert gaps[-1] == pytest.approx(2 * k * 6 / (n - 6), rel=1e-3)


def test_cbar_examples():
    assert cbar(ModelDims(30, 10, 1)) == pytest.approx(540 / 11, rel=1e-14)
    assert cbar(ModelDims(30, 10, 2)) == pytest.approx(1920 / 119, rel=1e-14)
    assert cbar_value(10**6, 6, 2) < 0
    with pytest.raises(DegreesOfFreedomError):
        cbar(ModelDims(13, 10, 2))


def test_cbar_single_response_matches_closed_form():
    for n in range(8, 101):
        for p in range(5, min(21, n - 2)):
            ref = 4 * n * n * (p - 4) / ((n - p) * (n - p + 2))
            assert cbar_value(n, p, 1) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_maicc_zero_constant_equals_aicc(gen):
    f = random_fit(gen)
    assert maicc(f, c=0.0).value == aicc(f).value
    assert not maicc(f, c=0.0).conditions_met


def test_maicc_unit_trace():
    f = synthetic_fit(30, 10, 2, sigma_hat=np.eye(2), fitted_gram=2 * np.eye(2))
    cv = maicc(f)
    assert cv.value == pytest.approx(aicc(f).value - 1920 / 119, rel=1e-14)
    assert cv.c_used == pytest.approx(16.1345, abs=1e-4)
    assert cv.conditions == {"n-p-q-1 > 0": True, "cbar > 0": True, "0 < c <= cbar": True}
    assert not maicc(f, c=2 * cv.c_used).conditions_met


def test_maicc_flags_negative_cbar():
    cv = maicc(synthetic_fit(20, 1, 1))
    assert cv.c_used < 0
    assert not cv.conditions["cbar > 0"]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_maicc_never_exceeds_aicc(seed, c):
    f = random_fit(np.random.default_rng(seed), n=25, p=6, q=2)
    assert maicc(f, c=c).value <= aicc(f).value


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_scale_equivariance_single_response(seed, alpha):
    gen = np.random.default_rng(seed)
    X = gen.standard_normal((20, 5))
    Y = X @ gen.standard_normal((5, 1)) + gen.standard_normal((20, 1))
    f1, f2 = fit_mle(X, Y), fit_mle(X, alpha * Y)
    shift = 20 * np.log(alpha**2)
    assert aic(f2).value - aic(f1).value == pytest.approx(shift, abs=1e-9 * max(1, abs(shift)))
    assert aicc(f2).value - aicc(f1).value == pytest.approx(shift, abs=1e-9 * max(1, abs(shift)))
    corr1 = aicc(f1).value - maicc(f1).value
    corr2 = aicc(f2).value - maicc(f2).value
    assert corr2 == pytest.approx(corr1, rel=1e-8)


def test_all_criteria_skips_unavailable():
    names = [c.name for c in all_criteria(synthetic_fit(13, 10, 2))]
    assert names == [CriterionName.AIC]
    names = [c.name for c in all_criteria(synthetic_fit(30, 10, 2), sigma=np.eye(2))]
    assert names == [CriterionName.AIC, CriterionName.AICC, CriterionName.MAICC,
                     CriterionName.AIC_KNOWN, CriterionName.MAIC]


# normal mean -------------------------------------------------------------


def test_sure_vec_mle():
    assert sure_vec(np.arange(6.0), lambda y: np.zeros_like(y)) == 6.0


def test_sure_vec_zero_estimator():
    y = np.array([1.0, -2.0, 0.5])
    expected = y @ y - 3
    assert sure_vec(y, lambda v: -v, lambda v: -3.0) == pytest.approx(expected, rel=1e-14)
    assert sure_vec(y, lambda v: -v) == pytest.approx(expected, rel=1e-9)


def test_sure_vec_finite_difference_divergence(gen):
    y = gen.standard_normal(7) + 1.0

    def g(v):
        return -(7 - 2) * v / (v @ v)

    def div(v):
        return -(7 - 2) * (7 - 2) / (v @ v)

    assert sure_vec(y, g) == pytest.approx(sure_vec(y, g, div), rel=1e-8)


def test_sure_vec_unbiased_for_james_stein():
    p, reps = 6, 40_000
    gen = np.random.default_rng(5)
    theta = np.linspace(-1, 1, p)
    est, loss = np.empty(reps), np.empty(reps)

    def g(v):
        return -(p - 2) * v / (v @ v)

    def div(v):
        return -(p - 2) ** 2 / (v @ v)

    for i in range(reps):
        y = theta + gen.standard_normal(p)
        est[i] = sure_vec(y, g, div)
        loss[i] = np.sum((y + g(y) - theta) ** 2)
    d = est - loss
    assert abs(d.mean()) < 3 * d.std(ddof=1) / np.sqrt(reps)


def test_sure_vec_shape_check():
    with pytest.raises(ValidationError):
        sure_vec(np.ones(3), lambda v: np.ones(4))


def test_johnstone_examples():
    y = np.array([2.0, 0, 0, 0, 0, 0, 0, 0])
    assert johnstone(y).value == pytest.approx(6.0, rel=1e-15)
    assert johnstone(y).conditions_met
    cv = johnstone(np.array([1.0, 2.0, 3.0, 4.0]))
    assert cv.value == 4.0
    assert not cv.conditions_met
    with pytest.raises(SingularityError):
        johnstone(np.zeros(8))


def test_matsuda_examples():
    Y = np.zeros((8, 2))
    Y[0, 0], Y[1, 1] = 2.0, 1.0
    cv = matsuda(Y)
    assert cv.value == pytest.approx(12.5, rel=1e-14)
    assert cv.conditions_met
    Y = np.zeros((8, 2))
    Y[0, 0] = Y[1, 1] = 1e8
    assert matsuda(Y).value == pytest.approx(16.0, abs=1e-12)
    with pytest.raises(SingularityError):
        matsuda(np.ones((8, 2)))


def test_matsuda_ties_are_well_defined(gen):
    Q, _ = np.linalg.qr(gen.standard_normal((8, 2)))
    v = matsuda(3.0 * Q).value
    assert v == pytest.approx(16 - (6 + 2) / 9, rel=1e-12)


def test_thm1_example():
    Y = np.zeros((7, 2))
    Y[0, 0] = Y[1, 1] = 1.0
    cv = thm1_estimator(Y)
    assert cv.value == pytest.approx(12.0, rel=1e-14)
    assert cv.conditions_met
    with pytest.raises(SingularityError):
        thm1_estimator(np.ones((7, 2)))


def test_thm1_reduces_to_johnstone():
    gen = np.random.default_rng(8)
    for _ in range(100):
        p = int(gen.integers(3, 20))
        y = gen.standard_normal(p) * 10 ** gen.uniform(-2, 2)
        a = thm1_estimator(y[:, None]).value
        b = johnstone(y).value
        assert a == pytest.approx(b, rel=1e-12)
