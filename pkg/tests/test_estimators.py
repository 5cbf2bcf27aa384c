import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from bvbounds.estimators import (
    ArityError,
    Identity,
    JamesStein,
    KernelSmoother,
    LinearShrinkage,
    OracleFunction,
    PppMin,
    Projected,
    QuadFunctionalThreshold,
    SoftThreshold,
    SupportViolationError,
    UnbiasedQuadratic,
    Zero,
    apply,
    compact_basis,
    draw_estimates,
    exact_functional_threshold_moments,
    exact_soft_threshold_moments,
    haar_rotations,
    l2_project_to_sequence,
    mc_moments,
    moments_from_draws,
    positive_part_chi2_mean,
    soft_threshold_var0,
    soft_threshold_var0_bound,
    spherical_symmetrize,
)
from bvbounds.models import (
    GridFunction,
    GwnDiscrete,
    IsoNormal,
    ParameterDomainError,
    ParamVector,
    PppBoundary,
    RngStream,
)

N = IsoNormal(1.0)


def test_apply_examples():
    assert np.allclose(apply(SoftThreshold(1.0), [2.0, -0.5, -3.0]), [[1.0, 0.0, -2.0]])
    x = np.zeros(10)
    x[:3] = [2.0, 2.0, 2.0]  # sum of squares 12
    assert apply(UnbiasedQuadratic(), x)[0] == pytest.approx(2.0)
    assert np.allclose(apply(JamesStein(1.0), [2.0, 0.0, 0.0, 0.0]), [[1.0, 0.0, 0.0, 0.0]])
    assert np.allclose(apply(JamesStein(1.0), np.zeros(4)), 0.0)
    assert np.allclose(apply(LinearShrinkage(0.5), [2.0, -4.0]), [[1.0, -2.0]])
    assert np.allclose(apply(Zero(), [3.0, 1.0]), 0.0)


def test_spec_validation():
    with pytest.raises(ParameterDomainError):
        SoftThreshold(-1.0)
    with pytest.raises(ParameterDomainError):
        LinearShrinkage(1.5)
    with pytest.raises(ParameterDomainError):
        KernelSmoother(0.6, 0.5)
    with pytest.raises(ParameterDomainError):
        QuadFunctionalThreshold(-0.1)
    with pytest.raises(ArityError):
        apply(JamesStein(), [1.0, 2.0])
    with pytest.raises(ArityError):
        spherical_symmetrize(UnbiasedQuadratic(), 4, RngStream(0), 3)


def test_soft_threshold_exact_values():
    b, v = exact_soft_threshold_moments(2.0, [0.0, 10.0, 1.5])
    assert b[0] == pytest.approx(0.0, abs=1e-15)
    assert v[0] == pytest.approx(0.0115374534290399, abs=1e-13)
    assert soft_threshold_var0(2.0) == pytest.approx(0.0115374534290399, abs=1e-13)
    assert soft_threshold_var0_bound(2.0, corrected=False) == pytest.approx(0.0134977416282970, abs=1e-13)
    assert b[1] == pytest.approx(-2.0, abs=1e-12)
    assert v[1] == pytest.approx(1.0, abs=1e-12)
    b, v = exact_soft_threshold_moments(1.5, [1.0])
    assert b[0] == pytest.approx(-0.804207579777822, abs=1e-12)
    assert v[0] == pytest.approx(0.172503910586832, abs=1e-12)


def test_soft_threshold_zero_level_is_identity():
    b, v = exact_soft_threshold_moments(0.0, [0.0, -1.3, 4.0])
    assert np.allclose(b, 0.0, atol=1e-12)
    assert np.allclose(v, 1.0, atol=1e-12)


def _quad_moments(f, t, T):
    # f vanishes on [-T, T]; integrate the two tails separately so quad sees no kink
    pdf = lambda x: stats.norm.pdf(x, t)
    tails = [(-np.inf, -T), (T, np.inf)]
    m1 = sum(integrate.quad(lambda x: f(x) * pdf(x), a, b, epsabs=1e-13)[0] for a, b in tails)
    m2 = sum(integrate.quad(lambda x: f(x) ** 2 * pdf(x), a, b, epsabs=1e-13)[0] for a, b in tails)
    return m1, m2 - m1 * m1


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(-6.0, 6.0))
def test_soft_threshold_moments_match_quadrature(T, theta):
    b, v = exact_soft_threshold_moments(T, [theta])
    m, var = _quad_moments(lambda x: math.copysign(max(abs(x) - T, 0.0), x), theta, T)
    assert b[0] == pytest.approx(m - theta, abs=1e-8)
    assert v[0] == pytest.approx(var, abs=1e-8)
    assert v[0] <= 4.0
    assert -T - 1e-12 <= b[0] * math.copysign(1.0, theta) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 8.0))
def test_soft_threshold_var0_bound_holds(T):
    assert soft_threshold_var0(T) <= soft_threshold_var0_bound(T)


def test_uncorrected_var0_constant_fails_for_large_threshold():
    # var0 ~ 4 phi(T) / T^3, twice the c = 1 expression
    assert soft_threshold_var0(2.0) <= soft_threshold_var0_bound(2.0, corrected=False)
    assert soft_threshold_var0(3.0) > soft_threshold_var0_bound(3.0, corrected=False)
    assert soft_threshold_var0(12.0) / soft_threshold_var0_bound(12.0) == pytest.approx(1.0, abs=0.05)


def test_functional_threshold_values():
    u = 2 * math.log(400 / 4) * 1.0
    assert u == pytest.approx(9.210340371976182)
    u = math.log(400 / 4)
    assert u == pytest.approx(4.605170185988091)
    assert positive_part_chi2_mean(u) == pytest.approx(0.0563060312916692, abs=1e-13)
    b, v = exact_functional_threshold_moments(u, [0.0])
    assert b[0] == pytest.approx(0.0, abs=1e-13)
    assert v[0] == pytest.approx(0.200034816226498, abs=1e-12)
    b, v = exact_functional_threshold_moments(2.0, [1.3])
    assert positive_part_chi2_mean(2.0) == pytest.approx(0.257808290370310, abs=1e-13)
    assert b[0] == pytest.approx(-0.554967408128591, abs=1e-11)
    assert v[0] == pytest.approx(6.19014782940216, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(-5.0, 5.0))
def test_functional_threshold_moments_match_quadrature(u, theta):
    c = positive_part_chi2_mean(u)
    f = lambda x: max(x * x - u, 0.0) - c
    pdf = lambda x: stats.norm.pdf(x, theta)
    r = math.sqrt(u)
    m1 = sum(integrate.quad(lambda x: f(x) * pdf(x), a, b, epsabs=1e-12)[0] for a, b in [(-np.inf, -r), (r, np.inf)]) - c * (
        stats.norm.cdf(r, theta) - stats.norm.cdf(-r, theta)
    )
    m2 = sum(integrate.quad(lambda x: f(x) ** 2 * pdf(x), a, b, epsabs=1e-12)[0] for a, b in [(-np.inf, -r), (r, np.inf)]) + c * c * (
        stats.norm.cdf(r, theta) - stats.norm.cdf(-r, theta)
    )
    b, v = exact_functional_threshold_moments(u, [theta])
    assert b[0] == pytest.approx(m1 - theta * theta, abs=1e-7)
    assert v[0] == pytest.approx(m2 - m1 * m1, abs=1e-7, rel=1e-8)


def test_soft_threshold_mc_agrees_with_exact():
    theta = np.array([0.0, 0.0, 3.0, -1.0, 0.0])
    me = mc_moments(SoftThreshold(1.2), N, ParamVector(theta), 200_000, RngStream(31))
    b, v = exact_soft_threshold_moments(1.2, theta)
    assert np.all(np.abs(me.bias - b) < 3.5 * me.bias_se)
    assert me.var_sum == pytest.approx(v.sum(), abs=3.5 * me.var_sum_se)


def test_unbiased_quadratic_variance():
    me = mc_moments(UnbiasedQuadratic(), N, ParamVector(np.zeros(10)), 1_000_000, RngStream(32), target=0.0)
    assert abs(me.bias[0]) < 3 * me.bias_se[0]
    assert me.var_sum == pytest.approx(20.0, abs=4 * me.var_sum_se)


def test_james_stein_risk_at_origin():
    me = mc_moments(JamesStein(1.0), N, ParamVector(np.zeros(8)), 200_000, RngStream(33))
    assert me.mse <= 2.0 + 3 * me.mse_se


def test_bias_variance_decomposition():
    for spec, theta in [
        (SoftThreshold(1.0), [0.0, 2.0, -0.5]),
        (JamesStein(1.0), [1.0, 0.0, 0.0, 1.0]),
        (LinearShrinkage(0.7), [1.0, -2.0]),
    ]:
        me = mc_moments(spec, N, ParamVector(theta), 100_000, RngStream(34))
        se = math.sqrt(me.mse_se**2 + me.sq_bias_se**2 + me.var_sum_se**2)
        assert me.mse == pytest.approx(me.sq_bias_norm + me.var_sum, abs=3 * se)


def test_standard_errors_scale_with_replications():
    p = ParamVector([0.5, 0.0, -1.0])
    a = mc_moments(SoftThreshold(1.0), N, p, 40_000, RngStream(35))
    b = mc_moments(SoftThreshold(1.0), N, p, 160_000, RngStream(36))
    assert np.allclose(a.bias_se / b.bias_se, 2.0, rtol=0.05)
    assert a.var_sum_se / b.var_sum_se == pytest.approx(2.0, rel=0.1)


def test_mc_moments_reproducible_and_needs_enough_reps():
    p = ParamVector([0.5, 0.0, -1.0])
    a = mc_moments(JamesStein(), N, p, 5000, RngStream(7))
    b = mc_moments(JamesStein(), N, p, 5000, RngStream(7))
    assert a.to_dict() == b.to_dict()
    with pytest.raises(ValueError):
        mc_moments(JamesStein(), N, p, 999, RngStream(7))


def test_chunking_does_not_change_draws():
    p = ParamVector([0.5, 0.0, -1.0])
    a = draw_estimates(Identity(), N, p, 3000, RngStream(8), chunk=1000)
    b = draw_estimates(Identity(), N, p, 3000, RngStream(8), chunk=1000)
    assert np.array_equal(a, b)


def test_moments_from_draws_exact_small_case():
    x = np.array([[1.0, 0.0], [3.0, 2.0]])
    me = moments_from_draws(x, [0.0, 0.0])
    assert np.allclose(me.mean, [2.0, 1.0])
    assert np.allclose(me.variances, [2.0, 2.0])
    assert me.mse == pytest.approx((1 + 9 + 4) / 2)


def test_kernel_smoother_exact_moments():
    model = GwnDiscrete(1000, 100.0)
    ks = KernelSmoother(0.05, 0.5)
    assert ks.exact_variance(model) == pytest.approx(0.1, rel=1e-12)
    f = GridFunction.from_callable(lambda x: x * x, 1000)
    me = mc_moments(ks, model, f, 100_000, RngStream(37), target=0.25)
    assert abs(me.mean[0] - ks.exact_mean(f)) < 4 * me.bias_se[0]
    assert me.var_sum == pytest.approx(0.1, abs=4 * me.var_sum_se)


def test_ppp_min_moments():
    n = 50.0
    model = PppBoundary(n)
    f = GridFunction.constant(0.2, 8)
    me = mc_moments(PppMin(n, corrected=True), model, f, 100_000, RngStream(38), target=0.2)
    assert abs(me.bias[0]) < 4 * me.bias_se[0]
    assert me.var_sum == pytest.approx(1 / n**2, abs=4 * me.var_sum_se)


def test_haar_rotations_are_orthogonal():
    R = haar_rotations(5, 10, RngStream(3))
    for D in R:
        assert np.allclose(D @ D.T, np.eye(5), atol=1e-12)
    assert np.all(np.abs(haar_rotations(1, 10, RngStream(3))) == 1.0)


def test_james_stein_is_fixed_point_of_symmetrization():
    sym = spherical_symmetrize(JamesStein(), 16, RngStream(4), 6)
    x = np.random.default_rng(0).normal(size=(50, 6))
    assert np.allclose(sym.apply(x), JamesStein().apply(x), atol=1e-12)


def test_compact_basis_orthonormal():
    B = compact_basis(8, 400)
    G = B @ B.T / B.shape[1]
    assert np.allclose(G, np.eye(8), atol=1e-12)
    with pytest.raises(ValueError):
        compact_basis(7, 400)
    with pytest.raises(SupportViolationError):
        compact_basis(8, 400, kernel=lambda x: np.ones_like(np.asarray(x, dtype=float)))


def test_projection_recovers_coefficients():
    B = compact_basis(8, 800)
    theta = np.random.default_rng(2).normal(size=8)
    cells = theta @ B
    assert np.allclose(l2_project_to_sequence(cells, B)[0], theta, atol=1e-6)
    proj = Projected(OracleFunction(tuple(cells)), B)
    assert np.allclose(proj.apply(np.zeros((3, 800))), theta, atol=1e-6)
    # zero estimator: projected squared bias equals the integrated squared bias
    assert float(theta @ theta) == pytest.approx(float(np.mean(cells**2)), rel=1e-10)
