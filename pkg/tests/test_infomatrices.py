import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvbounds.divergences import divergence, mixture_chi2_oracle
from bvbounds.infomatrices import (
    DegenerateBaseError,
    KernelValidationError,
    MarkovKernelMatrix,
    ShapeError,
    affinity_matrix,
    chi2_matrix,
    data_processing_check,
    discrete_chi2_matrix,
    gamma_expansion_convergence,
    gamma_first_order_check,
    mc_matrix_oracle,
    numeric_matrix_oracle,
    pseudo_inverse,
    row_sum_norm,
    sparse_b_ratio,
    sparse_b_table,
    sparse_chi2_row_sum,
    sparse_design,
    spectral_norm,
    table_affinity_entry,
    table_chi2_entry,
)
from bvbounds.models import (
    BernoulliProduct,
    ExponentialProduct,
    GammaProduct,
    GridFunction,
    IsoNormal,
    ParameterDomainError,
    ParamVector,
    PoissonProduct,
    PppBoundary,
    RngStream,
)

P = ParamVector
E = math.e - 1


def orth():
    return [P([0.0, 0.0]), P([1.0, 0.0]), P([0.0, 1.0])]


def test_gaussian_orthogonal_shifts():
    A = chi2_matrix(IsoNormal(1.0), orth()).values
    assert np.allclose(A, np.diag([E, E]), atol=1e-12)
    B = affinity_matrix(IsoNormal(1.0), orth()).values
    assert np.allclose(B, np.diag([0.284025416687741] * 2), atol=1e-12)


def test_bernoulli_chi2_entries():
    A = chi2_matrix(BernoulliProduct(), [P([0.5]), P([0.6]), P([0.4])]).values
    assert A[0, 1] == pytest.approx(-0.04, abs=1e-12)
    assert A[0, 0] == pytest.approx(0.04, abs=1e-12)
    assert A[1, 1] == pytest.approx(0.04, abs=1e-12)


def test_bernoulli_affinity_diagonal():
    fam, ps = BernoulliProduct(), [P([0.5]), P([0.6]), P([0.6])]
    A = affinity_matrix(fam, ps).values
    assert A[0, 0] == pytest.approx(0.0102051443364381, abs=1e-12)
    oracle, _ = numeric_matrix_oracle(fam, ps, kind="hellinger_affinity")
    assert np.allclose(A, oracle.values, atol=1e-10)


def test_poisson_equal_alternatives():
    A = chi2_matrix(PoissonProduct(), [P([1.0]), P([2.0]), P([2.0])]).values
    assert np.allclose(A, E, atol=1e-12)


def test_identical_parameters_give_zero_affinity_matrix():
    A = affinity_matrix(PoissonProduct(), [P([1.3])] * 4).values
    assert np.allclose(A, 0.0, atol=1e-14)


def test_diagonal_matches_pairwise_chi2_and_dominates_affinity():
    fam = ExponentialProduct()
    ps = [P([1.0, 1.2]), P([1.3, 0.9]), P([0.8, 1.5]), P([1.1, 1.1])]
    A = chi2_matrix(fam, ps)
    B = affinity_matrix(fam, ps)
    for j, p in enumerate(ps[1:]):
        assert A.values[j, j] == pytest.approx(divergence("chi2", fam, p, ps[0]).value, abs=1e-8)
    assert np.all(np.diag(A.values) >= np.diag(B.values))


@pytest.mark.parametrize(
    "fam, ps",
    [
        (IsoNormal(1.5), [P([0.1, 0.2]), P([0.5, -0.3]), P([-0.2, 0.4])]),
        (PoissonProduct(), [P([1.0, 2.0]), P([1.5, 2.5]), P([0.7, 1.1])]),
        (ExponentialProduct(), [P([1.0, 2.0]), P([1.5, 2.5]), P([0.7, 1.1])]),
        (BernoulliProduct(), [P([0.3, 0.5]), P([0.4, 0.6]), P([0.2, 0.7])]),
        (GammaProduct((2.0, 3.0)), [P([1.0, 2.0]), P([1.5, 2.5]), P([0.7, 1.1])]),
    ],
)
def test_composed_forms_match_written_table(fam, ps):
    A = chi2_matrix(fam, ps).values
    B = affinity_matrix(fam, ps).values
    for j, k in [(0, 0), (0, 1), (1, 1)]:
        assert A[j, k] == pytest.approx(table_chi2_entry(fam, ps[0], ps[j + 1], ps[k + 1]), rel=1e-10)
        assert B[j, k] == pytest.approx(table_affinity_entry(fam, ps[0], ps[j + 1], ps[k + 1]), rel=1e-10, abs=1e-14)
    oracle, err = numeric_matrix_oracle(fam, ps)
    assert np.allclose(A, oracle.values, atol=max(1e-8, 3 * err), rtol=1e-8)


def test_gamma_infinite_entries_flagged():
    fam = GammaProduct((2.0,))
    A = chi2_matrix(fam, [P([2.0]), P([1.0]), P([1.5])])
    assert not A.finite
    assert math.isnan(A.min_eigenvalue())
    assert math.isinf(A.values[0, 0])


def test_mixed_parameter_types_rejected():
    with pytest.raises(TypeError):
        chi2_matrix(IsoNormal(1.0), [P([0.0]), GridFunction.constant(0.0, 2)])


def test_degenerate_base():
    fam = PppBoundary(1e4, height=2.0)
    fs = [GridFunction.constant(0.0, 2), GridFunction.constant(1.0, 2), GridFunction.constant(1.0, 2)]
    with pytest.raises(DegenerateBaseError):
        affinity_matrix(fam, fs)


def test_mc_oracle_gaussian():
    M = mc_matrix_oracle(IsoNormal(1.0), orth(), 1_000_000, RngStream(21))
    assert abs(M.values[0, 1]) < 3 * M.se[0, 1]
    assert abs(M.values[0, 0] - E) < 3 * M.se[0, 0]


def test_mc_oracle_bernoulli():
    ps = [P([0.5]), P([0.6]), P([0.4])]
    M = mc_matrix_oracle(BernoulliProduct(), ps, 200_000, RngStream(22))
    exact = chi2_matrix(BernoulliProduct(), ps).values
    assert np.all(np.abs(M.values - exact) < 3 * M.se + 1e-12)
    assert np.all(M.se > 0)


def test_pseudo_inverse_examples():
    assert np.allclose(pseudo_inverse(np.eye(3)), np.eye(3))
    assert np.allclose(pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    rng = np.random.default_rng(0)
    X = rng.normal(size=(5, 3))
    A = X @ X.T  # rank 3
    Ap = pseudo_inverse(A)
    assert np.linalg.norm(A @ Ap @ A - A) < 1e-8 * np.linalg.norm(A)
    assert np.allclose(Ap, np.linalg.pinv(A), atol=1e-8)
    with pytest.raises(ShapeError):
        pseudo_inverse(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_norms():
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0)
    assert row_sum_norm(np.eye(3)) == pytest.approx(1.0)
    assert spectral_norm(np.ones((3, 3))) == pytest.approx(3.0)
    assert row_sum_norm(np.ones((3, 3))) == pytest.approx(3.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_spectral_below_row_sum(M, seed):
    X = np.random.default_rng(seed).normal(size=(M, M))
    A = X @ X.T
    assert spectral_norm(A) <= row_sum_norm(A) + 1e-10


def _family_params(draw, M, d):
    kind = draw(st.sampled_from(["iso", "poisson", "bernoulli", "exponential", "gamma"]))
    lo, hi, fam = {
        "iso": (-1.0, 1.0, IsoNormal(1.0)),
        "poisson": (0.3, 4.0, PoissonProduct()),
        "bernoulli": (0.1, 0.9, BernoulliProduct()),
        # 2 * lo > hi keeps every chi-square entry finite
        "exponential": (0.85, 1.6, ExponentialProduct()),
        "gamma": (0.85, 1.6, GammaProduct((2.5,) * d)),
    }[kind]
    vals = draw(st.lists(st.lists(st.floats(lo, hi), min_size=d, max_size=d), min_size=M + 1, max_size=M + 1))
    return fam, [P(v) for v in vals]


@st.composite
def designs(draw):
    M, d = draw(st.integers(1, 5)), draw(st.integers(1, 3))
    return _family_params(draw, M, d)


@settings(max_examples=100, deadline=None)
@given(designs())
def test_matrices_are_psd(case):
    fam, ps = case
    for A in (chi2_matrix(fam, ps), affinity_matrix(fam, ps)):
        ev = np.linalg.eigvalsh(A.values)
        assert ev[0] >= -1e-8 * max(abs(ev[-1]), 1.0)


@settings(max_examples=25, deadline=None)
@given(designs(), st.integers(0, 2**32 - 1))
def test_mixture_identity(case, seed):
    fam, ps = case
    if isinstance(fam, (IsoNormal, ExponentialProduct, GammaProduct)) and ps[0].d > 1:
        ps = [P(p.values[:1]) for p in ps]
        if isinstance(fam, GammaProduct):
            fam = GammaProduct((2.5,))
    w = np.random.default_rng(seed).dirichlet(np.ones(len(ps) - 1))
    A = chi2_matrix(fam, ps).values
    mix = mixture_chi2_oracle(fam, ps[0], ps[1:], w)
    # relative floor: large Poisson entries exceed 1e10 and carry float64 rounding
    tol = max(1e-6, 1e-12 * abs(mix.value), 3 * (mix.se or 0.0), 3 * (mix.error_bound or 0.0))
    assert w @ A @ w == pytest.approx(mix.value, abs=tol)


def test_duplicate_parameter_is_singular():
    ps = [P([0.0, 0.0]), P([0.4, 0.1]), P([0.4, 0.1]), P([-0.2, 0.3])]
    A = chi2_matrix(IsoNormal(1.0), ps)
    ev = np.linalg.eigvalsh(A.values)
    assert ev[0] <= 1e-8 * ev[-1]


def test_data_processing_identity_and_collapse():
    q = np.array([[0.25, 0.25, 0.25, 0.25], [0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1]])
    r = data_processing_check(MarkovKernelMatrix(np.eye(4)), q)
    assert np.allclose(r.chi2_q - r.chi2_kq, 0.0)
    assert r.passed
    collapse = MarkovKernelMatrix(np.tile([1.0, 0.0], (4, 1)))
    r = data_processing_check(collapse, q)
    assert np.allclose(r.chi2_kq, 0.0)
    assert np.allclose(r.chi2_q, discrete_chi2_matrix(q))
    assert r.passed


def test_data_processing_random_binnings():
    rng = np.random.default_rng(5)
    bern = lambda a, b: np.array([(1 - a) * (1 - b), (1 - a) * b, a * (1 - b), a * b])
    worst = math.inf
    for _ in range(500):
        K = MarkovKernelMatrix(rng.dirichlet(np.ones(2), size=4))
        t = rng.uniform(0.05, 0.95, size=(3, 2))
        worst = min(worst, data_processing_check(K, [bern(*x) for x in t]).min_eigenvalue)
    assert worst >= -1e-8


def test_invalid_kernel():
    with pytest.raises(KernelValidationError):
        MarkovKernelMatrix(np.array([[0.5, 0.4], [0.5, 0.5]]))
    with pytest.raises(KernelValidationError):
        MarkovKernelMatrix(np.array([[1.2, -0.2], [0.5, 0.5]]))


def test_gamma_expansion():
    same = gamma_first_order_check([2.0], [1.0], [[1.0], [1.0]])
    assert np.allclose(same.exact, 0.0) and np.allclose(same.quadratic, 0.0)
    d = 1e-2
    r = gamma_first_order_check([2.0], [1.0], [[1 + d], [1 + d]])
    assert np.allclose(r.quadratic, 2 * d**2)
    # exact series is 2 d^2 - 4 d^3 + ..., so the relative error at d = 1e-2 is about 2e-2
    assert r.rel_error < 2.5e-2
    assert gamma_first_order_check([2.0], [1.0], [[1 + d / 2]]).rel_error < 1e-2
    e1, e2, ratio = gamma_expansion_convergence([2.0], [1.0], [[1.0], [1.0]], d)
    assert e1 / e2 > 3
    assert ratio < 0.6


def test_sparse_b_table():
    assert sparse_b_table(10, 2) == (8, 1)
    r = sparse_chi2_row_sum(10, 2, 0.5)
    assert r.total == 9
    assert r.row_sum == pytest.approx(6.149110640673517, abs=1e-12)
    assert sparse_chi2_row_sum(10, 1, 0.7).row_sum == pytest.approx(10**0.7 - 1, rel=1e-12)
    with pytest.raises(ParameterDomainError):
        sparse_b_table(10, 6)


def test_sparse_b_table_big_integers():
    b = sparse_b_table(10**6, 5)
    assert sum(b) == math.comb(10**6 - 1, 4)
    for r in range(1, 5):
        assert b[r] / b[r - 1] == pytest.approx(sparse_b_ratio(10**6, 5, r), rel=1e-12)


@pytest.mark.parametrize("n, s", [(6, 1), (6, 2), (8, 2), (10, 2), (9, 3)])
def test_sparse_row_sum_brute_force(n, s):
    alpha = 0.4
    value = math.sqrt(alpha * math.log(n / s**2))
    ps = [P(np.zeros(n))] + sparse_design(n, s, value)
    A = chi2_matrix(IsoNormal(1.0), ps).values
    rows = np.abs(A).sum(axis=1)
    assert np.allclose(rows, rows[0], rtol=1e-12)
    assert row_sum_norm(A) == pytest.approx(sparse_chi2_row_sum(n, s, alpha).row_sum, rel=1e-10)
    overlaps = [len(set(a.support) & set(b.support)) for a, b in combinations(ps[1:], 2)]
    assert max(overlaps, default=1) <= s


def test_sparse_row_sum_bernoulli_brute_force():
    # d = 6 Bernoulli products with an explicit pairwise loop as the reference
    fam = BernoulliProduct()
    base = P(np.full(6, 0.5))
    alts = [P(np.where(np.isin(np.arange(6), S), 0.7, 0.5)) for S in combinations(range(6), 2) if 0 in S]
    A = chi2_matrix(fam, [base] + alts).values
    per = (0.2 * 0.2) / 0.25  # per shared coordinate
    ref = max(
        sum((1 + per) ** int(np.sum((x.values != 0.5) & (y.values != 0.5))) - 1 for y in alts) for x in alts
    )
    assert row_sum_norm(A) == pytest.approx(ref, rel=1e-12)
    assert ref == pytest.approx(4 * (1.16 - 1) + (1.16**2 - 1), rel=1e-12)
