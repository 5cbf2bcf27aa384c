import json
import math

import numpy as np
import pytest

from bvbounds import scenarios as sc
from bvbounds.models import ParameterDomainError, RngStream
from bvbounds.scenarios import PreconditionError


def failed(res):
    return [v.name for v in res.verdicts if not v.passed]


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_pointwise_gwn(beta):
    res = sc.run_pointwise_gwn(beta=beta)
    assert res.passed, failed(res)
    assert res.constants["gamma"].value > 0


def test_gamma_vanishes_for_small_radius():
    for beta in (0.5, 1.0, 2.0):
        assert sc.gamma_constant(1.0, beta).value == 0.0
        assert sc.gamma_constant(0.5, beta).value == 0.0
    assert sc.gamma_constant(3.0, 1.0).value > 0


def test_gamma_bar_positive_iff_a_plus_one_below_radius():
    R = 3.0
    for a in (0.0, 1.0, 1.9, 2.1, 2.5):
        c = sc.gamma_bar_constant(R, 1.0, 1.0, a)
        assert c.positive == (a + 1 < R)


def test_pointwise_gwn_rejects_unsupported_beta():
    with pytest.raises(ParameterDomainError):
        sc.run_pointwise_gwn(beta=1.5)


def test_sparse_sequence_default():
    res = sc.run_sparse_sequence(reps=5000)
    assert res.passed, failed(res)
    assert "row-sum" in res.bounds


def test_sparse_sequence_precondition():
    with pytest.raises(PreconditionError):
        sc.run_sparse_sequence(n=100, s=2, gamma=0.2)
    with pytest.raises(PreconditionError):
        sc.run_sparse_sequence(n=100, s=6)


def test_sparse_sequence_non_strict_example():
    res = sc.run_sparse_sequence(n=100, s=2, gamma=0.2, reps=5000, strict=False)
    assert res.constants["threshold"] == pytest.approx(math.sqrt(0.2 * math.log(25)))
    assert res.constants["threshold"] == pytest.approx(0.802, abs=1e-3)
    assert res.bounds["sum-var0"].holds
    assert res.constants["variance_lower_constant"] is None
    assert "row-sum" not in res.bounds
    assert res.passed, failed(res)


def test_quadratic_functional():
    res = sc.run_quadratic_functional(reps=50_000)
    assert res.passed, failed(res)
    assert res.constants["functional_var0_rhs"] == pytest.approx(149.116992571090, rel=1e-12)
    assert res.constants["functional_var0_exact"] == pytest.approx(80.0139264905993, rel=1e-10)


def test_quadratic_functional_precondition():
    with pytest.raises(PreconditionError):
        sc.run_quadratic_functional(n=100, s=2, gamma=0.5)


def test_sandwich_rows_hold():
    for n, s in [(100, 1), (400, 2), (2500, 5)]:
        L = math.log(n / s**2)
        for gamma in (2 / L, 1.0):
            if gamma * L < 2 - 1e-12:
                continue
            for key, rep in sc.soft_threshold_sandwich(n, s, gamma):
                assert rep.holds, (n, s, gamma, key)


def test_boundary():
    res = sc.run_boundary(reps=50_000)
    assert res.passed, failed(res)


def test_boundary_domain():
    with pytest.raises(ParameterDomainError):
        sc.run_boundary(beta=1.0)


def test_l2_reduction():
    res = sc.run_l2_reduction(reps=20_000)
    assert res.passed, failed(res)


def test_perturbation_geometry_limits():
    g = sc.perturbation_geometry(4, 1.0, [0.1, 0.05, 0.025])
    assert g["norm_limit"] == pytest.approx(1 / 3)
    err = [abs(x - g["norm_limit"]) for x in g["norm_ratio"]]
    assert err[1] / err[0] < 0.6 and err[2] / err[1] < 0.6
    errc = [abs(x - g["cross_limit"]) for x in g["cross_ratio"]]
    assert errc[2] < errc[0]


def test_symmetrized_mean_map_is_equivariant():
    r = sc.symmetrization_equivariance(m=8, reps=50_000, seed=3)
    assert r["cosine"] > 0.999
    assert r["max_z"] < 4.5


def test_bias_blowup():
    res = sc.run_bias_blowup_demo(m=8, variance_budget=2.0, a_ladder=(5, 10), reps=20_000)
    assert res.constants["shrinkage"] == pytest.approx(0.5)
    rows = res.tables["bias_blowup"][1]
    a10 = [r for r in rows if r[0] == 10][0]
    assert a10[3] == pytest.approx(0.5 * 10 * math.sqrt(8))
    assert abs(a10[1] - 14.142135623730951) < 3 * a10[2]
    assert res.passed, failed(res)


def test_bias_blowup_budget_precondition():
    with pytest.raises(PreconditionError):
        sc.run_bias_blowup_demo(m=8, variance_budget=4.0)


def test_hd_regression():
    res = sc.run_hd_regression()
    assert res.passed, failed(res)
    ratio = res.constants["variance_lower_constant"] / res.constants["sequence_constant_over_n"]
    assert ratio == pytest.approx(1 / math.e, rel=1e-12)


def test_orthogonal_design_has_zero_coherence():
    X = sc.make_design("orthogonal", 400, 20, RngStream(0))
    assert sc.mutual_coherence(X) < 1e-10
    res = sc.run_hd_regression(design="orthogonal")
    assert res.measurements["coherence_condition"]
    assert res.passed, failed(res)


def test_unnormalized_design_rejected():
    with pytest.raises(ParameterDomainError):
        sc.mutual_coherence(np.ones((10, 3)) * 2.0)


def test_scenario_json_is_byte_identical_on_rerun():
    a = json.dumps(sc.run_boundary(reps=5000, seed=11).to_dict(), sort_keys=True)
    b = json.dumps(sc.run_boundary(reps=5000, seed=11).to_dict(), sort_keys=True)
    assert a == b
    c = json.dumps(sc.run_boundary(reps=5000, seed=12).to_dict(), sort_keys=True)
    assert a != c


def test_every_verdict_references_a_bound_or_closed_form():
    res = sc.run_sparse_sequence(reps=2000)
    for v in res.verdicts:
        kind, _, key = v.reference.partition(":")
        assert kind in ("bound", "closed-form")
        if kind == "bound":
            assert key in res.bounds


def test_registry_lists_all_scenarios():
    assert set(sc.SCENARIOS) == {
        "pointwise-gwn", "sparse-sequence", "quadratic-functional", "boundary",
        "l2-reduction", "bias-blowup", "hd-regression",
    }
