import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gini_ot.errors import (
    EmptyInput,
    NegativeWeight,
    NonPositiveLambda,
    ShapeMismatch,
    ZeroTotalMass,
)
from gini_ot.measures import (
    SolverOptions,
    entropy,
    finalize,
    gini,
    got_objective_grad,
    make_measure,
    round_to_polytope,
    transport_cost,
    validate_plan,
)

METRIC = np.array([[0.0, 1.0], [1.0, 0.0]])


def plans(max_n=6, max_k=6):
    """Non-negative matrices normalized to total mass 1."""
    shape = st.tuples(st.integers(1, max_n), st.integers(1, max_k))
    return shape.flatmap(
        lambda s: arrays(float, s, elements=st.floats(0.0, 1.0))
        .filter(lambda a: a.sum() > 1e-3)
        .map(lambda a: a / a.sum())
    )


class TestMakeMeasure:
    def test_normalizes(self):
        np.testing.assert_allclose(make_measure([2, 2]).weights, [0.5, 0.5])
        np.testing.assert_allclose(make_measure([1, 0, 3]).weights, [0.25, 0.0, 0.75])

    def test_rejects(self):
        with pytest.raises(ZeroTotalMass):
            make_measure([0, 0])
        with pytest.raises(EmptyInput):
            make_measure([])
        with pytest.raises(NegativeWeight):
            make_measure([1, -1, 2])

    def test_metadata(self):
        m = make_measure([1, 3], labels=["a", "b"], coords=[(0, 0), (1, 1)])
        assert m.labels == ("a", "b")
        assert m.coords == ((0, 0), (1, 1))
        with pytest.raises(ShapeMismatch):
            make_measure([1, 2, 3], labels=["a"])

    def test_immutable(self):
        m = make_measure([1, 1])
        with pytest.raises(ValueError):
            m.weights[0] = 5.0

    @given(arrays(float, st.integers(1, 50), elements=st.floats(0.0, 1e6)))
    def test_on_simplex(self, w):
        if w.sum() <= 0:
            with pytest.raises(ZeroTotalMass):
                make_measure(w)
            return
        m = make_measure(w)
        assert np.all(m.weights >= 0)
        assert abs(m.weights.sum() - 1.0) <= 1e-12


class TestScalars:
    def test_transport_cost_examples(self):
        assert transport_cost(np.diag([0.5, 0.5]), METRIC) == 0.0
        assert transport_cost([[0.5, 0.1], [0.0, 0.4]], METRIC) == pytest.approx(0.1)
        assert transport_cost(np.full((2, 2), 0.25), METRIC) == pytest.approx(0.5)
        with pytest.raises(ShapeMismatch):
            transport_cost(np.ones((2, 3)), METRIC)

    def test_gini_examples(self):
        assert gini(np.full((2, 2), 0.25)) == pytest.approx(0.75)
        assert gini(np.array([[1.0, 0.0], [0.0, 0.0]])) == 0.0
        assert gini(np.diag([0.5, 0.5])) == pytest.approx(0.5)

    def test_entropy_examples(self):
        assert entropy(np.full((2, 2), 0.25)) == pytest.approx(np.log(4))
        assert entropy(np.array([[1.0, 0.0], [0.0, 0.0]])) == 0.0
        assert entropy(np.diag([0.5, 0.5])) == pytest.approx(np.log(2))

    @given(plans())
    def test_gini_identity_and_range(self, P):
        assert abs(gini(P) - (1.0 - np.sum(P * P))) <= 1e-14
        assert -1e-15 <= gini(P) <= 1.0 - 1.0 / P.size + 1e-12

    @given(plans())
    def test_entropy_range(self, P):
        assert -1e-15 <= entropy(P) <= np.log(P.size) + 1e-12

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_bilinearity(self, n, k, seed):
        r = np.random.default_rng(seed)
        mu, nu, M = r.random(n), r.random(k), r.random((n, k))
        assert transport_cost(np.outer(mu, nu), M) == pytest.approx(mu @ M @ nu, rel=1e-12)


class TestObjective:
    def test_zero_plan(self):
        M = np.array([[0.0, 2.0], [3.0, 1.0]])
        f, g = got_objective_grad(np.zeros((2, 2)), M, 1.0)
        assert f == 0.0
        np.testing.assert_allclose(g, M - 1.0)

    def test_hand_value(self):
        f, _ = got_objective_grad(np.diag([0.5, 0.5]), METRIC, 1.0)
        assert f == pytest.approx(-0.5)

    def test_rejects(self):
        with pytest.raises(NonPositiveLambda):
            got_objective_grad(np.zeros((2, 2)), METRIC, 0.0)
        with pytest.raises(ShapeMismatch):
            got_objective_grad(np.zeros((3, 2)), METRIC, 1.0)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([0.3, 1.0, 7.0]))
    def test_matches_regularized_form(self, seed, lam):
        # <P, M - 1/lam> + ||P||^2 / lam == <P, M> - gini(P) / lam when sum P = 1
        r = np.random.default_rng(seed)
        P = r.random((3, 4))
        P /= P.sum()
        M = r.random((3, 4))
        f, _ = got_objective_grad(P, M, lam)
        assert f == pytest.approx(transport_cost(P, M) - gini(P) / lam, abs=1e-12)


class TestValidatePlan:
    def test_identity_and_product(self):
        mu = np.array([0.2, 0.3, 0.5])
        assert validate_plan(np.diag(mu), mu, mu).ok
        nu = np.array([0.6, 0.4])
        rep = validate_plan(np.outer(mu, nu), mu, nu)
        assert rep.ok and rep.total <= 1e-15

    def test_row_violation(self):
        rep = validate_plan(np.full((2, 2), 0.25), [0.6, 0.4], [0.5, 0.5], tol=1e-6)
        assert rep.row_violation == pytest.approx(0.2)
        assert rep.col_violation == pytest.approx(0.0)
        assert not rep.ok

    def test_shape(self):
        with pytest.raises(ShapeMismatch):
            validate_plan(np.ones((2, 2)), [1, 1, 1], [1, 1])


def test_solver_options_validation():
    with pytest.raises(NonPositiveLambda):
        SolverOptions(lam=-1)
    with pytest.raises(ValueError):
        SolverOptions(max_iter=0)
    with pytest.raises(ValueError):
        SolverOptions(tol=0)
    assert SolverOptions().replace(lam=3.0).lam == 3.0


def test_finalize_clips_negatives():
    P = np.array([[0.5, -1e-13], [0.0, 0.5]])
    res = finalize(P, np.eye(2), [0.5, 0.5], [0.5, 0.5], objective=0.0, iterations=1,
                   converged=True, method="lp")
    assert res.plan.min() == 0.0
    assert res.to_dict()["method"] == "lp"


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.0, 0.3))
def test_round_to_polytope(n, k, seed, noise):
    r = np.random.default_rng(seed)
    mu, nu = r.random(n) + 0.01, r.random(k) + 0.01
    mu, nu = mu / mu.sum(), nu / nu.sum()
    P = np.outer(mu, nu) * (1 + noise * r.uniform(-1, 1, (n, k)))
    Q = round_to_polytope(P, mu, nu)
    assert Q.min() >= 0
    assert validate_plan(Q, mu, nu, tol=1e-14).ok
    viol = np.abs(P.sum(1) - mu).sum() + np.abs(P.sum(0) - nu).sum()
    assert np.abs(Q - P).sum() <= 2 * viol + 1e-14


def test_round_keeps_feasible_plan():
    P = np.array([[0.1, 0.3], [0.4, 0.2]])
    np.testing.assert_allclose(round_to_polytope(P, P.sum(1), P.sum(0)), P, atol=1e-16)
