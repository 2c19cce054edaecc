import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gini_ot.datasets import gaussian_pair, make_dataset
from gini_ot.errors import ShapeMismatch, TooLarge
from gini_ot.exact import TransportSimplex, brute_force_oracle, solve_lp

from conftest import random_instance
from oracles import LP_SKEW_PLAN, LP_SKEW_RHO, RHO_STAR, RHO_STAR_GAUSSIAN_K4

METRIC = np.array([[0.0, 1.0], [1.0, 0.0]])
small = st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))


def test_examples():
    res = solve_lp([0.5, 0.5], [0.5, 0.5], METRIC)
    np.testing.assert_allclose(res.plan, np.diag([0.5, 0.5]))
    assert res.transport_cost == 0.0
    res = solve_lp([0.6, 0.4], [0.5, 0.5], METRIC)
    np.testing.assert_allclose(res.plan, LP_SKEW_PLAN, atol=1e-15)
    assert res.transport_cost == pytest.approx(LP_SKEW_RHO)
    assert res.marginal_violation <= 1e-9


def test_oracle_examples():
    nu = np.array([0.2, 0.5, 0.3])
    M = np.array([[3.0, 1.0, 2.0]])
    res = brute_force_oracle([1.0], nu, M)
    np.testing.assert_allclose(res.plan, nu[None, :])
    assert res.transport_cost == pytest.approx(nu @ M[0])
    third = np.full(3, 1 / 3)
    M3 = np.abs(np.subtract.outer(np.arange(3.0), np.arange(3.0)))
    res = brute_force_oracle(third, third, M3)
    np.testing.assert_allclose(res.plan, np.diag(third), atol=1e-15)
    with pytest.raises(TooLarge):
        brute_force_oracle(np.ones(5), np.ones(4), np.ones((5, 4)))


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        solve_lp([0.5, 0.5], [1.0], METRIC)


def test_gaussian_baselines():
    mu, nu, M = gaussian_pair(k=4, m1=1, s1=1, m2=2, s2=1)
    assert solve_lp(mu, nu, M).transport_cost == pytest.approx(RHO_STAR_GAUSSIAN_K4, abs=1e-12)
    assert brute_force_oracle(mu, nu, M).transport_cost == pytest.approx(RHO_STAR_GAUSSIAN_K4, abs=1e-12)
    for name, rho in RHO_STAR.items():
        mu, nu, M = make_dataset(name)
        assert solve_lp(mu, nu, M).transport_cost == pytest.approx(rho, rel=1e-12)


@given(small)
def test_matches_oracle_and_is_basic(args):
    n, k, seed = args
    r = np.random.default_rng(seed)
    mu, nu, M = random_instance(r, n, k, zeros=seed % 3 == 0)
    if seed % 2:
        M = np.round(M * 3)  # cost ties
    res = solve_lp(mu, nu, M)
    assert res.transport_cost == pytest.approx(brute_force_oracle(mu, nu, M).transport_cost, abs=1e-9)
    assert np.count_nonzero(res.plan > 0) <= n + k - 1
    assert res.marginal_violation <= 1e-9


@given(st.integers(2, 12), st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_transpose_and_scaling(n, k, seed):
    r = np.random.default_rng(seed)
    mu, nu, M = random_instance(r, n, k)
    rho = solve_lp(mu, nu, M).transport_cost
    assert solve_lp(nu, mu, M.T).transport_cost == pytest.approx(rho, abs=1e-12)
    scaled = solve_lp(mu, nu, 7.5 * M)
    assert scaled.transport_cost == pytest.approx(7.5 * rho, rel=1e-10, abs=1e-12)
    # the scaled problem's plan is optimal for the original costs too
    assert np.sum(scaled.plan * M) == pytest.approx(rho, rel=1e-10, abs=1e-12)


def test_optimality_certificate(rng):
    mu, nu, M = random_instance(rng, 30, 40)
    lp = TransportSimplex(mu, nu)
    P = lp.solve(M)
    red = M - lp.u[:, None] - lp.v[None, :]
    assert red.min() >= -1e-12
    assert np.abs(red[P > 0]).max() <= 1e-12
    # weak duality closes the gap
    assert mu @ lp.u + nu @ lp.v == pytest.approx(np.sum(P * M), abs=1e-12)


def test_warm_restart_signed_costs(rng):
    mu, nu, _ = random_instance(rng, 15, 12)
    lp = TransportSimplex(mu, nu)
    for _ in range(10):
        C = rng.normal(size=(15, 12))
        warm = lp.solve(C)
        cold = TransportSimplex(mu, nu).solve(C)
        assert np.sum(warm * C) == pytest.approx(np.sum(cold * C), abs=1e-12)
        assert solve_lp(mu, nu, C, allow_negative=True).transport_cost == pytest.approx(
            np.sum(warm * C), abs=1e-12)


def test_degenerate_identical_marginals():
    k = 40
    mu = np.full(k, 1.0 / k)
    M = np.abs(np.subtract.outer(np.arange(k), np.arange(k))).astype(float)
    res = solve_lp(mu, mu, M)
    assert res.transport_cost == pytest.approx(0.0, abs=1e-15)
