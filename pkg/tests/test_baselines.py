import numpy as np
import pytest
from scipy.optimize import minimize

from rkrank import ComparisonGraph, EdgeObservations, NumericError, ParameterError, rank_centrality, regularized_mle
from rkrank.baselines import mle_objective, transition_matrix

from conftest import random_connected_graph


def test_rank_centrality_symmetric_pair():
    g = ComparisonGraph.from_edges(2, [(0, 1)])
    w = np.asarray(rank_centrality(g, EdgeObservations(g.edges, [(4, 4)])))
    assert w == pytest.approx([1.0, 1.0])


def test_rank_centrality_matches_dense_left_eigenvector():
    g = ComparisonGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 2)])
    obs = EdgeObservations(g.edges, [(5, 2), (3, 3), (1, 6), (4, 1)])
    p = transition_matrix(g, obs).toarray()
    assert np.allclose(p.sum(axis=1), 1.0) and (p >= 0).all()
    vals, vecs = np.linalg.eig(p.T)
    pi = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    pi /= pi.sum()
    w = np.asarray(rank_centrality(g, obs))
    assert w / w.sum() == pytest.approx(pi, abs=1e-8)
    assert np.prod(w) == pytest.approx(1.0)


def test_rank_centrality_zero_mass_needs_epsilon():
    g = ComparisonGraph.from_edges(2, [(0, 1)])
    obs = EdgeObservations(g.edges, [(3, 0)])
    with pytest.raises(NumericError):
        rank_centrality(g, obs)
    w = np.asarray(rank_centrality(g, obs, epsilon=1.0))
    assert w[0] / w[1] == pytest.approx(4.0)


def test_mle_two_items_closed_form():
    g = ComparisonGraph.from_edges(2, [(0, 1)])
    w = np.asarray(regularized_mle(g, EdgeObservations(g.edges, [(3, 1)])))
    assert w[0] / w[1] == pytest.approx(3.0, rel=1e-9)


def test_mle_symmetric_tallies_give_equal_weights():
    g = random_connected_graph(8, np.random.default_rng(0))
    w = np.asarray(regularized_mle(g, EdgeObservations(g.edges, np.full((g.m, 2), 3.0)), lam=0.1))
    assert w == pytest.approx(np.ones(8))


@pytest.mark.parametrize("lam", [0.0, 0.5])
def test_mle_matches_generic_optimizer(lam):
    rng = np.random.default_rng(1)
    g = random_connected_graph(9, rng)
    wins = rng.integers(1, 10, size=(g.m, 2)).astype(float)
    obs = EdgeObservations(g.edges, wins)
    theta = np.log(np.asarray(regularized_mle(g, obs, lam=lam)))
    res = minimize(lambda t: -mle_objective(t, g.edges, wins, lam), np.zeros(g.n), method="BFGS",
                   options={"gtol": 1e-10})
    ref = res.x - res.x.mean()
    assert theta == pytest.approx(ref, abs=1e-5)


def test_mle_diverges_on_undefeated_item():
    g = ComparisonGraph.from_edges(3, [(0, 1), (1, 2)])
    obs = EdgeObservations(g.edges, [(4, 0), (2, 2)])
    with pytest.raises(NumericError, match="lambda"):
        regularized_mle(g, obs)
    w = np.asarray(regularized_mle(g, obs, lam=0.5))
    assert w[0] > w[1]


def test_mle_rejects_negative_lambda():
    g = ComparisonGraph.from_edges(2, [(0, 1)])
    with pytest.raises(ParameterError):
        regularized_mle(g, EdgeObservations(g.edges, [(1, 1)]), lam=-1.0)
