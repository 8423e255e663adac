import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkrank import (
    ComparisonGraph,
    DegenerateEstimateError,
    EdgeObservations,
    ParameterError,
    WeightVector,
    estimate_probability,
    ground_truth_weights,
    logit,
    preference_probability,
    simulate_comparisons,
    update_running_estimate,
)

from conftest import random_connected_graph

counts = st.integers(0, 500)


def test_ground_truth_weights():
    w = np.asarray(ground_truth_weights(400))
    assert w[0] == pytest.approx(10 ** (1 / 400))
    assert w[-1] == pytest.approx(10.0)
    assert ground_truth_weights(400).dynamic_range == pytest.approx(10 ** (399 / 400))


@pytest.mark.parametrize("bad", [[1.0, 0.0], [1.0, -2.0], [np.inf, 1.0], [[1.0, 2.0]]])
def test_weight_vector_validation(bad):
    with pytest.raises(ParameterError):
        WeightVector(bad)


def test_weight_vector_normalized_has_unit_geometric_mean():
    w = WeightVector([1.0, 4.0, 16.0]).normalized()
    assert np.prod(np.asarray(w)) == pytest.approx(1.0)
    assert w[2] / w[1] == pytest.approx(4.0)


def test_preference_probability_examples():
    assert preference_probability([3.0, 3.0], 0, 1) == 0.5
    assert preference_probability([10.0, 1.0], 0, 1) == pytest.approx(10 / 11)
    w = np.asarray(ground_truth_weights(50))
    worst = min(preference_probability(w, i, j) for i in range(50) for j in range(50) if i != j)
    assert worst >= 1 / (1 + w.max() / w.min()) - 1e-15
    with pytest.raises(ParameterError):
        preference_probability(w, 2, 2)


@pytest.mark.parametrize("a,b,eps,expected", [(3, 1, 0, 0.75), (5, 0, 1, 6 / 7), (0, 0, 1, 0.5)])
def test_estimate_probability(a, b, eps, expected):
    assert estimate_probability(a, b, eps) == pytest.approx(expected)


@pytest.mark.parametrize("a,b", [(5, 0), (0, 5), (0, 0)])
def test_one_sided_tally_without_regularization_is_degenerate(a, b):
    with pytest.raises(DegenerateEstimateError):
        estimate_probability(a, b, 0.0)


def test_logit_examples():
    assert logit(0.5) == 0.0
    w_i, w_j = 3.0, 0.7
    assert logit(w_i / (w_i + w_j)) == pytest.approx(math.log(w_i) - math.log(w_j))
    assert logit(0.75) == -logit(0.25)
    for p in (0.0, 1.0):
        with pytest.raises(DegenerateEstimateError):
            logit(p)


@settings(max_examples=200)
@given(counts, counts, st.floats(0.01, 5.0))
def test_edge_logits_exactly_antisymmetric(a, b, eps):
    obs = EdgeObservations([(0, 1)], [(a, b)], eps)
    assert obs.logit(0, 1) == -obs.logit(1, 0)
    assert obs.logits()[0] == obs.logit(0, 1)


def test_degenerate_logit_names_edge():
    obs = EdgeObservations([(0, 1), (1, 2)], [(2, 2), (4, 0)])
    with pytest.raises(DegenerateEstimateError) as info:
        obs.logits()
    assert info.value.edge == (1, 2)
    assert np.isfinite(obs.with_epsilon(1.0).logits()).all()


def test_record_updates_and_inserts():
    obs = EdgeObservations([(0, 1)], [(3, 1)], 1.0)
    res = update_running_estimate(obs, 0, 1, 1)
    assert not res.inserted and obs.tally(0, 1) == (4.0, 1.0)
    obs.record(1, 0, 1)
    assert obs.tally(0, 1) == (4.0, 2.0)
    res = obs.record(2, 1, 1)
    assert res.inserted and obs.tally(2, 1) == (1.0, 0.0)
    assert obs.probabilities()[res.edge_index] == pytest.approx(1 / 3)  # lower index (1) lost
    assert 1 - obs.probabilities()[res.edge_index] == pytest.approx(2 / 3)
    with pytest.raises(ParameterError):
        obs.record(1, 1, 1)


def test_streaming_wins_match_closed_form():
    eps = 0.5
    obs = EdgeObservations.empty(eps)
    previous = 0.5
    for t in range(1, 30):
        obs.record(0, 1, 1)
        p = obs.probabilities()[0]
        assert p == pytest.approx((t + eps) / (t + 2 * eps))
        assert p > previous
        previous = p
        assert obs.logit(0, 1) == pytest.approx(math.log((t + eps) / eps))


def test_cached_logits_refresh_after_record():
    obs = EdgeObservations([(0, 1), (1, 2)], [(2, 1), (1, 1)], 0.5)
    before = obs.logits()
    obs.record(2, 1, 1)
    after = obs.logits()
    assert after[0] == before[0]
    assert after[1] == pytest.approx(math.log(1.5 / 2.5))


def test_simulated_totals_and_balance():
    g = random_connected_graph(40, np.random.default_rng(0))
    w = np.ones(g.n)
    obs = simulate_comparisons(g, w, 1000, seed=1)
    assert obs.total_comparisons == g.m * 1000
    frac = obs.wins[:, 0] / 1000
    assert np.mean(np.abs(frac - 0.5) <= 3 * math.sqrt(0.25 / 1000)) >= 0.99


def test_extreme_weights_give_one_sided_outcomes():
    g = ComparisonGraph.from_edges(2, [(0, 1)])
    obs = simulate_comparisons(g, [1.0, 1e-12], 50, seed=3)
    assert obs.tally(0, 1) == (50.0, 0.0)


def test_edge_outcomes_do_not_depend_on_other_edges():
    small = ComparisonGraph.from_edges(4, [(0, 1), (2, 3)])
    big = ComparisonGraph.from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    w = [1.0, 2.0, 3.0, 4.0]
    a = simulate_comparisons(small, w, 25, seed=11)
    b = simulate_comparisons(big, w, 25, seed=11)
    assert a.tally(0, 1) == b.tally(0, 1)
    assert a.tally(2, 3) == b.tally(2, 3)


def test_consistency_at_large_k():
    g = ComparisonGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)])
    w = np.array([1.0, 2.0, 3.5, 5.0, 9.0])
    k = 100_000
    p = w[g.edges[:, 0]] / (w[g.edges[:, 0]] + w[g.edges[:, 1]])
    band = 3 * np.sqrt(p * (1 - p) / k)
    hits = [np.abs(simulate_comparisons(g, w, k, seed=s).probabilities() - p) < band for s in range(50)]
    assert np.mean(hits) >= 0.99


def test_simulate_validation():
    g = ComparisonGraph.from_edges(2, [(0, 1)])
    with pytest.raises(ParameterError):
        simulate_comparisons(g, [1.0, 1.0], 0, seed=0)
    with pytest.raises(ParameterError):
        simulate_comparisons(g, [1.0, 1.0, 1.0], 5, seed=0)
