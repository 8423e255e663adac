import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkrank import (
    ComparisonGraph,
    ConfigurationError,
    DegenerateEstimateError,
    EdgeObservations,
    LinearSystem,
    NumericError,
    ParameterError,
    SolverState,
    build_system,
    distance_center,
    kaczmarz_step,
    solve,
    tracking_step,
    warm_start,
    weights_from_iterate,
)
from rkrank.stopping import NeverStop, RankErrorSettled

from conftest import lsq_oracle, random_connected_graph

PATH3 = ComparisonGraph.from_edges(3, [(0, 1), (1, 2)])


def consistent_system(g, rng):
    v = rng.normal(size=g.n)
    y = v[g.edges[:, 0]] - v[g.edges[:, 1]]
    return LinearSystem(g, y), v


def test_single_edge_system():
    s = LinearSystem(ComparisonGraph.from_edges(2, [(0, 1)]), [1.0])
    assert s.rhs.tolist() == [1.0, -1.0]
    assert s.probs.tolist() == [0.5, 0.5]


def test_path_sampling_probabilities():
    s = LinearSystem(PATH3, [0.2, -0.4])
    assert s.probs == pytest.approx([0.2, 0.6, 0.2])


def test_rhs_sums_to_zero():
    g = random_connected_graph(20, np.random.default_rng(0))
    s = LinearSystem(g, np.random.default_rng(1).normal(size=g.m))
    assert abs(s.rhs.sum()) < 1e-12


def test_non_finite_logit_names_edge():
    with pytest.raises(DegenerateEstimateError) as info:
        LinearSystem(PATH3, [0.0, np.inf])
    assert info.value.edge == (1, 2)
    obs = EdgeObservations(PATH3.edges, [(1, 1), (3, 0)])
    with pytest.raises(DegenerateEstimateError):
        build_system(PATH3, obs)


def test_one_step_exact_on_single_edge():
    s = LinearSystem(ComparisonGraph.from_edges(2, [(0, 1)]), [1.0])
    state = kaczmarz_step(s, SolverState.create(2, seed=0), node=0)
    assert state.x.tolist() == [0.5, -0.5]
    assert s.residual(0, state.x) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31), st.integers(1, 40))
def test_step_preserves_sum_and_zeroes_row_residual(n, seed, steps):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(n, rng)
    s = LinearSystem(g, rng.normal(size=g.m) * 3)
    state = SolverState.create(n, rng.normal(size=n) * 5, seed=seed)
    total = state.x.sum()
    for _ in range(steps):
        i = int(rng.integers(n))
        kaczmarz_step(s, state, node=i)
        assert abs(s.residual(i, state.x)) <= 1e-9 * (1 + np.abs(s.rhs).max() + np.abs(state.x).max())
        assert abs(state.x.sum() - total) <= 1e-12 * max(1.0, abs(total), np.abs(state.x).sum())


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 10), st.integers(0, 2**31))
def test_error_never_grows_on_consistent_system(n, seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(n, rng)
    s, v = consistent_system(g, rng)
    target = v - v.mean()
    state = SolverState.create(n, seed=seed)
    err = np.linalg.norm(state.x - target)
    for _ in range(200):
        kaczmarz_step(s, state)
        new = np.linalg.norm(state.x - target)
        assert new <= err + 1e-12
        err = new


def test_consistent_system_converges_to_centered_truth():
    rng = np.random.default_rng(3)
    g = random_connected_graph(15, rng)
    s, v = consistent_system(g, rng)
    rep = solve(s, stop=NeverStop(), max_iters=20_000, seed=1)
    assert np.allclose(rep.x, v - v.mean(), atol=1e-6)
    assert rep.stopped_by == "max-iters" and rep.connected


def test_four_node_instance_matches_pseudoinverse():
    rng = np.random.default_rng(8)
    g = ComparisonGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3)])
    y = rng.normal(size=g.m)
    x0 = rng.normal(size=4)
    rep = solve(LinearSystem(g, y), x0=x0, stop=NeverStop(), max_iters=10_000, seed=2)
    assert np.allclose(rep.x, lsq_oracle(g, y, x0.sum()), atol=1e-8)


def test_disconnected_components_converge_separately():
    g = ComparisonGraph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.warns(UserWarning, match="components"):
        rep = solve(LinearSystem(g, [1.0, 1.0]), stop=NeverStop(), max_iters=50, seed=0)
    assert np.allclose(rep.x, [0.5, -0.5, 0.5, -0.5])
    assert not rep.connected


def test_isolated_node_keeps_initial_value():
    g = ComparisonGraph.from_edges(3, [(0, 1)])
    with pytest.warns(UserWarning):
        rep = solve(LinearSystem(g, [2.0]), x0=[0.0, 0.0, 7.0], stop=NeverStop(), max_iters=20, seed=0)
    assert rep.x[2] == 7.0 and rep.isolated.tolist() == [2]
    with pytest.raises(ParameterError):
        kaczmarz_step(LinearSystem(g, [2.0]), SolverState.create(3), node=2)


def test_error_trace_and_ops():
    rng = np.random.default_rng(4)
    g = random_connected_graph(10, rng)
    s, v = consistent_system(g, rng)
    rep = solve(s, stop=NeverStop(), max_iters=100, seed=0, x_star=v - v.mean())
    assert len(rep.error_trace) == 101
    assert np.all(np.diff(rep.error_trace) <= 1e-12)
    mean_cost = float(np.sum(s.probs * (g.degrees + 1)))
    assert 1 <= rep.ops_per_iteration <= g.degrees.max() + 1
    assert rep.ops_per_iteration == pytest.approx(mean_cost, rel=0.5)


def test_solve_is_deterministic_per_seed():
    rng = np.random.default_rng(5)
    g = random_connected_graph(12, rng)
    s = LinearSystem(g, rng.normal(size=g.m))
    a = solve(s, stop=NeverStop(), max_iters=300, seed=42).x
    b = solve(s, stop=NeverStop(), max_iters=300, seed=42).x
    assert np.array_equal(a, b)


def test_ground_truth_rule_requires_weights():
    with pytest.raises(ConfigurationError):
        RankErrorSettled(None)


def test_warm_start_telescopes_on_path():
    a, b = 0.7, -1.3
    x = warm_start(PATH3, np.array([a, b]), 0)
    assert x.tolist() == [0.0, -a, -a - b]
    with pytest.raises(ParameterError):
        warm_start(PATH3, np.array([a, b]), 3)


def test_warm_start_exact_on_tree():
    rng = np.random.default_rng(6)
    n = 25
    g = ComparisonGraph.from_edges(n, [(int(rng.integers(t)), t) for t in range(1, n)])
    v = rng.normal(size=n)
    y = v[g.edges[:, 0]] - v[g.edges[:, 1]]
    x = warm_start(g, y, distance_center(g))
    assert np.allclose(x - x.mean(), v - v.mean(), atol=1e-12)
    from rkrank.stopping import RelativeWeightChange

    rep = solve(LinearSystem(g, y), x0=x, stop=RelativeWeightChange(window=10, tol=1e-12), seed=0)
    assert rep.iterations == 10


def test_distance_center_of_path():
    g = ComparisonGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    assert distance_center(g) == 2


def test_tracking_c_zero_leaves_iterate():
    g = random_connected_graph(8, np.random.default_rng(7))
    obs = EdgeObservations(g.edges, np.ones((g.m, 2)), 0.5)
    s = build_system(g, obs)
    state = SolverState.create(g.n, np.arange(g.n, dtype=float), seed=0)
    i, j = g.edges[0]
    s, state = tracking_step(s, state, obs, (int(i), int(j), 1), c=0.0)
    assert state.x.tolist() == list(range(g.n))
    assert obs.tally(int(i), int(j)) == (2.0, 1.0)


def test_tracking_c_one_equals_plain_step():
    g = random_connected_graph(8, np.random.default_rng(8))
    obs = EdgeObservations(g.edges, np.ones((g.m, 2)) * 2, 0.5)
    s = build_system(g, obs)
    x0 = np.random.default_rng(9).normal(size=g.n)
    i, j = (int(v) for v in g.edges[3])
    s, tracked = tracking_step(s, SolverState.create(g.n, x0), obs, (i, j, 0), c=1.0, endpoint="max")
    plain = kaczmarz_step(build_system(g, obs), SolverState.create(g.n, x0), node=max(i, j))
    assert np.allclose(tracked.x, plain.x, atol=1e-14)


def test_tracking_inserts_new_pair_and_validates():
    g = ComparisonGraph.from_edges(3, [(0, 1), (1, 2)])
    obs = EdgeObservations(g.edges, [(1, 1), (1, 1)], 1.0)
    s = build_system(g, obs)
    state = SolverState.create(3)
    s, state = tracking_step(s, state, obs, (2, 0, 1), c=0.5)
    assert s.graph.has_edge(0, 2) and s.graph.m == 3
    assert s.y[s.graph.edge_index(0, 2)] == pytest.approx(math.log(1 / 2))
    with pytest.raises(ParameterError):
        tracking_step(s, state, obs, (0, 1, 1), c=1.5)
    with pytest.raises(ConfigurationError):
        tracking_step(s, state, obs, (0, 1, 1), c=0.5, endpoint="middle")


def test_weights_from_iterate():
    assert np.asarray(weights_from_iterate([0.0, 0.0, 0.0])).tolist() == [1.0, 1.0, 1.0]
    w = np.asarray(weights_from_iterate([math.log(2), 0.0]))
    assert w == pytest.approx([math.sqrt(2), 1 / math.sqrt(2)])
    x = np.random.default_rng(0).normal(size=30)
    assert np.array_equal(np.argsort(x), np.argsort(np.asarray(weights_from_iterate(x))))
    with pytest.raises(NumericError):
        weights_from_iterate([800.0, -800.0])
    with pytest.raises(NumericError):
        weights_from_iterate([np.nan, 0.0])


def test_warm_start_closer_than_cold_start_on_noisy_data():
    from rkrank import erdos_renyi, ground_truth_weights, simulate_comparisons

    g = erdos_renyi(200, 0.2, seed=12)
    obs = simulate_comparisons(g, ground_truth_weights(200), 30, seed=13, epsilon=0.5)
    y = obs.aligned_logits(g)
    x_star = lsq_oracle(g, y)
    warm = warm_start(g, obs, distance_center(g))
    warm -= warm.mean()
    assert np.linalg.norm(warm - x_star) < np.linalg.norm(x_star)
