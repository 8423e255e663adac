"""Drifting-weights scenario for the constant-step tracking update."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from ..btl import EdgeObservations
from ..metrics import d_w, ordering
from ..solver import SolverState, build_system, tracking_step
from .config import TrackConfig
from .simulate import draw_connected_graph

__all__ = ["TrackResult", "cmd_track", "track_csv", "track_json"]


@dataclass
class TrackResult:
    config: TrackConfig
    d_w: np.ndarray  # entry t: after t events; entry 0 is the initial iterate

    @property
    def steady_state(self) -> float:
        """Mean ``D_w`` over the last fifth of the trace."""
        tail = max(1, len(self.d_w) // 5)
        return float(self.d_w[-tail:].mean())


def cmd_track(config: TrackConfig) -> TrackResult:
    """Stream single comparisons on random edges while the true weights drift.

    Tallies start empty; ``epsilon`` keeps every logit finite (zero at first).
    After each event the true log-weights take an independent Gaussian step of
    size ``sigma``, and ``D_w`` is measured against the new true weights.
    """
    graph_seed, event_seed, solver_seed = np.random.SeedSequence(config.seed).spawn(3)
    g, _ = draw_connected_graph(config.n, config.p, np.random.default_rng(graph_seed))
    rng = np.random.default_rng(event_seed)
    theta = np.arange(1, g.n + 1) / g.n * np.log(10.0)
    obs = EdgeObservations(g.edges, np.zeros((g.m, 2)), config.epsilon)
    system = build_system(g, obs)
    state = SolverState.create(g.n, seed=solver_seed)
    trace = np.empty(config.events + 1)
    trace[0] = _dw(theta, state.x)
    edges = rng.integers(g.m, size=config.events)
    for t in range(config.events):
        i, j = (int(v) for v in g.edges[edges[t]])
        p_ij = 1.0 / (1.0 + np.exp(theta[j] - theta[i]))
        outcome = int(rng.random() < p_ij)
        system, state = tracking_step(system, state, obs, (i, j, outcome), config.c, config.endpoint)
        if config.sigma > 0:
            theta += config.sigma * rng.standard_normal(g.n)
        trace[t + 1] = _dw(theta, state.x)
    return TrackResult(config, trace)


def _dw(theta: np.ndarray, x: np.ndarray) -> float:
    return d_w(np.exp(theta - theta.mean()), ordering(x))


def track_csv(result: TrackResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("event", "d_w"))
    for t, v in enumerate(result.d_w):
        writer.writerow((t, repr(float(v))))
    return buf.getvalue()


def track_json(result: TrackResult) -> str:
    doc = {
        "config": result.config.as_dict(),
        "seed": result.config.seed,
        "initial_d_w": float(result.d_w[0]),
        "final_d_w": float(result.d_w[-1]),
        "steady_state_d_w": result.steady_state,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
