"""Synthetic experiment runner: graphs, data, estimators, error tables."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..baselines import rank_centrality, regularized_mle
from ..btl import ground_truth_weights, simulate_comparisons
from ..errors import ConfigurationError, NumericError
from ..graph import ComparisonGraph, erdos_renyi, is_connected, read_edge_list
from ..metrics import d_w, normalized_weight_error, ordering
from ..solver import build_system, distance_center, solve, warm_start
from ..stopping import make_rule
from .config import ExperimentConfig

__all__ = [
    "TrialRow",
    "ExperimentResult",
    "MAX_REJECTIONS",
    "trial_seeds",
    "draw_connected_graph",
    "run_trial",
    "cmd_simulate",
    "results_csv",
    "results_json",
    "write_results",
]

MAX_REJECTIONS = 100

ROW_FIELDS = ("kind", "trial", "estimator", "n", "p", "k", "weight_error", "d_w", "iterations", "stopped_by", "rejections")


@dataclass(frozen=True)
class TrialRow:
    trial: int
    estimator: str
    n: int
    p: float
    k: int
    weight_error: float
    d_w: float
    iterations: int
    stopped_by: str
    rejections: int
    wall_time: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[TrialRow]

    def summary(self) -> list[dict]:
        """Mean and standard error of each metric per ``(estimator, k)``."""
        out = []
        keys = sorted({(r.estimator, r.k) for r in self.rows}, key=lambda t: (t[0], t[1]))
        for est, k in keys:
            rows = [r for r in self.rows if r.estimator == est and r.k == k]
            for kind, stat in (("mean", _mean), ("stderr", _stderr)):
                out.append({
                    "kind": kind,
                    "estimator": est,
                    "k": k,
                    "weight_error": stat([r.weight_error for r in rows]),
                    "d_w": stat([r.d_w for r in rows]),
                    "iterations": stat([r.iterations for r in rows]),
                    "trials": len(rows),
                })
        return out

    def mean(self, metric: str, estimator: str = "RK", k: int | None = None) -> float:
        rows = [r for r in self.rows if r.estimator == estimator and (k is None or r.k == k)]
        return _mean([getattr(r, metric) for r in rows])

    def k_slope(self, estimator: str = "RK") -> float | None:
        """Least-squares slope of ``log(mean error)`` against ``log k``."""
        ks = sorted({r.k for r in self.rows if r.estimator == estimator})
        if len(ks) < 2:
            return None
        errs = [self.mean("weight_error", estimator, k) for k in ks]
        return float(np.polyfit(np.log(ks), np.log(errs), 1)[0])


def _mean(v: list[float]) -> float:
    return float(np.mean(v))


def _stderr(v: list[float]) -> float:
    return float(np.std(v, ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0


def trial_seeds(master: int, trial: int) -> list[np.random.SeedSequence]:
    """Seed sequences for one trial, derived from the master seed and the trial index only."""
    return np.random.SeedSequence(master, spawn_key=(trial,)).spawn(3)


def draw_connected_graph(n: int, p: float, rng: np.random.Generator) -> tuple[ComparisonGraph, int]:
    """Redraw ER graphs until one is connected; returns the graph and the rejection count.

    Raises:
        ConfigurationError: after ``MAX_REJECTIONS`` consecutive disconnected draws.
    """
    for rejections in range(MAX_REJECTIONS + 1):
        g = erdos_renyi(n, p, seed=rng)
        if is_connected(g)[0]:
            return g, rejections
    raise ConfigurationError(
        f"{MAX_REJECTIONS} consecutive disconnected graphs at n={n}, p={p}; "
        f"raise p above about log(n)/n = {math.log(n) / n:.4f}"
    )


def _fixed_graph(config: ExperimentConfig) -> ComparisonGraph | None:
    if config.graph_file is None:
        return None
    g = read_edge_list(config.graph_file)
    if not is_connected(g)[0]:
        raise ConfigurationError(f"graph file {config.graph_file} is not connected")
    return g


def _k_seed(parent: np.random.SeedSequence, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(parent.entropy, spawn_key=(*parent.spawn_key, k))


def run_trial(config: ExperimentConfig, trial: int, graph: ComparisonGraph | None = None) -> list[TrialRow]:
    """One trial: a graph, then data and every estimator for each ``k``."""
    g_seed, data_seed, solver_seed = trial_seeds(config.seed, trial)
    if graph is None:
        graph, rejections = draw_connected_graph(config.n, config.p, np.random.default_rng(g_seed))
        p = config.p
    else:
        rejections = 0
        p = 2.0 * graph.m / (graph.n * (graph.n - 1))
    w = np.asarray(ground_truth_weights(graph.n))
    center = distance_center(graph) if config.warm_start else None
    rows = []
    for k in config.k:
        obs = simulate_comparisons(graph, w, k, seed=_k_seed(data_seed, k), epsilon=config.epsilon)
        for est in config.estimators:
            started = time.perf_counter()
            iterations, stopped_by = 0, ""
            if est == "RK":
                system = build_system(graph, obs)
                x0 = warm_start(graph, obs, center) if center is not None else None
                rule = make_rule(config.stop, window=config.stop_window, tol=config.stop_tol,
                                 w_true=w, k=config.stop_k, m=config.stop_m)
                rep = solve(system, x0=x0, stop=rule, max_iters=config.max_iters, seed=_k_seed(solver_seed, k))
                est_w = np.asarray(rep.weights)
                iterations, stopped_by = rep.iterations, rep.stopped_by
            elif est == "RC":
                est_w = np.asarray(rank_centrality(graph, obs))
            else:
                est_w = np.asarray(regularized_mle(graph, obs, lam=config.lam))
            elapsed = time.perf_counter() - started
            err = normalized_weight_error(w, est_w)
            dw = d_w(w, ordering(est_w))
            if dw > err * (1 + 1e-12):
                raise NumericError(f"trial {trial} {est}: d_w {dw} exceeds weight error {err}")
            rows.append(TrialRow(trial, est, graph.n, p, k, err, dw, iterations, stopped_by, rejections, elapsed))
    return rows


def _run_indexed(args: tuple[ExperimentConfig, int, ComparisonGraph | None]) -> list[TrialRow]:
    return run_trial(*args)


def cmd_simulate(config: ExperimentConfig) -> ExperimentResult:
    """Run all trials, in a worker pool when ``config.workers > 1``.

    Rows come back ordered by trial index whatever the scheduling.
    """
    graph = _fixed_graph(config)
    jobs = [(config, t, graph) for t in range(config.trials)]
    if config.workers == 1 or config.trials == 1:
        chunks = [_run_indexed(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(config.workers, config.trials)) as pool:
            chunks = list(pool.map(_run_indexed, jobs))
    rows = sorted((r for c in chunks for r in c), key=lambda r: r.trial)
    return ExperimentResult(config, rows)


def _fmt(v: object) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def results_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ROW_FIELDS)
    for r in result.rows:
        writer.writerow([_fmt(v) for v in ("trial", r.trial, r.estimator, r.n, r.p, r.k, r.weight_error, r.d_w,
                                           r.iterations, r.stopped_by, r.rejections)])
    n = result.rows[0].n if result.rows else result.config.n
    p = result.rows[0].p if result.rows else result.config.p
    for s in result.summary():
        writer.writerow([_fmt(v) for v in (s["kind"], "", s["estimator"], n, p, s["k"], s["weight_error"], s["d_w"],
                                           s["iterations"], "", "")])
    return buf.getvalue()


def results_json(result: ExperimentResult) -> str:
    doc = {
        "config": result.config.as_dict(),
        "seed": result.config.seed,
        "trials": result.config.trials,
        "total_rejections": sum({r.trial: r.rejections for r in result.rows}.values()),
        "summary": result.summary(),
        "k_slope": {e: result.k_slope(e) for e in result.config.estimators},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def timings_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("trial", "estimator", "k", "wall_time"))
    for r in result.rows:
        writer.writerow((r.trial, r.estimator, r.k, f"{r.wall_time:.6f}"))
    return buf.getvalue()


def write_results(result: ExperimentResult, out: str | Path) -> list[Path]:
    """Write ``<out>`` (CSV), ``<out stem>.json`` and ``<out stem>.timing.csv``.

    Wall times live in their own file so the first two are reproducible byte
    for byte.
    """
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    paths = [out, out.with_suffix(".json"), out.with_suffix(".timing.csv")]
    for path, text in zip(paths, (results_csv(result), results_json(result), timings_csv(result))):
        path.write_text(text, encoding="utf-8")
    return paths
