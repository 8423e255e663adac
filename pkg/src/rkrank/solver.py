"""Randomized Kaczmarz on the Laplacian system ``L y = L Lᵀ v``.

Row ``i`` of the Laplacian has ``degree(i)`` on the diagonal and ``-1`` per
neighbour, so one projection step reads and writes only ``i`` and its
neighbours. Rows are sampled with probability proportional to their squared
norm ``degree² + degree`` through an alias table built once per system.
"""

from __future__ import annotations

import time
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt

from .alias import AliasTable
from .btl import EdgeObservations, WeightVector
from .errors import ConfigurationError, DegenerateEstimateError, NumericError, ParameterError
from .graph import ComparisonGraph, LaplacianView, SeedLike, connected_components
from .stopping import RelativeWeightChange, StoppingRule

__all__ = [
    "LinearSystem",
    "SolverState",
    "SolveReport",
    "build_system",
    "kaczmarz_step",
    "solve",
    "warm_start",
    "distance_center",
    "tracking_step",
    "weights_from_iterate",
    "DEFAULT_MAX_ITERS",
]

DEFAULT_MAX_ITERS = 200_000
_DRAW_BLOCK = 4096

Endpoint = Literal["min", "max", "random"]


@dataclass(eq=False)
class LinearSystem:
    """Right-hand side ``b = L y`` plus the row-sampling distribution.

    Attributes:
        graph: The comparison graph; the Laplacian is implied by it.
        y: Logit per canonical edge, seen from the lower-index endpoint.
        rhs: ``b_i = Σ_{j ∈ N(i)} y_ij``.
        probs: Row-sampling probabilities ``(d² + d) / Σ (d² + d)``.
    """

    graph: ComparisonGraph
    y: np.ndarray
    rhs: np.ndarray = field(init=False)
    probs: np.ndarray = field(init=False)
    sampler: AliasTable = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.y = np.array(self.y, dtype=float)
        if len(self.y) != self.graph.m:
            raise ParameterError(f"{len(self.y)} logits for {self.graph.m} edges")
        if self.graph.m == 0:
            raise ParameterError("the comparison graph has no edges")
        bad = ~np.isfinite(self.y)
        if bad.any():
            i, j = self.graph.edges[np.flatnonzero(bad)[0]]
            raise DegenerateEstimateError(f"edge ({i}, {j}) has a non-finite logit", edge=(int(i), int(j)))
        e = self.graph.edges
        n = self.graph.n
        self.rhs = np.bincount(e[:, 0], weights=self.y, minlength=n) - np.bincount(
            e[:, 1], weights=self.y, minlength=n
        )
        d = self.graph.degrees.astype(float)
        norms = d * d + d
        self.probs = norms / norms.sum()
        self.sampler = AliasTable(self.probs)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def laplacian(self) -> LaplacianView:
        return LaplacianView(self.graph)

    def residual(self, i: int, x: np.ndarray) -> float:
        """``b_i - ⟨a_i, x⟩``."""
        nbrs = self.graph.adjacency[i]
        return float(self.rhs[i] - self.graph.degrees[i] * x[i] + x[nbrs].sum())

    def set_logit(self, edge: int, value: float) -> None:
        """Replace one edge logit and patch the two affected entries of ``b``."""
        if not np.isfinite(value):
            raise ParameterError(f"non-finite logit for edge {edge}")
        i, j = self.graph.edges[edge]
        delta = value - self.y[edge]
        self.y[edge] = value
        self.rhs[i] += delta
        self.rhs[j] -= delta


def build_system(g: ComparisonGraph, obs: EdgeObservations) -> LinearSystem:
    """Assemble ``b = L y`` and the sampling distribution from tallies.

    Raises:
        DegenerateEstimateError: naming the edge whose logit is infinite.
    """
    return LinearSystem(g, obs.aligned_logits(g))


@dataclass(eq=False)
class SolverState:
    """Iterate plus the random stream that picks rows.

    Attributes:
        x: Current log-weight estimate.
        rng: Source of the row choices.
        iteration: Steps taken so far.
        operations: Entries of ``x`` read or written so far (``degree + 1`` per step).
    """

    x: np.ndarray
    rng: np.random.Generator
    iteration: int = 0
    operations: int = 0
    _buffer: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64), repr=False)
    _pos: int = field(default=0, repr=False)

    @classmethod
    def create(cls, n: int, x0: npt.ArrayLike | None = None, seed: SeedLike = None) -> SolverState:
        x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
        if x.shape != (n,):
            raise ParameterError(f"initial iterate has shape {x.shape}, expected ({n},)")
        if not np.isfinite(x).all():
            raise ParameterError("initial iterate must be finite")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        return cls(x=x, rng=rng)

    def next_row(self, sampler: AliasTable) -> int:
        if self._pos >= len(self._buffer):
            self._buffer = sampler.draw(self.rng, _DRAW_BLOCK)
            self._pos = 0
        i = int(self._buffer[self._pos])
        self._pos += 1
        return i


@dataclass
class SolveReport:
    """Outcome of :func:`solve`.

    ``error_trace[t]`` is ``‖x(t) - x*‖`` when a reference solution was given.
    """

    x: np.ndarray
    iterations: int
    stopped_by: str
    wall_time: float
    ops_per_iteration: float
    isolated: np.ndarray
    connected: bool
    error_trace: np.ndarray | None = None

    @property
    def weights(self) -> WeightVector:
        return weights_from_iterate(self.x)


def _project(system: LinearSystem, x: np.ndarray, i: int, relax: float = 1.0) -> np.ndarray:
    nbrs = system.graph.adjacency[i]
    d = int(system.graph.degrees[i])
    r = system.rhs[i] - d * x[i] + x[nbrs].sum()
    scale = relax * r / (d * (d + 1))
    x[i] += scale * d
    x[nbrs] -= scale
    return nbrs


def kaczmarz_step(system: LinearSystem, state: SolverState, node: int | None = None) -> SolverState:
    """Project the iterate onto the hyperplane of one Laplacian row.

    The row is drawn from ``system.probs`` unless ``node`` forces it.
    """
    i = state.next_row(system.sampler) if node is None else node
    if system.graph.degrees[i] == 0:
        raise ParameterError(f"node {i} is isolated; its row is zero")
    nbrs = _project(system, state.x, i)
    state.iteration += 1
    state.operations += len(nbrs) + 1
    return state


def solve(
    system: LinearSystem,
    x0: npt.ArrayLike | None = None,
    stop: StoppingRule | None = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    seed: SeedLike = None,
    x_star: npt.ArrayLike | None = None,
) -> SolveReport:
    """Iterate Kaczmarz steps until ``stop`` fires or ``max_iters`` is reached.

    The coordinate sum of every connected component is preserved, so on a
    disconnected graph each component converges to the solution sharing the
    initial component sum. Isolated nodes keep their initial value.

    Args:
        system: Output of :func:`build_system`.
        x0: Initial iterate; zeros by default.
        stop: Stopping rule; relative weight change over 500 steps below
            ``1e-7`` by default.
        max_iters: Hard cap on the number of steps.
        seed: Seed of the row-sampling stream.
        x_star: Optional reference solution; enables ``error_trace``.
    """
    if max_iters < 1:
        raise ParameterError(f"max_iters must be at least 1, got {max_iters}")
    g = system.graph
    labels = connected_components(g)
    isolated = np.flatnonzero(g.degrees == 0)
    connected = bool(labels.max() == 0)
    if not connected:
        warnings.warn(
            f"comparison graph has {labels.max() + 1} components; each converges "
            "separately and scores are not comparable across components",
            stacklevel=2,
        )
    state = SolverState.create(g.n, x0, seed)
    stop = RelativeWeightChange() if stop is None else stop
    trace = None
    if x_star is not None:
        ref = np.asarray(x_star, dtype=float)
        trace = [float(np.linalg.norm(state.x - ref))]
    stop.start(state.x)

    x = state.x
    started = time.perf_counter()
    stopped_by = "max-iters"
    for _ in range(max_iters):
        i = state.next_row(system.sampler)
        nbrs = _project(system, x, i)
        state.iteration += 1
        state.operations += len(nbrs) + 1
        if trace is not None:
            trace.append(float(np.linalg.norm(x - ref)))
        touched = np.append(nbrs, i)
        if stop.update(x, touched):
            stopped_by = stop.name
            break
    elapsed = time.perf_counter() - started
    if not np.isfinite(x).all():
        raise NumericError("iterate became non-finite")
    return SolveReport(
        x=x,
        iterations=state.iteration,
        stopped_by=stopped_by,
        wall_time=elapsed,
        ops_per_iteration=state.operations / max(state.iteration, 1),
        isolated=isolated,
        connected=connected,
        error_trace=None if trace is None else np.asarray(trace),
    )


def distance_center(g: ComparisonGraph) -> int:
    """Node of minimum eccentricity (ties to the lowest index).

    Eccentricity is taken within the node's own component.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import shortest_path

    e = g.edges
    adj = coo_matrix((np.ones(g.m), (e[:, 0], e[:, 1])), shape=(g.n, g.n))
    dist = shortest_path(adj, directed=False, unweighted=True)
    dist[np.isinf(dist)] = -1
    ecc = dist.max(axis=1)
    ecc[g.degrees == 0] = np.inf
    return int(np.argmin(ecc))


def warm_start(g: ComparisonGraph, obs: EdgeObservations | npt.ArrayLike, ref: int) -> np.ndarray:
    """Breadth-first initial iterate: ``x_ref = 0`` and ``x_j = x_i - y_ij`` down the tree.

    ``obs`` may also be a logit vector aligned with ``g.edges``. Nodes outside
    the component of ``ref`` stay at 0.
    """
    if not 0 <= ref < g.n:
        raise ParameterError(f"reference node {ref} out of range")
    y = obs.aligned_logits(g) if isinstance(obs, EdgeObservations) else np.asarray(obs, dtype=float)
    x = np.zeros(g.n)
    seen = np.zeros(g.n, dtype=bool)
    seen[ref] = True
    queue = deque([ref])
    while queue:
        i = queue.popleft()
        for j, m in zip(g.adjacency[i], g.incident[i]):
            if seen[j]:
                continue
            seen[j] = True
            y_ij = y[m] if i < j else -y[m]
            x[j] = x[i] - y_ij
            queue.append(int(j))
    return x


def tracking_step(
    system: LinearSystem,
    state: SolverState,
    obs: EdgeObservations,
    event: tuple[int, int, int],
    c: float,
    endpoint: Endpoint = "min",
) -> tuple[LinearSystem, SolverState]:
    """Constant-step update driven by one new observation.

    The tally of the observed pair is updated, its logit refreshed in the
    system, and a relaxed projection ``x += c · r_k / ‖a_k‖² · a_k`` is applied
    at one endpoint ``k`` of the pair. With ``c = 1`` this is a plain
    Kaczmarz step on row ``k``; with ``c = 0`` the iterate is unchanged.

    A pair never seen before is inserted, which rebuilds the system; the
    returned system must be used from then on.
    """
    if not 0.0 <= c <= 1.0:
        raise ParameterError(f"step size must lie in [0, 1], got {c}")
    i, j, outcome = event
    result = obs.record(i, j, outcome)
    if result.inserted or not system.graph.has_edge(i, j):
        g = system.graph if system.graph.has_edge(i, j) else system.graph.with_edge(i, j)
        system = build_system(g, obs)
    else:
        lo, hi = (i, j) if i < j else (j, i)
        system.set_logit(system.graph.edge_index(lo, hi), obs.logit(lo, hi))
    if endpoint == "min":
        k = min(i, j)
    elif endpoint == "max":
        k = max(i, j)
    elif endpoint == "random":
        k = i if state.rng.random() < 0.5 else j
    else:
        raise ConfigurationError(f"unknown endpoint rule {endpoint!r}")
    if c > 0.0:
        nbrs = _project(system, state.x, k, relax=c)
        state.operations += len(nbrs) + 1
    state.iteration += 1
    return system, state


def weights_from_iterate(x: npt.ArrayLike) -> WeightVector:
    """``exp(x - mean(x))``: weights with geometric mean 1."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise NumericError("iterate contains non-finite values")
    with np.errstate(over="raise"):
        try:
            w = np.exp(x - x.mean())
        except FloatingPointError as exc:
            raise NumericError("log-weights span too large a range to exponentiate") from exc
    if np.any(w == 0):
        raise NumericError("log-weights span too large a range to exponentiate")
    return WeightVector(w)
