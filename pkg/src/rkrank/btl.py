"""Bradley-Terry-Luce outcome simulation and preference estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from .errors import DegenerateEstimateError, ParameterError
from .graph import ComparisonGraph, SeedLike

__all__ = [
    "WeightVector",
    "EdgeObservations",
    "RecordResult",
    "ground_truth_weights",
    "preference_probability",
    "simulate_comparisons",
    "estimate_probability",
    "logit",
    "update_running_estimate",
]


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Strictly positive item scores.

    Behaves like a read-only 1-D array under ``np.asarray``.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.values, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ParameterError("weights must be a non-empty 1-D vector")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ParameterError("weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "values", w)

    def __array__(self, dtype: npt.DTypeLike = None, copy: bool | None = None) -> np.ndarray:
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):  # noqa: ANN001
        return self.values[i]

    @property
    def log(self) -> np.ndarray:
        return np.log(self.values)

    @property
    def dynamic_range(self) -> float:
        return float(self.values.max() / self.values.min())

    def normalized(self) -> WeightVector:
        """Rescaled so the geometric mean is 1."""
        return WeightVector(np.exp(self.log - self.log.mean()))


def ground_truth_weights(n: int) -> WeightVector:
    """Experiment weights ``10**(i/n)`` for ``i = 1..n``; dynamic range 10."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    return WeightVector(10.0 ** (np.arange(1, n + 1) / n))


def preference_probability(w: npt.ArrayLike, i: int, j: int) -> float:
    """Probability that item ``i`` is preferred over ``j``: ``w_i / (w_i + w_j)``."""
    if i == j:
        raise ParameterError("an item cannot be compared with itself")
    w = np.asarray(w, dtype=float)
    return float(w[i] / (w[i] + w[j]))


def estimate_probability(wins_ij: float, wins_ji: float, epsilon: float = 0.0) -> float:
    """Regularized win fraction ``(wins_ij + ε) / (wins_ij + wins_ji + 2ε)``.

    With ``epsilon = 0`` this is the plain empirical frequency.

    Raises:
        DegenerateEstimateError: if ``epsilon = 0`` and either count is zero.
    """
    if wins_ij < 0 or wins_ji < 0:
        raise ParameterError("win counts must be nonnegative")
    if epsilon < 0:
        raise ParameterError(f"epsilon must be nonnegative, got {epsilon}")
    if epsilon == 0 and (wins_ij == 0 or wins_ji == 0):
        raise DegenerateEstimateError(
            f"tally ({wins_ij}, {wins_ji}) is one-sided; use epsilon > 0"
        )
    return (wins_ij + epsilon) / (wins_ij + wins_ji + 2.0 * epsilon)


def logit(p: float) -> float:
    """``log(p) - log(1 - p)``, i.e. ``-log(1/p - 1)``."""
    if not 0.0 < p < 1.0:
        raise DegenerateEstimateError(f"logit undefined at p={p}")
    return math.log(p) - math.log1p(-p)


class RecordResult(NamedTuple):
    edge_index: int
    inserted: bool


class EdgeObservations:
    """Win tallies per canonical edge ``(i, j)``, ``i < j``.

    ``wins[m, 0]`` counts wins of the lower-index item, ``wins[m, 1]`` of the
    higher one. Logits ``y_ij = log(wins_ij + ε) - log(wins_ji + ε)`` are cached
    and refreshed lazily after :meth:`record`; the reverse direction is always
    the exact negation.
    """

    def __init__(
        self,
        edges: npt.ArrayLike,
        wins: npt.ArrayLike,
        epsilon: float = 0.0,
    ) -> None:
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        wins = np.asarray(wins, dtype=float).reshape(-1, 2)
        if len(edges) != len(wins):
            raise ParameterError("edges and wins differ in length")
        if np.any(edges[:, 0] >= edges[:, 1]):
            raise ParameterError("edges must be canonical pairs with i < j")
        if np.any(wins < 0):
            raise ParameterError("win counts must be nonnegative")
        if epsilon < 0:
            raise ParameterError(f"epsilon must be nonnegative, got {epsilon}")
        self.edges = edges.copy()
        self.wins = wins.copy()
        self.epsilon = float(epsilon)
        self._index = {(int(i), int(j)): m for m, (i, j) in enumerate(self.edges)}
        if len(self._index) != len(self.edges):
            raise ParameterError("duplicate edge in observations")
        self._y: np.ndarray | None = None
        self._stale: set[int] = set()

    @classmethod
    def empty(cls, epsilon: float = 0.0) -> EdgeObservations:
        return cls(np.empty((0, 2), dtype=np.int64), np.empty((0, 2)), epsilon)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def total_comparisons(self) -> float:
        return float(self.wins.sum())

    def edge_index(self, i: int, j: int) -> int | None:
        if i > j:
            i, j = j, i
        return self._index.get((int(i), int(j)))

    def tally(self, i: int, j: int) -> tuple[float, float]:
        """``(wins of i over j, wins of j over i)``; zeros for an unseen pair."""
        m = self.edge_index(i, j)
        if m is None:
            return (0.0, 0.0)
        a, b = self.wins[m]
        return (float(a), float(b)) if i < j else (float(b), float(a))

    def with_epsilon(self, epsilon: float) -> EdgeObservations:
        return EdgeObservations(self.edges, self.wins, epsilon)

    def probabilities(self) -> np.ndarray:
        """Estimated probability that the lower-index endpoint wins, per edge."""
        a, b = self.wins[:, 0], self.wins[:, 1]
        eps = self.epsilon
        with np.errstate(invalid="ignore", divide="ignore"):
            return (a + eps) / (a + b + 2.0 * eps)

    def _compute(self, rows: np.ndarray | slice) -> np.ndarray:
        a = self.wins[rows, 0] + self.epsilon
        b = self.wins[rows, 1] + self.epsilon
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(a) - np.log(b)

    def logits(self) -> np.ndarray:
        """Logit per canonical edge (lower-index item's perspective).

        Raises:
            DegenerateEstimateError: naming the first edge with a one-sided tally
                when ``epsilon = 0``.
        """
        if self._y is None or len(self._y) != len(self.edges):
            self._y = self._compute(slice(None))
            self._stale.clear()
        elif self._stale:
            rows = np.fromiter(self._stale, dtype=np.int64)
            self._y[rows] = self._compute(rows)
            self._stale.clear()
        bad = ~np.isfinite(self._y)
        if bad.any():
            m = int(np.flatnonzero(bad)[0])
            i, j = (int(v) for v in self.edges[m])
            a, b = self.wins[m]
            raise DegenerateEstimateError(
                f"edge ({i}, {j}) has tally ({a:g}, {b:g}) and epsilon={self.epsilon:g}; "
                "its logit is infinite, use epsilon > 0",
                edge=(i, j),
            )
        return self._y.copy()

    def logit(self, i: int, j: int) -> float:
        """Oriented logit ``y_ij``; ``logit(j, i) == -logit(i, j)`` exactly."""
        m = self.edge_index(i, j)
        if m is None:
            raise ParameterError(f"no observations for pair ({i}, {j})")
        y = float(self._compute(np.array([m]))[0])
        if not math.isfinite(y):
            raise DegenerateEstimateError(f"edge ({min(i, j)}, {max(i, j)}) is one-sided", edge=(min(i, j), max(i, j)))
        return y if i < j else -y

    def record(self, i: int, j: int, outcome: int, count: float = 1) -> RecordResult:
        """Add ``count`` outcomes for the pair; ``outcome = 1`` means ``i`` won."""
        if i == j:
            raise ParameterError("an item cannot be compared with itself")
        if outcome not in (0, 1):
            raise ParameterError(f"outcome must be 0 or 1, got {outcome}")
        m = self.edge_index(i, j)
        inserted = m is None
        if inserted:
            lo, hi = (i, j) if i < j else (j, i)
            m = len(self.edges)
            self.edges = np.vstack([self.edges, [[lo, hi]]])
            self.wins = np.vstack([self.wins, [[0.0, 0.0]]])
            self._index[(int(lo), int(hi))] = m
            self._y = None
        i_won = outcome == 1
        col = 0 if (i < j) == i_won else 1
        self.wins[m, col] += count
        self._stale.add(m)
        return RecordResult(m, inserted)

    def aligned_logits(self, g: ComparisonGraph) -> np.ndarray:
        """Logits ordered like ``g.edges``; every graph edge must be observed."""
        y = self.logits()
        if len(self.edges) == g.m and np.array_equal(self.edges, g.edges):
            return y
        order = np.empty(g.m, dtype=np.int64)
        for k, (i, j) in enumerate(g.edges):
            m = self._index.get((int(i), int(j)))
            if m is None:
                raise ParameterError(f"graph edge ({i}, {j}) has no observations")
            order[k] = m
        return y[order]

    def aligned_wins(self, g: ComparisonGraph) -> np.ndarray:
        if len(self.edges) == g.m and np.array_equal(self.edges, g.edges):
            return self.wins
        rows = [self._index[(int(i), int(j))] for i, j in g.edges]
        return self.wins[rows]


def update_running_estimate(obs: EdgeObservations, i: int, j: int, outcome: int) -> RecordResult:
    """Fold one new outcome into the running tallies.

    An unseen pair is inserted; ``RecordResult.inserted`` reports that case.
    """
    return obs.record(i, j, outcome)


def _edge_stream(seed: np.random.SeedSequence, i: int, j: int) -> np.random.Generator:
    child = np.random.SeedSequence(seed.entropy, spawn_key=(*seed.spawn_key, i, j))
    return np.random.Generator(np.random.PCG64(child))


def simulate_comparisons(
    g: ComparisonGraph,
    w: npt.ArrayLike,
    k: int,
    seed: SeedLike = None,
    epsilon: float = 0.0,
) -> EdgeObservations:
    """Draw ``k`` Bernoulli(``p_ij``) outcomes on every edge of ``g``.

    Each edge draws from its own stream derived from ``(seed, i, j)``, so an
    edge's outcomes do not depend on which other edges exist.
    """
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    w = np.asarray(w, dtype=float)
    if len(w) != g.n:
        raise ParameterError(f"weight vector has length {len(w)}, graph has {g.n} nodes")
    if isinstance(seed, np.random.Generator):
        seed = np.random.SeedSequence(int(seed.integers(2**63)))
    elif not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    i, j = g.edges[:, 0], g.edges[:, 1]
    p = w[i] / (w[i] + w[j])
    wins = np.empty(g.m, dtype=np.int64)
    for m in range(g.m):
        wins[m] = _edge_stream(seed, int(i[m]), int(j[m])).binomial(k, p[m])
    return EdgeObservations(g.edges, np.column_stack([wins, k - wins]), epsilon)
