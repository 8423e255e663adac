"""Comparison graphs and the implicit Laplacian built on top of them.

Edges are stored once, as ``(i, j)`` with ``i < j``, in lexicographic order.
The Laplacian is never materialized: every row is recovered from the
adjacency lists, so touching row ``i`` costs ``O(degree(i))``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
import numpy.typing as npt

from .errors import ParameterError

SeedLike = int | np.random.SeedSequence | np.random.Generator | None

__all__ = [
    "ComparisonGraph",
    "LaplacianView",
    "Spectrum",
    "erdos_renyi",
    "is_connected",
    "connected_components",
    "row_norm_sq",
    "laplacian_extreme_eigenvalues",
    "read_edge_list",
    "write_edge_list",
]


def _frozen(a: npt.ArrayLike, dtype: npt.DTypeLike) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ComparisonGraph:
    """Undirected simple graph over ``n`` items.

    Attributes:
        n: Number of items.
        edges: ``(M, 2)`` array of canonical pairs ``i < j``, sorted.
        adjacency: Neighbour array per node, ascending.
        incident: Edge index per neighbour, aligned with ``adjacency``.
        degrees: Degree per node.
    """

    n: int
    edges: np.ndarray
    adjacency: tuple[np.ndarray, ...] = field(repr=False)
    incident: tuple[np.ndarray, ...] = field(repr=False)
    degrees: np.ndarray = field(repr=False)
    _index: dict[tuple[int, int], int] = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]] | npt.ArrayLike) -> ComparisonGraph:
        """Build a graph, canonicalizing each pair to ``(min, max)``.

        Raises:
            ParameterError: when a pair repeats or is a self-loop, or a node is out of range.
        """
        if n < 1:
            raise ParameterError(f"graph needs at least one node, got n={n}")
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        e = e.reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ParameterError(f"edge endpoint out of range for n={n}")
        if np.any(e[:, 0] == e[:, 1]):
            bad = e[e[:, 0] == e[:, 1]][0]
            raise ParameterError(f"self-loop at node {int(bad[0])}")
        e = np.sort(e, axis=1)
        order = np.lexsort((e[:, 1], e[:, 0]))
        e = e[order]
        if len(e) > 1:
            dup = np.all(e[1:] == e[:-1], axis=1)
            if dup.any():
                i, j = e[1:][dup][0]
                raise ParameterError(f"duplicate edge ({int(i)}, {int(j)})")

        m = np.arange(len(e))
        ends = np.concatenate([e[:, 0], e[:, 1]])
        others = np.concatenate([e[:, 1], e[:, 0]])
        ids = np.concatenate([m, m])
        by_node = np.lexsort((others, ends))
        ends, others, ids = ends[by_node], others[by_node], ids[by_node]
        degrees = np.bincount(ends, minlength=n)
        splits = np.cumsum(degrees)[:-1]
        adjacency = tuple(_frozen(a, np.int64) for a in np.split(others, splits))
        incident = tuple(_frozen(a, np.int64) for a in np.split(ids, splits))
        index = {(int(i), int(j)): k for k, (i, j) in enumerate(e)}
        return cls(
            n=int(n),
            edges=_frozen(e, np.int64),
            adjacency=adjacency,
            incident=incident,
            degrees=_frozen(degrees, np.int64),
            _index=index,
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return int(self.degrees[i])

    def neighbors(self, i: int) -> np.ndarray:
        return self.adjacency[i]

    def edge_index(self, i: int, j: int) -> int | None:
        """Position of the pair ``{i, j}`` in ``edges`` or ``None`` when absent."""
        if i > j:
            i, j = j, i
        return self._index.get((int(i), int(j)))

    def has_edge(self, i: int, j: int) -> bool:
        return self.edge_index(i, j) is not None

    def with_edge(self, i: int, j: int) -> ComparisonGraph:
        """Copy of the graph with one more edge; indices of existing edges may shift."""
        return ComparisonGraph.from_edges(self.n, np.vstack([self.edges, [[i, j]]]))

    def laplacian(self) -> LaplacianView:
        return LaplacianView(self)


class LaplacianView:
    """Row access to ``A = L Lᵀ`` (degree minus adjacency) without forming it."""

    def __init__(self, graph: ComparisonGraph) -> None:
        self.graph = graph

    @property
    def shape(self) -> tuple[int, int]:
        return (self.graph.n, self.graph.n)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Nonzero pattern of row ``i`` as ``(columns, values)``, diagonal first."""
        nbrs = self.graph.adjacency[i]
        cols = np.concatenate([[i], nbrs])
        vals = np.concatenate([[float(self.graph.degrees[i])], -np.ones(len(nbrs))])
        return cols, vals

    def row_dot(self, i: int, x: np.ndarray) -> float:
        nbrs = self.graph.adjacency[i]
        return float(self.graph.degrees[i] * x[i] - x[nbrs].sum())

    def row_norm_sq(self, i: int) -> int:
        d = int(self.graph.degrees[i])
        return d * d + d

    def matvec(self, x: npt.ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        e = self.graph.edges
        out = self.graph.degrees * x
        out = out - np.bincount(e[:, 0], weights=x[e[:, 1]], minlength=self.graph.n)
        return out - np.bincount(e[:, 1], weights=x[e[:, 0]], minlength=self.graph.n)

    def to_dense(self) -> np.ndarray:
        """Dense copy; intended for test-scale oracles only."""
        n = self.graph.n
        a = np.diag(self.graph.degrees.astype(float))
        e = self.graph.edges
        a[e[:, 0], e[:, 1]] = -1.0
        a[e[:, 1], e[:, 0]] = -1.0
        return a


def _as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def erdos_renyi(n: int, p: float, seed: SeedLike = None) -> ComparisonGraph:
    """G(n, p): every unordered pair is present independently with probability ``p``."""
    if n < 2:
        raise ParameterError(f"n must be at least 2, got {n}")
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"edge probability must lie in (0, 1], got {p}")
    rng = _as_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return ComparisonGraph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))


def connected_components(g: ComparisonGraph) -> np.ndarray:
    """Component label per node, numbered by breadth-first discovery order."""
    labels = np.full(g.n, -1, dtype=np.int64)
    current = 0
    for root in range(g.n):
        if labels[root] >= 0:
            continue
        labels[root] = current
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                if labels[v] < 0:
                    labels[v] = current
                    queue.append(int(v))
        current += 1
    return labels


def is_connected(g: ComparisonGraph) -> tuple[bool, np.ndarray]:
    """Return ``(connected, labels)`` from a breadth-first labeling."""
    labels = connected_components(g)
    return bool(labels.max(initial=0) == 0), labels


def row_norm_sq(g: ComparisonGraph, i: int) -> int:
    """Squared norm of Laplacian row ``i``: ``degree² + degree``."""
    if not 0 <= i < g.n:
        raise ParameterError(f"node {i} out of range for n={g.n}")
    d = int(g.degrees[i])
    return d * d + d


class Spectrum(NamedTuple):
    lambda_min_nonzero: float
    lambda_max: float
    connected: bool


def _power(apply, v: np.ndarray, tol: float, max_iter: int, project: bool) -> float:
    v = v / np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        av = apply(v)
        if project:
            av = av - av.mean()
        lam = float(v @ av)
        resid = np.linalg.norm(av - lam * v)
        norm = np.linalg.norm(av)
        if norm == 0.0:
            return 0.0
        if resid <= tol * abs(lam):
            return lam
        v = av / norm
    return lam


def laplacian_extreme_eigenvalues(
    g: ComparisonGraph,
    tol: float = 1e-8,
    max_iter: int = 200_000,
    seed: SeedLike = 0,
) -> Spectrum:
    """Largest and smallest nonzero Laplacian eigenvalue by power iteration.

    The second eigenvalue comes from iterating ``lambda_max * I - A`` on the
    complement of the all-one vector. Disconnected graphs have a repeated zero
    eigenvalue; they are reported with ``lambda_min_nonzero = 0`` and
    ``connected = False``.
    """
    if g.m == 0:
        return Spectrum(0.0, 0.0, g.n == 1)
    rng = _as_rng(seed)
    lap = LaplacianView(g)
    lam_max = _power(lap.matvec, rng.standard_normal(g.n), tol, max_iter, project=False)
    connected, _ = is_connected(g)
    if not connected:
        return Spectrum(0.0, lam_max, False)
    if g.n == 2:
        return Spectrum(lam_max, lam_max, True)

    def shifted(v: np.ndarray) -> np.ndarray:
        return lam_max * v - lap.matvec(v)

    start = rng.standard_normal(g.n)
    start -= start.mean()
    mu = _power(shifted, start, tol * 1e-2, max_iter, project=True)
    return Spectrum(lam_max - mu, lam_max, True)


def write_edge_list(g: ComparisonGraph, path: str | PathLike[str]) -> None:
    lines = [f"n={g.n}"] + [f"{i} {j}" for i, j in g.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edge_list(path: str | PathLike[str]) -> ComparisonGraph:
    """Parse the ``n=<N>`` header plus one ``i j`` pair per line."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [(k + 1, line.strip()) for k, line in enumerate(text) if line.strip()]
    if not rows or not rows[0][1].startswith("n="):
        raise ParameterError(f"{path}: missing 'n=<N>' header")
    try:
        n = int(rows[0][1][2:])
    except ValueError as exc:
        raise ParameterError(f"{path}: bad header {rows[0][1]!r}") from exc
    edges = []
    for lineno, line in rows[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ParameterError(f"{path}:{lineno}: expected 'i j', got {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ParameterError(f"{path}:{lineno}: non-integer node in {line!r}") from exc
    return ComparisonGraph.from_edges(n, edges)
