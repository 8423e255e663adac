"""Head-to-head match files and ranking tables."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..baselines import rank_centrality, regularized_mle
from ..btl import EdgeObservations
from ..errors import ConfigurationError, MatchFileError
from ..graph import ComparisonGraph
from ..metrics import win_ratio
from ..solver import DEFAULT_MAX_ITERS, build_system, solve
from ..stopping import RelativeWeightChange

__all__ = [
    "MatchRecord",
    "RankingRow",
    "parse_match_file",
    "parse_match_text",
    "build_observations",
    "cmd_rank",
    "ranking_csv",
]


@dataclass(frozen=True)
class MatchRecord:
    name_a: str
    name_b: str
    wins_a: int
    wins_b: int

    def __post_init__(self) -> None:
        if self.name_a == self.name_b:
            raise MatchFileError(f"self-match for {self.name_a!r}")
        if self.wins_a < 0 or self.wins_b < 0:
            raise MatchFileError("win counts must be nonnegative")


@dataclass(frozen=True)
class RankingRow:
    rank: int
    name: str
    degree: int
    win_ratio: float
    weight: float


def _count(field: str) -> int | None:
    try:
        return int(field)
    except ValueError:
        return None


def parse_match_text(text: str) -> list[MatchRecord]:
    """Parse ``name_a,name_b,wins_a,wins_b`` lines (see :func:`parse_match_file`)."""
    records = []
    rows = csv.reader(io.StringIO(text))
    for lineno, fields in enumerate(rows, start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != 4:
            raise MatchFileError(f"expected 4 fields, got {len(fields)}", line=lineno)
        a, b = fields[0].strip(), fields[1].strip()
        wa, wb = _count(fields[2].strip()), _count(fields[3].strip())
        if wa is None or wb is None:
            if lineno == 1 and not records:
                continue  # header
            raise MatchFileError(f"non-integer win count in {fields[2:]!r}", line=lineno)
        if not a or not b:
            raise MatchFileError("empty player name", line=lineno)
        try:
            records.append(MatchRecord(a, b, wa, wb))
        except MatchFileError as exc:
            raise MatchFileError(str(exc), line=lineno) from None
    if not records:
        raise MatchFileError("match file contains no records")
    return records


def parse_match_file(path: str | Path) -> list[MatchRecord]:
    """Read a UTF-8 match file.

    One record per line, ``name_a,name_b,wins_a,wins_b``. A first line whose
    count fields are not integers is taken as a header. Blank lines are
    skipped.

    Raises:
        MatchFileError: with the offending line number.
    """
    return parse_match_text(Path(path).read_text(encoding="utf-8"))


def build_observations(
    records: list[MatchRecord], epsilon: float
) -> tuple[list[str], ComparisonGraph, EdgeObservations]:
    """Intern names in first-seen order and merge repeated pairs (with a warning)."""
    index: dict[str, int] = {}
    for r in records:
        for name in (r.name_a, r.name_b):
            index.setdefault(name, len(index))
    tallies: dict[tuple[int, int], list[float]] = {}
    for r in records:
        i, j = index[r.name_a], index[r.name_b]
        lo, hi, w_lo, w_hi = (i, j, r.wins_a, r.wins_b) if i < j else (j, i, r.wins_b, r.wins_a)
        if (lo, hi) in tallies:
            warnings.warn(f"duplicate pair {r.name_a!r} vs {r.name_b!r}; tallies merged", stacklevel=2)
            tallies[(lo, hi)][0] += w_lo
            tallies[(lo, hi)][1] += w_hi
        else:
            tallies[(lo, hi)] = [w_lo, w_hi]
    pairs = [p for p, t in tallies.items() if t[0] + t[1] > 0]
    g = ComparisonGraph.from_edges(len(index), pairs)
    wins = np.array([tallies[(int(i), int(j))] for i, j in g.edges], dtype=float).reshape(-1, 2)
    names = sorted(index, key=index.__getitem__)
    return names, g, EdgeObservations(g.edges, wins, epsilon)


def cmd_rank(
    records: list[MatchRecord],
    epsilon: float = 1.0,
    estimator: str = "RK",
    lam: float = 0.0,
    seed: int = 0,
    stop_window: int = 500,
    stop_tol: float = 1e-10,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> list[RankingRow]:
    """Rank players by estimated weight, heaviest first.

    Weights have geometric mean 1. Pairs whose tallies are both zero carry no
    information and are left out of the graph.
    """
    estimator = estimator.upper()
    names, g, obs = build_observations(records, epsilon)
    if estimator == "RK":
        rep = solve(build_system(g, obs), stop=RelativeWeightChange(stop_window, stop_tol),
                    max_iters=max_iters, seed=seed)
        w = np.asarray(rep.weights)
    elif estimator == "RC":
        w = np.asarray(rank_centrality(g, obs))
    elif estimator == "MLE":
        w = np.asarray(regularized_mle(g, obs, lam=lam))
    else:
        raise ConfigurationError(f"unknown estimator {estimator!r}; choose from RK, RC, MLE")
    order = np.lexsort((np.arange(g.n), -w))
    rows = []
    for rank, i in enumerate(order, start=1):
        ratio = win_ratio(obs, int(i)) if g.degrees[i] > 0 else math.nan
        rows.append(RankingRow(rank, names[i], int(g.degrees[i]), ratio, float(w[i])))
    return rows


def ranking_csv(rows: list[RankingRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("rank", "name", "degree", "win_ratio", "weight"))
    for r in rows:
        writer.writerow((r.rank, r.name, r.degree, f"{r.win_ratio:.6g}", f"{r.weight:.6g}"))
    return buf.getvalue()
