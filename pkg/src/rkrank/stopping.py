"""Stopping rules evaluated after every Kaczmarz step.

Each rule sees the iterate right after a step together with the nodes the
step touched, so per-step bookkeeping stays proportional to the degree
wherever the rule allows it.
"""

from __future__ import annotations

import math
from typing import Protocol

import numpy as np
import numpy.typing as npt

from .errors import ConfigurationError, ParameterError
from .metrics import discordant_weight_matrix

__all__ = [
    "StoppingRule",
    "RelativeWeightChange",
    "RankErrorSettled",
    "TopKInTopM",
    "NeverStop",
    "make_rule",
]


class StoppingRule(Protocol):
    name: str

    def start(self, x: np.ndarray) -> None: ...

    def update(self, x: np.ndarray, touched: np.ndarray) -> bool: ...


class NeverStop:
    """Runs until the iteration cap."""

    name = "max-iters"

    def start(self, x: np.ndarray) -> None:
        pass

    def update(self, x: np.ndarray, touched: np.ndarray) -> bool:
        return False


class RelativeWeightChange:
    """Fires once ``‖ŵ_t - ŵ_{t-window}‖ / ‖ŵ_{t-window}‖ <= tol``.

    ``ŵ = exp(x - mean(x))``; the mean is fixed by the sum-preserving steps, so
    only touched entries of ``ŵ`` are refreshed.
    """

    name = "rel-change"

    def __init__(self, window: int = 500, tol: float = 1e-7) -> None:
        if window < 1 or tol < 0:
            raise ParameterError(f"need window >= 1 and tol >= 0, got {window}, {tol}")
        self.window = window
        self.tol = tol

    def start(self, x: np.ndarray) -> None:
        self._shift = float(x.mean())
        self._w = np.exp(x - self._shift)
        self._hist = np.empty((self.window, len(x)))
        self._norms = np.empty(self.window)
        self._hist[0] = self._w
        self._norms[0] = np.linalg.norm(self._w)
        self._t = 0

    def update(self, x: np.ndarray, touched: np.ndarray) -> bool:
        self._t += 1
        self._w[touched] = np.exp(x[touched] - self._shift)
        slot = self._t % self.window
        fired = False
        if self._t >= self.window:
            old = self._hist[slot]
            fired = bool(np.linalg.norm(self._w - old) <= self.tol * self._norms[slot])
        self._hist[slot] = self._w
        self._norms[slot] = np.linalg.norm(self._w)
        return fired


class RankErrorSettled:
    """Fires once ``|D_w(t) - D_w(t - window)| <= tol`` (needs true weights).

    ``D_w`` is maintained incrementally: a step moves only the touched nodes,
    so only pairs involving them can change status.
    """

    name = "dw-settled"

    def __init__(self, w_true: npt.ArrayLike, window: int = 500, tol: float = 1e-7,
                 resync_every: int = 1000) -> None:
        if w_true is None:
            raise ConfigurationError("the D_w stopping rule requires ground-truth weights")
        if window < 1 or tol < 0:
            raise ParameterError(f"need window >= 1 and tol >= 0, got {window}, {tol}")
        self.window = window
        self.tol = tol
        self.resync_every = resync_every
        self._pen = discordant_weight_matrix(w_true)
        self._pen_t = np.ascontiguousarray(self._pen.T)
        self._idx = np.arange(len(self._pen))

    def _behind(self, xs: np.ndarray, rows: np.ndarray, x: np.ndarray) -> np.ndarray:
        return (xs[:, None] < x[None, :]) | ((xs[:, None] == x[None, :]) & (rows[:, None] > self._idx))

    def _involving(self, rows: np.ndarray, x: np.ndarray) -> float:
        b = self._behind(x[rows], rows, x)
        pair = np.where(b, self._pen[rows], self._pen_t[rows])
        col_w = np.ones(len(x))
        col_w[rows] = 0.5
        return float((pair @ col_w).sum())

    def _full(self, x: np.ndarray) -> float:
        return float(self._pen[self._behind(x, self._idx, x)].sum())

    @property
    def value(self) -> float:
        return math.sqrt(max(self._sq, 0.0))

    def start(self, x: np.ndarray) -> None:
        self._x = x.copy()
        self._sq = self._full(self._x)
        self._hist = np.empty(self.window)
        self._hist[0] = self.value
        self._t = 0

    def update(self, x: np.ndarray, touched: np.ndarray) -> bool:
        self._t += 1
        before = self._involving(touched, self._x)
        self._x[touched] = x[touched]
        self._sq += self._involving(touched, self._x) - before
        if self._t % self.resync_every == 0:
            self._sq = self._full(self._x)
        current = self.value
        slot = self._t % self.window
        fired = False
        if self._t >= self.window:
            fired = abs(current - self._hist[slot]) <= self.tol
        self._hist[slot] = current
        return fired


class TopKInTopM:
    """Fires once the true top ``k`` items all sit in the estimated top ``m``."""

    name = "top-k-in-m"

    def __init__(self, w_true: npt.ArrayLike, k: int, m: int) -> None:
        if w_true is None:
            raise ConfigurationError("the top-K-in-M stopping rule requires ground-truth weights")
        w = np.asarray(w_true, dtype=float)
        if not 1 <= k <= m <= len(w):
            raise ParameterError(f"need 1 <= K <= M <= n, got K={k}, M={m}, n={len(w)}")
        self.k = k
        self.m = m
        self._top = np.lexsort((np.arange(len(w)), -w))[:k]
        self._idx = np.arange(len(w))

    def _check(self, x: np.ndarray) -> bool:
        # rank of each true-top item = number of items strictly ahead of it
        xt = x[self._top][:, None]
        ahead = (x[None, :] > xt) | ((x[None, :] == xt) & (self._idx < self._top[:, None]))
        return bool(np.all(ahead.sum(axis=1) < self.m))

    def start(self, x: np.ndarray) -> None:
        pass

    def update(self, x: np.ndarray, touched: np.ndarray) -> bool:
        return self._check(x)


def make_rule(
    name: str,
    *,
    window: int = 500,
    tol: float = 1e-7,
    w_true: npt.ArrayLike | None = None,
    k: int | None = None,
    m: int | None = None,
) -> StoppingRule:
    """Build a rule from its CLI name: ``rel-change``, ``dw``, ``topk`` or ``none``."""
    if name in ("rel-change", "I1"):
        return RelativeWeightChange(window, tol)
    if name in ("dw", "I3"):
        if w_true is None:
            raise ConfigurationError("stop rule 'dw' needs ground-truth weights")
        return RankErrorSettled(w_true, window, tol)
    if name in ("topk", "I4"):
        if w_true is None:
            raise ConfigurationError("stop rule 'topk' needs ground-truth weights")
        if k is None or m is None:
            raise ConfigurationError("stop rule 'topk' needs K and M")
        return TopKInTopM(w_true, k, m)
    if name == "none":
        return NeverStop()
    raise ConfigurationError(f"unknown stopping rule {name!r}")
