"""Walker/Vose alias tables for O(1) categorical draws."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from .errors import ParameterError


class AliasTable:
    """Alias table over ``len(probs)`` outcomes.

    Outcomes with zero probability are never drawn.
    """

    def __init__(self, probs: npt.ArrayLike) -> None:
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ParameterError("probabilities must be a non-empty 1-D vector")
        if np.any(p < 0) or not np.isfinite(p).all():
            raise ParameterError("probabilities must be finite and nonnegative")
        total = p.sum()
        if total <= 0:
            raise ParameterError("probabilities sum to zero")
        p = p / total
        k = len(p)
        scaled = p * k
        prob = np.zeros(k)
        alias = np.arange(k, dtype=np.int64)
        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # leftovers are 1 up to rounding
        for i in large + small:
            prob[i] = 1.0 if p[i] > 0 else 0.0
            if p[i] == 0:
                alias[i] = int(np.flatnonzero(p)[0])
        self.probs = p
        self.prob = prob
        self.alias = alias

    def __len__(self) -> int:
        return len(self.prob)

    def draw(self, rng: np.random.Generator, size: int | None = None):
        """One outcome (``size=None``) or an array of ``size`` outcomes."""
        k = len(self.prob)
        if size is None:
            i = int(rng.integers(k))
            return i if rng.random() < self.prob[i] else int(self.alias[i])
        cols = rng.integers(k, size=size)
        coins = rng.random(size)
        return np.where(coins < self.prob[cols], cols, self.alias[cols])
