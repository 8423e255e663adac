"""Weight and ranking error metrics."""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt

from .btl import EdgeObservations
from .errors import ParameterError

__all__ = [
    "ordering",
    "normalized_weight_error",
    "d_w",
    "discordant_weight_matrix",
    "top_k_in_m",
    "win_ratio",
]


def ordering(scores: npt.ArrayLike) -> np.ndarray:
    """Rank position per item, 1 = best; ties go to the lower item index."""
    s = np.asarray(scores, dtype=float)
    order = np.lexsort((np.arange(len(s)), -s))
    pos = np.empty(len(s), dtype=np.int64)
    pos[order] = np.arange(1, len(s) + 1)
    return pos


def normalized_weight_error(w_true: npt.ArrayLike, w_est: npt.ArrayLike) -> float:
    """``‖w - c·ŵ‖ / ‖w‖`` with ``c = ⟨w, ŵ⟩ / ‖ŵ‖²`` the best multiplicative alignment."""
    w = np.asarray(w_true, dtype=float)
    v = np.asarray(w_est, dtype=float)
    if w.shape != v.shape:
        raise ParameterError(f"length mismatch: {w.shape} vs {v.shape}")
    c = float(w @ v) / float(v @ v)
    return float(np.linalg.norm(w - c * v) / np.linalg.norm(w))


def discordant_weight_matrix(w_true: npt.ArrayLike) -> np.ndarray:
    """``P[a, b] = (w_a - w_b)² / (2n‖w‖²)`` where ``w_a > w_b``, else 0.

    ``d_w`` is the square root of the sum of ``P[a, b]`` over pairs where ``a``
    is ranked behind ``b``. Precomputing it lets stopping rules reuse it.
    """
    w = np.asarray(w_true, dtype=float)
    diff = w[:, None] - w[None, :]
    pen = np.where(diff > 0, diff * diff, 0.0)
    return pen / (2.0 * len(w) * float(w @ w))


def d_w(w_true: npt.ArrayLike, sigma: npt.ArrayLike) -> float:
    """Weighted discordance between true weights and an ordering.

    Args:
        w_true: True positive weights.
        sigma: Rank positions from :func:`ordering` (1 = best).

    Returns:
        ``sqrt(Σ (w_a - w_b)² / (2n‖w‖²))`` over pairs whose weight order
        disagrees with ``sigma``. Pairs with equal weight contribute nothing.
    """
    w = np.asarray(w_true, dtype=float)
    pos = np.asarray(sigma)
    if w.shape != pos.shape:
        raise ParameterError(f"length mismatch: {w.shape} vs {pos.shape}")
    pen = discordant_weight_matrix(w)
    behind = pos[:, None] > pos[None, :]
    return math.sqrt(float(pen[behind].sum()))


def top_k_in_m(sigma_true: npt.ArrayLike, sigma_est: npt.ArrayLike, k: int, m: int) -> bool:
    """True iff every item in the true top ``k`` is in the estimated top ``m``."""
    t = np.asarray(sigma_true)
    e = np.asarray(sigma_est)
    if t.shape != e.shape:
        raise ParameterError(f"length mismatch: {t.shape} vs {e.shape}")
    if not 1 <= k <= m <= len(t):
        raise ParameterError(f"need 1 <= K <= M <= n, got K={k}, M={m}, n={len(t)}")
    return bool(np.all(e[t <= k] <= m))


def win_ratio(obs: EdgeObservations, i: int) -> float:
    """Total wins over total losses for item ``i``; ``inf`` when it never lost."""
    lo = obs.edges[:, 0] == i
    hi = obs.edges[:, 1] == i
    wins = obs.wins[lo, 0].sum() + obs.wins[hi, 1].sum()
    losses = obs.wins[lo, 1].sum() + obs.wins[hi, 0].sum()
    if wins + losses == 0:
        raise ParameterError(f"item {i} has no comparisons")
    if losses == 0:
        return math.inf
    return float(wins / losses)
