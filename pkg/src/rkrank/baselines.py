"""Reference estimators: Rank Centrality and (regularized) maximum likelihood."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components
from scipy.special import expit, log_expit

from .btl import EdgeObservations, WeightVector
from .errors import NumericError, ParameterError
from .graph import ComparisonGraph, is_connected

__all__ = ["transition_matrix", "rank_centrality", "regularized_mle", "mle_objective"]


def transition_matrix(g: ComparisonGraph, obs: EdgeObservations, epsilon: float | None = None) -> sp.csr_matrix:
    """Row-stochastic walk that moves from ``i`` to ``j`` with probability ``p̂_ji / d_max``.

    The remaining mass of each row stays on the diagonal.
    """
    if epsilon is not None:
        obs = obs.with_epsilon(epsilon)
    wins = obs.aligned_wins(g)
    eps = obs.epsilon
    a, b = wins[:, 0], wins[:, 1]
    total = a + b + 2.0 * eps
    if np.any(total <= 0):
        raise ParameterError("an edge has no comparisons and epsilon = 0")
    p_lo = (a + eps) / total  # lower-index endpoint wins
    d_max = float(g.degrees.max())
    i, j = g.edges[:, 0], g.edges[:, 1]
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    vals = np.concatenate([(1.0 - p_lo) / d_max, p_lo / d_max])
    off = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    diag = 1.0 - np.asarray(off.sum(axis=1)).ravel()
    return (off + sp.diags(diag)).tocsr()


def _wins_strongly_connected(g: ComparisonGraph, wins: np.ndarray, eps: float = 0.0) -> bool:
    """Whether every item reaches every other along ``beat`` edges.

    Fails exactly when some group of items never beats anyone outside it; then
    the MLE runs off to infinity and the walk leaves that group with zero mass.
    """
    i, j = g.edges[:, 0], g.edges[:, 1]
    fwd = wins[:, 0] + eps > 0  # i beat j at least once
    bwd = wins[:, 1] + eps > 0
    rows = np.concatenate([i[fwd], j[bwd]])
    cols = np.concatenate([j[fwd], i[bwd]])
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))
    k, _ = connected_components(adj, directed=True, connection="strong")
    return k == 1


def rank_centrality(
    g: ComparisonGraph,
    obs: EdgeObservations,
    epsilon: float | None = None,
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
) -> WeightVector:
    """Stationary distribution of :func:`transition_matrix`, as weights.

    Args:
        g: Comparison graph; should be connected.
        obs: Tallies aligned with ``g``.
        epsilon: Overrides ``obs.epsilon`` when given.
        tol: Relative L1 change between sweeps that counts as converged.
        max_iter: Sweep cap.

    Returns:
        Weights with geometric mean 1.

    Raises:
        NumericError: on non-convergence or when some item gets zero mass.
    """
    connected, _ = is_connected(g)
    if not connected:
        warnings.warn("comparison graph is disconnected; the stationary distribution is not unique", stacklevel=2)
    else:
        eps = obs.epsilon if epsilon is None else epsilon
        if not _wins_strongly_connected(g, obs.aligned_wins(g), eps):
            raise NumericError("some items never beat the rest and would get zero stationary mass; use epsilon > 0")
    pt = transition_matrix(g, obs, epsilon).T.tocsr()
    pi = np.full(g.n, 1.0 / g.n)
    for _ in range(max_iter):
        # lazy half-step: same fixed point, no oscillation on periodic chains
        nxt = 0.5 * (pi + pt @ pi)
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() <= tol * np.abs(nxt).sum():
            pi = nxt
            break
        pi = nxt
    else:
        raise NumericError(f"rank centrality did not converge in {max_iter} sweeps")
    if np.any(pi <= 0):
        raise NumericError("some items receive zero stationary mass; use epsilon > 0")
    return WeightVector(pi).normalized()


def mle_objective(theta: np.ndarray, edges: np.ndarray, wins: np.ndarray, lam: float) -> float:
    d = theta[edges[:, 0]] - theta[edges[:, 1]]
    ll = wins[:, 0] @ log_expit(d) + wins[:, 1] @ log_expit(-d)
    return float(ll - 0.5 * lam * theta @ theta)


def _gradient(theta: np.ndarray, edges: np.ndarray, wins: np.ndarray, lam: float) -> np.ndarray:
    d = theta[edges[:, 0]] - theta[edges[:, 1]]
    s = wins[:, 0] - (wins[:, 0] + wins[:, 1]) * expit(d)
    n = len(theta)
    grad = np.bincount(edges[:, 0], weights=s, minlength=n) - np.bincount(edges[:, 1], weights=s, minlength=n)
    return grad - lam * theta


def _neg_hessian(theta: np.ndarray, edges: np.ndarray, wins: np.ndarray, lam: float) -> sp.csc_matrix:
    # Laplacian weighted by (a + b) σ(d) σ(-d), plus λI
    d = theta[edges[:, 0]] - theta[edges[:, 1]]
    c = (wins[:, 0] + wins[:, 1]) * expit(d) * expit(-d)
    n = len(theta)
    i, j = edges[:, 0], edges[:, 1]
    off = sp.csr_matrix((np.concatenate([-c, -c]), (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))
    diag = np.bincount(i, weights=c, minlength=n) + np.bincount(j, weights=c, minlength=n) + lam
    return (off + sp.diags(diag)).tocsc()


def regularized_mle(
    g: ComparisonGraph,
    obs: EdgeObservations,
    lam: float = 0.0,
    tol: float = 1e-8,
    max_iter: int = 200,
    max_spread: float = 50.0,
) -> WeightVector:
    """Maximize the BTL log-likelihood minus ``½ λ ‖θ‖²`` by damped Newton steps.

    The negative Hessian is a weighted graph Laplacian (plus ``λI``). With
    ``λ = 0`` its null space is the constant vector, so one item is grounded
    when solving for the step.

    Raises:
        NumericError: if the estimate runs off (log-weight spread above
            ``max_spread``) or ``max_iter`` is exhausted; use ``λ > 0`` then.
    """
    if lam < 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam}")
    connected, _ = is_connected(g)
    if not connected and lam == 0:
        raise NumericError("the likelihood has no unique maximizer on a disconnected graph; use lambda > 0")
    edges = g.edges
    wins = obs.aligned_wins(g)
    if lam == 0 and not _wins_strongly_connected(g, wins):
        raise NumericError(
            "maximum-likelihood estimate diverges (some items never beat or never lose to the rest); use lambda > 0"
        )
    n = g.n
    theta = np.zeros(n)
    f = mle_objective(theta, edges, wins, lam)
    for _ in range(max_iter):
        grad = _gradient(theta, edges, wins, lam)
        if np.abs(grad).max() <= tol * max(1.0, float(wins.sum()) / n):
            break
        h = _neg_hessian(theta, edges, wins, lam)
        if lam == 0:
            # ground item 0; any solution works since steps are re-centred at the end
            direction = np.zeros(n)
            direction[1:] = spla.spsolve(h[1:, 1:], grad[1:])
        else:
            direction = spla.spsolve(h, grad)
        slope = float(grad @ direction)
        step = 1.0
        while True:
            cand = theta + step * direction
            f_cand = mle_objective(cand, edges, wins, lam)
            if f_cand >= f + 1e-4 * step * slope:
                break
            step *= 0.5
            if step < 1e-12:
                raise NumericError("line search failed to make progress")
        theta, f = cand, f_cand
        if np.ptp(theta) > max_spread:
            raise NumericError(
                "maximum-likelihood estimate diverges (some item is never beaten or never wins); use lambda > 0"
            )
    else:
        raise NumericError(f"Newton iteration did not converge in {max_iter} steps; try lambda > 0")
    return WeightVector(np.exp(theta - theta.mean()))
