"""Exact computations by enumerating every signed network on ``n`` actors.

The state space has ``3**(n(n-1)/2)`` networks, so this is only usable for
``n <= 5`` under the default budget. Networks are visited in base-3 counting
order over the flat dyad array, last dyad fastest, with digits
``0 -> 0``, ``1 -> +``, ``2 -> -``.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from .errors import BoundaryError, BudgetExceededError, InputError
from .network import NetworkSeries, SignedNetwork, n_dyads
from .statistics import ModelSpec, PeriodContext, eval_states, sum_over_time

DEFAULT_MAX_STATES = 3 ** 10
_DIGIT_STATE = np.array([0, 1, -1], dtype=np.int8)


def _check_budget(n: int, max_states: int) -> int:
    size = 3 ** n_dyads(n)
    if size > max_states:
        raise BudgetExceededError(
            f"enumerating n={n} needs {size} states, budget is {max_states}"
        )
    return size


def space_states(n: int, max_states: int = DEFAULT_MAX_STATES) -> np.ndarray:
    """All networks as flat state rows, shape ``(3**D, D)``."""
    _check_budget(n, max_states)
    D = n_dyads(n)
    digits = np.array(list(itertools.product(range(3), repeat=D)), dtype=np.int8).reshape(-1, D)
    return _DIGIT_STATE[digits]


def enumerate_space(n: int, max_states: int = DEFAULT_MAX_STATES):
    """Yield every signed network on ``n`` actors exactly once."""
    for row in space_states(n, max_states):
        yield SignedNetwork(n, row)


def space_statistics(spec: ModelSpec, n: int, y_prev: SignedNetwork | None = None,
                     covariates=None, max_states: int = DEFAULT_MAX_STATES) -> np.ndarray:
    """Statistics of every network in enumeration order, shape ``(3**D, p)``."""
    ctx = PeriodContext(spec, n, y_prev, covariates)
    return eval_states(ctx, space_states(n, max_states))


def _log_kappa(S: np.ndarray, theta: np.ndarray) -> float:
    return float(logsumexp(S @ theta))


def _moments(S: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    eta = S @ theta
    w = np.exp(eta - eta.max())
    w /= w.sum()
    mean = w @ S
    centered = S - mean
    cov = (centered * w[:, None]).T @ centered
    return mean, (cov + cov.T) / 2


def _theta(spec: ModelSpec, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.p,):
        raise InputError(f"theta has shape {theta.shape}, expected ({spec.p},)")
    return theta


def exact_kappa(spec: ModelSpec, theta, y_prev: SignedNetwork | None = None, *, n: int | None = None,
                covariates=None, max_states: int = DEFAULT_MAX_STATES) -> float:
    """``log sum_y exp(theta . s(y, y_prev))``."""
    n = n if n is not None else y_prev.n
    S = space_statistics(spec, n, y_prev, covariates, max_states)
    return _log_kappa(S, _theta(spec, theta))


def exact_moments(spec: ModelSpec, theta, y_prev: SignedNetwork | None = None, *, n: int | None = None,
                  covariates=None, max_states: int = DEFAULT_MAX_STATES):
    """Exact mean vector and covariance matrix of ``s(Y, y_prev)``."""
    n = n if n is not None else y_prev.n
    S = space_statistics(spec, n, y_prev, covariates, max_states)
    return _moments(S, _theta(spec, theta))


def exact_distribution(spec: ModelSpec, theta, y_prev: SignedNetwork | None = None, *,
                       n: int | None = None, covariates=None,
                       max_states: int = DEFAULT_MAX_STATES) -> np.ndarray:
    """Probability of every network in enumeration order."""
    n = n if n is not None else y_prev.n
    S = space_statistics(spec, n, y_prev, covariates, max_states)
    eta = S @ _theta(spec, theta)
    return np.exp(eta - logsumexp(eta))


def state_index(network: SignedNetwork) -> int:
    """Position of ``network`` in enumeration order."""
    digits = np.where(network.states == -1, 2, network.states).astype(np.int64)
    idx = 0
    for d in digits:
        idx = idx * 3 + int(d)
    return idx


class _SeriesTables:
    def __init__(self, spec: ModelSpec, series: NetworkSeries, max_states: int):
        self.tables = []
        for t in range(1, series.T + 1):
            _, y_prev, cov = series.period(t)
            self.tables.append(space_statistics(spec, series.n, y_prev, cov, max_states))
        self.observed = sum_over_time(spec, series)

    def loglik(self, theta):
        return float(theta @ self.observed - sum(_log_kappa(S, theta) for S in self.tables))

    def moments(self, theta):
        mean = np.zeros(len(theta))
        cov = np.zeros((len(theta), len(theta)))
        for S in self.tables:
            m, c = _moments(S, theta)
            mean += m
            cov += c
        return mean, cov


def exact_loglik(spec: ModelSpec, theta, series: NetworkSeries,
                 max_states: int = DEFAULT_MAX_STATES) -> float:
    """Conditional log-likelihood of ``y_1..y_T`` given ``y_0``."""
    return _SeriesTables(spec, series, max_states).loglik(_theta(spec, theta))


def _check_interior(spec: ModelSpec, tabs: _SeriesTables) -> None:
    """Raise unless the observed sum lies in the relative interior of the
    attainable set and that set is full-dimensional.

    A point is in the relative interior of a polytope iff it is a convex
    combination with every vertex weight strictly positive; for a sum over
    periods the per-period weights are solved jointly.
    """
    tables = [np.unique(S, axis=0) for S in tabs.tables]
    centered = np.vstack([S - S.mean(axis=0) for S in tables])
    if np.linalg.matrix_rank(centered, tol=1e-9) < spec.p:
        flat = [spec.labels[q] for q in range(spec.p) if np.ptp(centered[:, q]) == 0]
        raise BoundaryError(
            "attainable statistics are not full-dimensional; the MLE is not identified",
            flat,
        )
    sizes = [len(S) for S in tables]
    k = sum(sizes)
    # variables: all weights, then the common lower bound tau (maximized)
    A_eq = np.zeros((spec.p + len(tables), k + 1))
    A_eq[: spec.p, :k] = np.vstack(tables).T
    start = 0
    for r, size in enumerate(sizes):
        A_eq[spec.p + r, start:start + size] = 1.0
        start += size
    b_eq = np.concatenate([tabs.observed, np.ones(len(tables))])
    A_ub = np.hstack([-np.eye(k), np.ones((k, 1))])  # tau - lambda <= 0
    c = np.zeros(k + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, None)] * k + [(None, 1.0)], method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        lo = sum(S.min(axis=0) for S in tables)
        hi = sum(S.max(axis=0) for S in tables)
        edge = np.isclose(tabs.observed, lo) | np.isclose(tabs.observed, hi)
        bad = [spec.labels[q] for q in np.flatnonzero(edge)] or list(spec.labels)
        raise BoundaryError(
            f"observed statistics lie on a face of the attainable set ({', '.join(bad)})", bad
        )


def exact_mle(spec: ModelSpec, series: NetworkSeries, *, theta0=None, tol: float = 1e-9,
              max_iter: int = 200, max_norm: float = 50.0,
              max_states: int = DEFAULT_MAX_STATES) -> np.ndarray:
    """Exact maximum likelihood estimate by damped Newton ascent.

    Raises
    ------
    BoundaryError
        If the observed statistics are not strictly inside the set of
        attainable statistics, or the ascent runs off to infinity.
    """
    tabs = _SeriesTables(spec, series, max_states)
    _check_interior(spec, tabs)

    theta = np.zeros(spec.p) if theta0 is None else _theta(spec, theta0).copy()
    ll = tabs.loglik(theta)
    for _ in range(max_iter):
        mean, cov = tabs.moments(theta)
        grad = tabs.observed - mean
        if np.linalg.norm(grad) < tol:
            return theta
        try:
            step = np.linalg.solve(cov, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(cov, grad, rcond=None)[0]
        scale = 1.0
        while scale > 1e-10:
            cand = theta + scale * step
            cand_ll = tabs.loglik(cand)
            if cand_ll >= ll - 1e-12:
                break
            scale /= 2
        theta, ll = cand, cand_ll
        if np.linalg.norm(theta) > max_norm:
            q = int(np.argmax(np.abs(theta)))
            raise BoundaryError(
                f"likelihood ascent diverges along {spec.labels[q]}; "
                "the observed statistics lie on the boundary of the attainable set",
                [spec.labels[q]],
            )
    raise BoundaryError("exact MLE did not converge; observed statistics may be on a face")
