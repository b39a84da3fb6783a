"""Log-likelihood at the estimate by path sampling, and the AIC.

The log-likelihood at ``theta_hat`` is split into the closed-form
log-likelihood of the dyadic-independent sub-model plus a log-likelihood
ratio. The ratio needs ``log kappa(theta_hat) - log kappa(theta_ind)``, which
is the integral of ``d_theta . E_u[s]`` along the straight path between the
two parameter vectors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyError, InputError
from .estimation import _collapsed_share, check_inputs, fit_mple, pseudo_loglik
from .network import NetworkSeries, n_dyads
from .sampler import SamplerSettings, sample_series, summed_chain
from .statistics import ModelSpec, sum_over_time

BRIDGE_METHODS = ("trapezoid", "riemann", "literal")


@dataclass(frozen=True)
class BridgeSettings:
    """Path-sampling grid ``u_j = j / j_bridges`` and the per-bridge chain.

    ``method`` selects the quadrature: ``trapezoid`` samples at
    ``u_0..u_J`` and integrates with the trapezoid rule, ``riemann`` samples
    at ``u_1..u_J`` with weights ``u_j - u_{j-1}``, and ``literal`` samples at
    ``u_1..u_J`` with weights ``1 / (u_j - u_{j-1})``.
    """

    j_bridges: int = 16
    sampler: SamplerSettings = SamplerSettings(10_000, 2_000, 1_000, "empty")
    method: str = "trapezoid"
    n_jobs: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.j_bridges < 2:
            raise InputError("j_bridges must be >= 2")
        if self.method not in BRIDGE_METHODS:
            raise InputError(f"method must be one of {BRIDGE_METHODS}, got {self.method!r}")


@dataclass
class BridgeResult:
    log_ratio: float
    grid: np.ndarray
    means: np.ndarray  # d_theta . E[s] at each sampled bridge
    weights: np.ndarray
    method: str

    def to_dict(self) -> dict:
        return {"log_ratio": self.log_ratio, "grid": self.grid.tolist(),
                "means": self.means.tolist(), "weights": self.weights.tolist(),
                "method": self.method}


@dataclass
class LoglikResult:
    loglik: float
    loglik_independent: float
    theta_independent: np.ndarray
    log_ratio: float
    bridge: BridgeResult | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "loglik": self.loglik,
            "loglik_independent": self.loglik_independent,
            "theta_independent": self.theta_independent.tolist(),
            "log_ratio": self.log_ratio,
            "bridge": None if self.bridge is None else self.bridge.to_dict(),
        }


def independence_loglik(spec: ModelSpec, series: NetworkSeries) -> tuple[np.ndarray, float]:
    """Fit the dyadic-independent terms alone; endogenous coefficients stay 0.

    Returns the full-length coefficient vector and its closed-form
    log-likelihood. With no dyadic-independent term the sub-model is the
    uniform distribution.

    Raises
    ------
    BoundaryError
        When the independent sub-model has no finite MLE.
    """
    check_inputs(spec, series)
    mask = spec.independent_mask
    theta = np.zeros(spec.p)
    if not mask.any():
        return theta, -series.T * n_dyads(series.n) * math.log(3)
    sub = spec.subset(mask)
    theta[mask] = fit_mple(sub, series)
    return theta, pseudo_loglik(sub, series, theta[mask])


def _bridge_means(spec, series, theta_from, delta, us, settings: BridgeSettings, seed_offset):
    def one(j, u):
        batches = sample_series(spec, theta_from + u * delta, series, settings.sampler,
                                phase="bridge", iteration=seed_offset + j,
                                backend=settings.backend)
        chain = summed_chain(batches)
        if _collapsed_share(batches) > 0.99:
            raise DegeneracyError(f"bridge chain at u={u:.4g} is stuck at the empty or complete network")
        return float((chain @ delta).mean())

    jobs = list(enumerate(us))
    if settings.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=settings.n_jobs) as pool:
            return np.array(list(pool.map(lambda a: one(*a), jobs)))
    return np.array([one(j, u) for j, u in jobs])


def bridge_log_ratio(spec: ModelSpec, series: NetworkSeries, theta_hat, theta_ind,
                     settings: BridgeSettings | None = None) -> BridgeResult:
    """Estimate ``log(kappa(theta_hat) / kappa(theta_ind))`` summed over periods."""
    settings = settings or BridgeSettings()
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_ind = np.asarray(theta_ind, dtype=float)
    if not (np.all(np.isfinite(theta_hat)) and np.all(np.isfinite(theta_ind))):
        raise InputError("bridge endpoints must be finite")
    J = settings.j_bridges
    grid = np.arange(J + 1) / J
    delta = theta_hat - theta_ind
    if not np.any(delta):
        return BridgeResult(0.0, grid, np.zeros(J + 1), np.zeros(J + 1), settings.method)
    if settings.method == "trapezoid":
        us = grid
        weights = np.full(J + 1, 1.0 / J)
        weights[[0, -1]] /= 2
        offset = 0
    else:
        us = grid[1:]
        step = np.diff(grid)
        weights = step if settings.method == "riemann" else 1.0 / step
        offset = 1
    means = _bridge_means(spec, series, theta_ind, delta, us, settings, offset)
    return BridgeResult(float(weights @ means), us, means, weights, settings.method)


def loglik_at_mle(spec: ModelSpec, series: NetworkSeries, theta_hat,
                  settings: BridgeSettings | None = None) -> LoglikResult:
    """Log-likelihood at ``theta_hat``.

    Dyadic-independent specs are evaluated in closed form. Otherwise the
    independent sub-model is fitted and the ratio term comes from
    ``bridge_log_ratio``.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_ind, ll_ind = independence_loglik(spec, series)
    if spec.is_dyadic_independent:
        ll = pseudo_loglik(spec, series, theta_hat)
        return LoglikResult(ll, ll_ind, theta_ind, ll - ll_ind)
    bridge = bridge_log_ratio(spec, series, theta_hat, theta_ind, settings)
    observed = sum_over_time(spec, series)
    ratio = float((theta_hat - theta_ind) @ observed) - bridge.log_ratio
    return LoglikResult(ratio + ll_ind, ll_ind, theta_ind, bridge.log_ratio, bridge)


def aic(fit, loglik: float) -> float:
    """``2 p - 2 loglik``; ``fit`` is a FitResult, a ModelSpec or a term count."""
    if not math.isfinite(loglik):
        raise InputError("loglik must be finite")
    if isinstance(fit, (int, np.integer)):
        p = int(fit)
    elif isinstance(fit, ModelSpec):
        p = fit.p
    else:
        p = fit.spec.p
    return 2 * p - 2 * float(loglik)
