"""Fisher information, Monte Carlo standard errors and confidence intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DegeneracyError, InputError
from .network import NetworkSeries
from .sampler import SamplerSettings, sample_series, summed_chain
from .statistics import ModelSpec


def fisher_from_chain(chain: np.ndarray, labels=None) -> np.ndarray:
    """Empirical covariance of sampled summed statistics (rows are samples)."""
    chain = np.asarray(chain, dtype=float)
    if chain.ndim == 1:
        chain = chain[:, None]
    if chain.shape[0] < 2:
        raise InputError("need at least two samples")
    sd = chain.std(axis=0)
    if np.any(sd == 0):
        q = np.flatnonzero(sd == 0)
        names = [labels[k] if labels else str(k) for k in q]
        raise DegeneracyError(f"sampled statistics have zero variance for {', '.join(names)}")
    cov = np.atleast_2d(np.cov(chain, rowvar=False))
    return (cov + cov.T) / 2


def estimate_fisher(theta_hat, spec: ModelSpec, series: NetworkSeries, settings: SamplerSettings,
                    *, backend: str | None = None, n_jobs: int = 1,
                    return_chain: bool = False):
    """Fisher information at ``theta_hat`` as the covariance of simulated statistics.

    Raises
    ------
    DegeneracyError
        If a coordinate of the sampled statistics never varies.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    if not np.all(np.isfinite(theta_hat)):
        raise InputError("theta_hat must be finite")
    batches = sample_series(spec, theta_hat, series, settings, phase="variance",
                            backend=backend, n_jobs=n_jobs)
    chain = summed_chain(batches)
    fisher = fisher_from_chain(chain, spec.labels)
    return (fisher, chain) if return_chain else fisher


def mcmc_standard_error(chain) -> np.ndarray:
    """Standard error of the chain mean by non-overlapping batch means.

    Uses ``floor(sqrt(M))`` batches of size ``floor(sqrt(M))``; a leftover
    tail shorter than one batch is dropped.
    """
    chain = np.asarray(chain, dtype=float)
    squeeze = chain.ndim == 1
    if squeeze:
        chain = chain[:, None]
    M = chain.shape[0]
    if M < 100:
        raise InputError(f"chain of length {M} is too short for batch means (need >= 100)")
    b = math.isqrt(M)
    k = M // b
    means = chain[: k * b].reshape(k, b, -1).mean(axis=1)
    var_mean = b * means.var(axis=0, ddof=1) / M
    se = np.sqrt(var_mean)
    return se[0] if squeeze else se


def confidence_intervals(theta_hat, covariance, level: float = 0.95) -> np.ndarray:
    """Normal-approximation intervals, shape ``(p, 2)``."""
    if not 0 < level < 1:
        raise InputError("level must lie in (0, 1)")
    theta_hat = np.asarray(theta_hat, dtype=float)
    var = np.diag(np.atleast_2d(np.asarray(covariance, dtype=float)))
    if np.any(var < 0):
        raise InputError("covariance has a negative diagonal entry")
    half = norm.ppf((1 + level) / 2) * np.sqrt(var)
    return np.column_stack([theta_hat - half, theta_hat + half])


@dataclass
class VarianceReport:
    """Combined uncertainty of an estimate.

    ``combined`` adds the inverse Fisher information and the Monte Carlo
    variance of the estimate on the variance scale.
    """

    fisher: np.ndarray
    fisher_inverse: np.ndarray
    mcmc_variance: np.ndarray
    combined: np.ndarray
    intervals: np.ndarray
    ci_level: float = 0.95

    def to_dict(self) -> dict:
        return {
            "fisher": self.fisher.tolist(),
            "fisher_inverse": self.fisher_inverse.tolist(),
            "mcmc_variance": self.mcmc_variance.tolist(),
            "combined": self.combined.tolist(),
            "intervals": self.intervals.tolist(),
            "ci_level": self.ci_level,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VarianceReport":
        a = lambda k: np.asarray(d[k], dtype=float)  # noqa: E731
        return cls(a("fisher"), a("fisher_inverse"), a("mcmc_variance"), a("combined"),
                   a("intervals"), float(d.get("ci_level", 0.95)))


def build_report(theta_hat, fisher: np.ndarray, chain: np.ndarray, level: float = 0.95) -> VarianceReport:
    """Variance report from a Fisher matrix and the chain it was estimated from.

    The Monte Carlo error of the mean statistics propagates to the estimate
    through the inverse Fisher information; only its diagonal is kept.
    """
    inv = np.linalg.pinv(fisher, hermitian=True)
    inv = (inv + inv.T) / 2
    mcse = mcmc_standard_error(chain) if chain.shape[0] >= 100 else np.zeros(fisher.shape[0])
    prop = inv @ np.diag(mcse ** 2) @ inv
    mcmc_var = np.diag(np.diag(prop))
    combined = inv + mcmc_var
    return VarianceReport(fisher, inv, mcmc_var, combined,
                          confidence_intervals(theta_hat, combined, level), level)


def variance_report(spec: ModelSpec, theta_hat, series: NetworkSeries, settings,
                    level: float = 0.95) -> tuple[VarianceReport, np.ndarray]:
    """Run the variance phase at ``theta_hat``; ``settings`` is an ``EstimationSettings``."""
    fisher, chain = estimate_fisher(theta_hat, spec, series, settings.phase("variance"),
                                    backend=settings.backend, n_jobs=settings.n_jobs,
                                    return_chain=True)
    return build_report(theta_hat, fisher, chain, level), chain
