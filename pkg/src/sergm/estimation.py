"""Pseudo-likelihood seeding and Monte Carlo maximum likelihood estimation.

The MCMC-MLE loop uses partial stepping: the observed statistics are pulled
toward the simulated mean until a slightly exaggerated version of the target
lies inside the convex hull of the sampled statistics, then a Gaussian
approximation of the log-likelihood ratio gives the closed-form update
``theta + inv(cov) @ (target - mean)``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog
from scipy.stats import chi2

from .errors import BoundaryError, DegeneracyError, InputError, NonConvergenceError
from .network import NetworkSeries
from .sampler import SamplerSettings, sample_series, summed_chain
from .statistics import ModelSpec, PeriodContext, change_table, sum_over_time

SCHEMA_VERSION = "sergm.fit/1"


def check_inputs(spec: ModelSpec, series: NetworkSeries) -> None:
    """Reject spec/data combinations that cannot be fitted."""
    if spec.p == 0:
        raise InputError("the model has no terms")
    if series.T < 1:
        raise InputError("need at least one modeled period")
    if series.static and spec.needs_lag:
        lagged = [t.label for t in spec.terms if t.needs_lag]
        raise InputError(f"lagged terms {', '.join(lagged)} need a temporal series")
    missing = set(spec.covariate_names) - set(series.covariates.names())
    if missing:
        raise InputError(f"covariates missing from the data: {', '.join(sorted(missing))}")


# --------------------------------------------------------------------------
# pseudo-likelihood


class _PseudoLikelihood:
    """Multinomial logit over all (period, dyad) pairs with baseline state 0."""

    def __init__(self, spec: ModelSpec, series: NetworkSeries):
        plus, minus, obs = [], [], []
        for t in range(1, series.T + 1):
            y_t, y_prev, cov = series.period(t)
            ctx = PeriodContext(spec, series.n, y_prev, cov)
            dp, dm, o = change_table(ctx, y_t)
            plus.append(dp)
            minus.append(dm)
            obs.append(o)
        self.plus = np.vstack(plus)
        self.minus = np.vstack(minus)
        obs = np.concatenate(obs)
        self.is_plus = obs == 1
        self.is_minus = obs == -1
        self.observed = (self.plus * self.is_plus[:, None]).sum(0) + (self.minus * self.is_minus[:, None]).sum(0)

    def evaluate(self, theta):
        ep = self.plus @ theta
        en = self.minus @ theta
        lse = np.logaddexp(np.logaddexp(ep, en), 0.0)
        ll = float(np.where(self.is_plus, ep, np.where(self.is_minus, en, 0.0)).sum() - lse.sum())
        pp = np.exp(ep - lse)
        pn = np.exp(en - lse)
        mean = pp[:, None] * self.plus + pn[:, None] * self.minus
        grad = self.observed - mean.sum(0)
        info = (self.plus.T * pp) @ self.plus + (self.minus.T * pn) @ self.minus - mean.T @ mean
        return ll, grad, info

    def boundary_terms(self, labels) -> list[str]:
        """Coordinates whose observed category is always extreme among the three."""
        zero = np.zeros(len(self.plus))
        bad = []
        for q, label in enumerate(labels):
            vals = np.column_stack([self.plus[:, q], self.minus[:, q], zero])
            got = np.where(self.is_plus, vals[:, 0], np.where(self.is_minus, vals[:, 1], 0.0))
            hi = vals.max(axis=1)
            lo = vals.min(axis=1)
            if np.all(hi - lo < 1e-12):
                bad.append(label)
            elif np.all(got >= hi - 1e-12) or np.all(got <= lo + 1e-12):
                bad.append(label)
        return bad


def pseudo_loglik(spec: ModelSpec, series: NetworkSeries, theta) -> float:
    """Log pseudo-likelihood; the exact log-likelihood for dyadic-independent specs."""
    check_inputs(spec, series)
    return _PseudoLikelihood(spec, series).evaluate(np.asarray(theta, dtype=float))[0]


def _newton_mple(pl: _PseudoLikelihood, labels, tol: float, max_iter: int, max_norm: float):
    p = len(labels)
    theta = np.zeros(p)
    ll, grad, info = pl.evaluate(theta)
    for _ in range(max_iter):
        if np.linalg.norm(grad) < tol:
            return theta, ll
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(info, grad, rcond=None)[0]
        scale = 1.0
        while True:
            cand = theta + scale * step
            cll, cgrad, cinfo = pl.evaluate(cand)
            if cll >= ll - 1e-12 or scale < 1e-8:
                break
            scale /= 2
        theta, ll, grad, info = cand, cll, cgrad, cinfo
        if np.linalg.norm(theta) > max_norm:
            q = int(np.argmax(np.abs(theta)))
            raise BoundaryError(
                f"pseudo-likelihood diverges along {labels[q]}; the data are separated",
                [labels[q]],
            )
    q = int(np.argmax(np.abs(theta)))
    raise BoundaryError(f"pseudo-likelihood did not converge (largest coefficient {labels[q]})",
                        [labels[q]])


def fit_mple(spec: ModelSpec, series: NetworkSeries, *, tol: float = 1e-8,
             max_iter: int = 200, max_norm: float = 100.0) -> np.ndarray:
    """Maximum pseudo-likelihood estimate by Newton-Raphson.

    Raises
    ------
    BoundaryError
        When a term's observed change statistics sit at their extreme for every
        dyad (for example every dyad positive under ``EdgesPos``), or when the
        ascent diverges.
    """
    check_inputs(spec, series)
    pl = _PseudoLikelihood(spec, series)
    bad = pl.boundary_terms(spec.labels)
    if bad:
        raise BoundaryError(f"observed statistics on the boundary for {', '.join(bad)}", bad)
    return _newton_mple(pl, spec.labels, tol, max_iter, max_norm)[0]


def seed_estimate(spec: ModelSpec, series: NetworkSeries) -> np.ndarray:
    """Starting value for MCMC-MLE.

    This is the MPLE when it exists. If only endogenous terms are separated in
    the pseudo-likelihood, the dyadic-independent terms are fitted alone and
    the endogenous coefficients start at zero. Separation of a dyadic-independent
    term is a genuine boundary case and is re-raised.
    """
    try:
        return fit_mple(spec, series)
    except BoundaryError as err:
        mask = spec.independent_mask
        flagged = set(err.terms)
        if not flagged or any(mask[q] for q, lab in enumerate(spec.labels) if lab in flagged):
            raise
        warnings.warn(f"pseudo-likelihood is separated along {', '.join(sorted(flagged))}; "
                      "starting those coefficients at 0", RuntimeWarning, stacklevel=2)
        theta = np.zeros(spec.p)
        if mask.any():
            theta[mask] = fit_mple(spec.subset(mask), series)
        return theta


# --------------------------------------------------------------------------
# convex hull and partial stepping


def _standardize(point, samples):
    samples = np.asarray(samples, dtype=float)
    point = np.asarray(point, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise InputError("need at least one sample")
    if point.shape != (samples.shape[1],):
        raise InputError(f"point has shape {point.shape}, samples have dimension {samples.shape[1]}")
    center = samples.mean(axis=0)
    scale = samples.std(axis=0)
    scale = np.where(scale > 0, scale, np.maximum(np.abs(center), 1.0))
    return (point - center) / scale, (samples - center) / scale


def hull_contains(point, samples, tol: float = 1e-9) -> bool:
    """Whether ``point`` is a convex combination of the rows of ``samples``.

    Each coordinate is centered and scaled by the samples before solving the
    feasibility problem, so the answer does not depend on the units of the
    statistics. Points on the hull boundary count as inside.
    """
    x, S = _standardize(point, samples)
    S = np.unique(S, axis=0)
    lo = S.min(axis=0)
    hi = S.max(axis=0)
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        return False
    if S.shape[0] == 1:
        return bool(np.all(np.abs(S[0] - x) <= tol))
    k = S.shape[0]
    A = np.vstack([S.T, np.ones(k)])
    b = np.append(x, 1.0)
    res = linprog(np.zeros(k), A_eq=A, b_eq=b, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10})
    if res.status != 0:
        return False
    lam = np.clip(res.x, 0, None)
    return bool(np.max(np.abs(A @ lam - b)) <= tol * max(1.0, np.abs(b).max()))


def find_gamma(observed, mean, samples, grid: int = 2000, margin: float = 1.05) -> float:
    """Largest grid step size whose exaggerated target stays in the sample hull.

    The candidate target for step ``g`` is
    ``margin * g * observed + (1 - margin * g) * mean``. Grid values are
    ``k / grid`` for ``k = 1..grid``; containment is monotone along the ray
    from ``mean`` so a binary search suffices.
    """
    observed = np.asarray(observed, dtype=float)
    mean = np.asarray(mean, dtype=float)

    def inside(k):
        g = k / grid
        return hull_contains(margin * g * observed + (1 - margin * g) * mean, samples)

    if inside(grid):
        return 1.0
    if not inside(1):
        warnings.warn("sample hull does not contain even the smallest step; using 1/grid",
                      RuntimeWarning, stacklevel=2)
        return 1.0 / grid
    lo, hi = 1, grid  # inside(lo) and not inside(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return lo / grid


def partial_step_update(theta, target, samples, ridge_eps: float = 1e-8) -> np.ndarray:
    """``theta + inv(cov) @ (target - mean)`` from sampled summed statistics."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    theta = np.asarray(theta, dtype=float)
    if samples.shape[0] < 2 or np.all(samples == samples[0]):
        raise DegeneracyError("all sampled statistics are identical; the chain is stuck")
    mean = samples.mean(axis=0)
    cov = np.atleast_2d(np.cov(samples, rowvar=False))
    p = cov.shape[0]
    if np.linalg.cond(cov) > 1e12:
        cov = cov + ridge_eps * max(np.trace(cov) / p, 1e-300) * np.eye(p)
    return theta + np.linalg.solve(cov, np.asarray(target, dtype=float) - mean)


# --------------------------------------------------------------------------
# MCMC-MLE


@dataclass(frozen=True)
class EstimationSettings:
    """Tuning of the estimation loop and its three sampling phases.

    ``seed`` overrides the seed field of every phase. The final phase stops
    once two consecutive iterations are stable, where an iteration is stable
    if the largest relative parameter change is below ``stabilize_tol`` or the
    simulated mean is statistically indistinguishable from the observed
    statistics (``moment_check``).
    """

    gamma_grid: int = 2000
    step_margin: float = 1.05
    max_outer_iters: int = 60
    stabilize_tol: float = 1e-3
    estimation: SamplerSettings = SamplerSettings(10_000, 1_000, 1_000, "observed")
    variance: SamplerSettings = SamplerSettings(10_000, 1_000, 3_000, "observed")
    bridge: SamplerSettings = SamplerSettings(10_000, 2_000, 1_000, "empty")
    ridge_eps: float = 1e-8
    seed: int = 0
    moment_check: bool = True
    degeneracy_share: float = 0.99
    n_jobs: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.gamma_grid < 10:
            raise InputError("gamma_grid must be >= 10")
        if not self.step_margin > 1:
            raise InputError("step_margin must be > 1")
        if self.max_outer_iters < 1:
            raise InputError("max_outer_iters must be >= 1")
        if not self.stabilize_tol > 0:
            raise InputError("stabilize_tol must be > 0")

    def phase(self, name: str) -> SamplerSettings:
        return getattr(self, name).with_(seed=self.seed)

    def with_(self, **kw) -> "EstimationSettings":
        return replace(self, **kw)


@dataclass
class FitResult:
    """Outcome of an MCMC-MLE fit; ``loglik``/``aic`` are filled by model selection."""

    spec: ModelSpec
    theta_hat: np.ndarray
    covariance: np.ndarray
    variance: object = None  # inference.VarianceReport
    stat_chain: np.ndarray | None = None  # variance-phase summed statistics
    estimation_chain: np.ndarray | None = None  # last estimation-phase summed statistics
    observed: np.ndarray | None = None
    mple: np.ndarray | None = None
    loglik: float | None = None
    aic: float | None = None
    diagnostics: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def labels(self) -> list[str]:
        return self.spec.labels

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    def to_dict(self) -> dict:
        v = self.variance
        terms = []
        for q, label in enumerate(self.labels):
            row = {"term": label, "estimate": float(self.theta_hat[q]),
                   "se": float(self.std_errors[q])}
            if v is not None:
                row["mcmc_se"] = float(math.sqrt(max(v.mcmc_variance[q, q], 0.0)))
                row["ci_lower"], row["ci_upper"] = (float(x) for x in v.intervals[q])
            terms.append(row)
        out = {
            "schema": SCHEMA_VERSION,
            "spec": self.spec.to_dict(),
            "seed": self.seed,
            "terms": terms,
            "theta_hat": _floats(self.theta_hat),
            "covariance": _floats(self.covariance),
            "observed": _floats(self.observed),
            "mple": _floats(self.mple),
            "loglik": self.loglik,
            "aic": self.aic,
            "diagnostics": _jsonable(self.diagnostics),
        }
        if v is not None:
            out["variance"] = v.to_dict()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        from .inference import VarianceReport

        if d.get("schema") != SCHEMA_VERSION:
            raise InputError(f"unsupported fit result schema {d.get('schema')!r}")
        arr = lambda k: None if d.get(k) is None else np.asarray(d[k], dtype=float)  # noqa: E731
        return cls(
            spec=ModelSpec.from_dict(d["spec"]),
            theta_hat=arr("theta_hat"),
            covariance=arr("covariance"),
            variance=VarianceReport.from_dict(d["variance"]) if "variance" in d else None,
            observed=arr("observed"),
            mple=arr("mple"),
            loglik=d.get("loglik"),
            aic=d.get("aic"),
            diagnostics=d.get("diagnostics", {}),
            seed=d.get("seed", 0),
        )

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        return cls.from_dict(json.loads(text))


def _floats(a):
    return None if a is None else np.asarray(a, dtype=float).tolist()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _collapsed_share(batches) -> float:
    """Share of retained networks that are completely empty or completely filled."""
    total = 0
    bad = 0
    for b in batches:
        nz = np.count_nonzero(b.networks, axis=1)
        bad += int(np.sum((nz == 0) | (nz == b.networks.shape[1])))
        total += b.m
    return bad / total


def _moment_distance(observed, chain) -> float:
    """Mahalanobis-type distance of ``observed`` from the chain mean, on the
    scale of the mean's sampling variance (inflated for autocorrelation)."""
    from .inference import mcmc_standard_error

    M = chain.shape[0]
    cov = np.atleast_2d(np.cov(chain, rowvar=False))
    sd = np.sqrt(np.clip(np.diag(cov), 0, None))
    if M < 100 or np.any(sd == 0):
        return math.inf
    naive = sd / math.sqrt(M)
    inflation = np.maximum(mcmc_standard_error(chain) / naive, 1.0)
    V = cov / M * np.outer(inflation, inflation)
    d = np.asarray(observed) - chain.mean(axis=0)
    try:
        return float(d @ np.linalg.solve(V, d))
    except np.linalg.LinAlgError:
        return math.inf


def fit_mcmc_mle(spec: ModelSpec, series: NetworkSeries,
                 settings: EstimationSettings | None = None, *, theta0=None,
                 level: float = 0.95, variance: bool = True) -> FitResult:
    """Monte Carlo maximum likelihood with partial stepping.

    Seeds from the MPLE (or ``theta0``), steps until the full observed target is
    reachable twice in a row, then iterates Newton-type updates toward the
    observed statistics until two consecutive iterations are stable. The
    estimate is the average of the last two iterates. Unless ``variance`` is
    False a fresh chain at the estimate gives the Fisher information and
    confidence intervals.

    Raises
    ------
    BoundaryError
        Propagated from the pseudo-likelihood seed (see ``seed_estimate``).
    DegeneracyError
        When the chain collapses to the empty or full network for two
        consecutive iterations.
    NonConvergenceError
        When ``max_outer_iters`` is reached.
    """
    settings = settings or EstimationSettings()
    check_inputs(spec, series)
    observed = sum_over_time(spec, series)
    mple = seed_estimate(spec, series)
    theta = mple.copy() if theta0 is None else np.asarray(theta0, dtype=float).copy()
    est = settings.phase("estimation")
    p = spec.p
    threshold = 2 * chi2.ppf(0.95, p)

    gammas, distances = [], []
    thetas = [theta.tolist()]
    stepping = True
    ones = stable = collapsed = 0
    chain = None
    final_iterates = []
    for it in range(settings.max_outer_iters):
        batches = sample_series(spec, theta, series, est, phase="estimation", iteration=it,
                                backend=settings.backend, n_jobs=settings.n_jobs)
        chain = summed_chain(batches)
        if _collapsed_share(batches) > settings.degeneracy_share:
            collapsed += 1
            if collapsed >= 2:
                raise DegeneracyError(
                    f"more than {settings.degeneracy_share:.0%} of sampled networks are empty "
                    f"or complete at iteration {it}; the model is degenerate near {theta.tolist()}"
                )
        else:
            collapsed = 0
        mean = chain.mean(axis=0)
        if stepping:
            gamma = find_gamma(observed, mean, chain, settings.gamma_grid, settings.step_margin)
            target = gamma * observed + (1 - gamma) * mean
        else:
            gamma, target = 1.0, observed
        dist = _moment_distance(observed, chain)
        new = partial_step_update(theta, target, chain, settings.ridge_eps)
        if not np.all(np.isfinite(new)):
            raise DegeneracyError(f"update produced non-finite parameters at iteration {it}")
        gammas.append(gamma)
        distances.append(dist)
        thetas.append(new.tolist())

        if stepping:
            ones = ones + 1 if gamma == 1.0 else 0
            if ones >= 2:
                stepping = False
        else:
            rel = float(np.max(np.abs(new - theta) / (1 + np.abs(theta))))
            ok = rel < settings.stabilize_tol or (settings.moment_check and dist <= threshold)
            stable = stable + 1 if ok else 0
            final_iterates.append(new)
            if stable >= 2:
                theta_hat = (final_iterates[-1] + final_iterates[-2]) / 2
                break
        theta = new
    else:
        raise NonConvergenceError(
            f"no stable estimate after {settings.max_outer_iters} iterations "
            f"(last step size {gammas[-1]:.4g})"
        )

    diagnostics = {
        "iterations": len(gammas),
        "gamma_trace": gammas,
        "theta_trace": thetas,
        "moment_distance": distances,
        "moment_threshold": threshold,
    }
    result = FitResult(spec, theta_hat, np.zeros((p, p)), estimation_chain=chain,
                       observed=observed, mple=mple, diagnostics=diagnostics, seed=settings.seed)
    if variance:
        from .inference import variance_report

        report, var_chain = variance_report(spec, theta_hat, series, settings, level=level)
        result.variance = report
        result.covariance = report.combined
        result.stat_chain = var_chain
    return result


__all__ = [
    "EstimationSettings", "FitResult", "check_inputs", "find_gamma", "fit_mcmc_mle", "fit_mple",
    "hull_contains", "partial_step_update", "pseudo_loglik", "seed_estimate",
]
