"""Random-scan Gibbs sampling of signed networks given the lagged network."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import InputError
from . import kernels
from .kernels import get_kernel
from .network import NetworkSeries, SignedNetwork, n_dyads
from .statistics import LocalState, ModelSpec, PeriodContext, eval_states

PHASES = {"estimation": 0, "variance": 1, "bridge": 2, "gof": 3, "simulate": 4}
_CHUNK = 1 << 16


@dataclass(frozen=True)
class SamplerSettings:
    """Chain settings; ``burn_in`` and ``interval`` count single-dyad toggles."""

    burn_in: int = 10_000
    interval: int = 1_000
    m: int = 1_000
    start: object = "observed"  # "observed", "empty" or a SignedNetwork
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 0:
            raise InputError("burn_in must be >= 0")
        if self.interval < 1:
            raise InputError("interval must be >= 1")
        if self.m < 1:
            raise InputError("m must be >= 1")
        if not (isinstance(self.start, SignedNetwork) or self.start in ("observed", "empty")):
            raise InputError(f"start must be 'observed', 'empty' or a network, got {self.start!r}")

    def with_(self, **kw) -> "SamplerSettings":
        return replace(self, **kw)


@dataclass
class SampleBatch:
    """Retained networks of one chain and their statistics."""

    n: int
    networks: np.ndarray  # (m, D) int8 flat dyad states
    stat_chain: np.ndarray  # (m, p)
    toggles: int = 0
    flips: int = 0
    backend: str = ""

    @property
    def m(self) -> int:
        return self.networks.shape[0]

    @property
    def flip_rate(self) -> float:
        return self.flips / self.toggles if self.toggles else 0.0

    def network(self, k: int) -> SignedNetwork:
        return SignedNetwork(self.n, self.networks[k].copy())


def stream(seed: int, phase: str, iteration: int = 0, t: int = 1) -> np.random.Generator:
    """Independent RNG stream for ``(seed, phase, iteration, period)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(PHASES[phase], int(iteration), int(t)))
    return np.random.default_rng(ss)


class GibbsModel:
    """Theta-weighted tables consumed by the toggle kernel for one period."""

    def __init__(self, spec: ModelSpec, theta, ctx: PeriodContext):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (spec.p,):
            raise InputError(f"theta has shape {theta.shape}, expected ({spec.p},)")
        if not np.all(np.isfinite(theta)):
            raise InputError("theta must be finite")
        n = ctx.n
        self.ctx = ctx
        self.base_pos = np.zeros((n, n))
        self.base_neg = np.zeros((n, n))
        self.iso_pos = 0.0
        self.iso_neg = 0.0
        self.gwd_pos = np.zeros(n + 1)
        self.gwd_neg = np.zeros(n + 1)
        self.es = {(s, q): np.zeros(n + 1) for s in (1, -1) for q in (1, -1)}
        self.has_gwd = False
        self.has_es = False
        for q, term in enumerate(spec.terms):
            th = theta[q]
            fam = term.family
            if q in ctx.dyad_mats:
                if term.sign >= 0:
                    self.base_pos += th * ctx.dyad_mats[q]
                if term.sign <= 0:
                    self.base_neg += th * ctx.dyad_mats[q]
            elif fam == "Isolates":
                if term.sign == 1:
                    self.iso_pos += th
                else:
                    self.iso_neg += th
            elif fam == "GWD":
                self.has_gwd = True
                (self.gwd_pos if term.sign == 1 else self.gwd_neg)[:] += th * ctx.weights[q]
            else:
                self.has_es = True
                partner = -1 if fam == "GWESE" else 1
                self.es[(term.sign, partner)] += th * ctx.weights[q]

    def run(self, Y: np.ndarray, rng: np.random.Generator, burn_in: int, interval: int,
            m: int, backend: str | None = None) -> tuple[np.ndarray, int]:
        """Advance ``Y`` in place; return retained states ``(m, D)`` and flip count."""
        kernel = get_kernel(backend)
        n = Y.shape[0]
        D = n_dyads(n)
        iu, ju = np.triu_indices(n, 1)
        iu = iu.astype(np.int64)
        ju = ju.astype(np.int64)
        st = LocalState(Y)
        Y = st.Y
        deg_pos = np.ascontiguousarray(st.deg[1], dtype=np.int64)
        deg_neg = np.ascontiguousarray(st.deg[-1], dtype=np.int64)
        sf = np.ascontiguousarray(st.shared[1], dtype=np.int64)
        se = np.ascontiguousarray(st.shared[-1], dtype=np.int64)
        fixed = (
            deg_pos, deg_neg, sf, se, self.base_pos, self.base_neg,
            float(self.iso_pos), float(self.iso_neg), self.gwd_pos, self.gwd_neg,
            self.es[(1, 1)], self.es[(1, -1)], self.es[(-1, 1)], self.es[(-1, -1)],
            self.has_gwd, self.has_es,
        )
        flips = 0
        empty = np.zeros((0, D), dtype=np.int8)

        def draws(size):
            k = rng.integers(0, D, size=size)
            return iu[k], ju[k], rng.random(size)

        left = burn_in
        while left > 0:
            size = min(left, _CHUNK)
            ii, jj, u = draws(size)
            flips += kernel.run(Y, *fixed, ii, jj, u, 0, empty)
            left -= size
        out = np.zeros((m, D), dtype=np.int8)
        per_chunk = max(1, _CHUNK // interval)
        r = 0
        while r < m:
            k = min(per_chunk, m - r)
            ii, jj, u = draws(k * interval)
            flips += kernel.run(Y, *fixed, ii, jj, u, interval, out[r:r + k])
            r += k
        return out, flips


def _start_matrix(start, observed: SignedNetwork | None, n: int) -> np.ndarray:
    if isinstance(start, SignedNetwork):
        if start.n != n:
            raise InputError(f"start network has n={start.n}, expected {n}")
        return start.to_matrix()
    if start == "empty":
        return np.zeros((n, n), dtype=np.int8)
    if observed is None:
        raise InputError("start='observed' needs the observed network")
    return observed.to_matrix()


def sample_period(spec: ModelSpec, theta, y_prev: SignedNetwork | None,
                  settings: SamplerSettings, observed: SignedNetwork | None = None,
                  covariates: Mapping[str, np.ndarray] | None = None, *,
                  n: int | None = None, phase: str = "simulate", iteration: int = 0,
                  t: int = 1, backend: str | None = None) -> SampleBatch:
    """Draw ``settings.m`` networks from the model conditional on ``y_prev``."""
    if n is None:
        ref = y_prev if y_prev is not None else observed
        if ref is None:
            raise InputError("cannot infer n without y_prev or observed")
        n = ref.n
    ctx = PeriodContext(spec, n, y_prev, covariates)
    model = GibbsModel(spec, theta, ctx)
    Y = _start_matrix(settings.start, observed, n)
    rng = stream(settings.seed, phase, iteration, t)
    states, flips = model.run(Y, rng, settings.burn_in, settings.interval, settings.m, backend)
    toggles = settings.burn_in + settings.interval * settings.m
    return SampleBatch(n, states, eval_states(ctx, states), toggles, flips,
                       backend or kernels.BACKEND)


def sample_series(spec: ModelSpec, theta, series: NetworkSeries, settings: SamplerSettings, *,
                  phase: str = "simulate", iteration: int = 0, backend: str | None = None,
                  n_jobs: int = 1) -> list[SampleBatch]:
    """One independent chain per modeled period, each given the observed lag."""
    if series.T < 1:
        raise InputError("sampling a series needs T >= 1")

    def one(t):
        y_t, y_prev, cov = series.period(t)
        return sample_period(spec, theta, y_prev, settings, y_t, cov, phase=phase,
                             iteration=iteration, t=t, backend=backend)

    periods = range(1, series.T + 1)
    if n_jobs > 1 and series.T > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(one, periods))
    return [one(t) for t in periods]


def summed_chain(batches: list[SampleBatch]) -> np.ndarray:
    """Per-sample statistics summed over periods, shape ``(m, p)``."""
    total = batches[0].stat_chain.copy()
    for b in batches[1:]:
        total += b.stat_chain
    return total


def dyad_conditional(spec: ModelSpec, theta, y: SignedNetwork, y_prev: SignedNetwork | None,
                     i: int, j: int, covariates=None) -> tuple[float, float, float]:
    """Full conditional ``(P(+), P(-), P(0))`` of dyad ``(i, j)``."""
    from .statistics import conditional_logodds

    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise InputError("theta must be finite")
    lp, ln = conditional_logodds(spec, theta, y, y_prev, i, j, covariates)
    logits = np.array([lp, ln, 0.0])
    w = np.exp(logits - logits.max())
    w /= w.sum()
    return float(w[0]), float(w[1]), float(w[2])
