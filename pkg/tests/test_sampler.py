import math

import numpy as np
import pytest
from scipy import stats

from sergm import kernels
from sergm.errors import InputError
from sergm.inference import mcmc_standard_error
from sergm.network import NetworkSeries, SignedNetwork, build_network, n_dyads
from sergm.oracle import exact_distribution, exact_moments, state_index
from sergm.sampler import (
    SamplerSettings, dyad_conditional, sample_period, sample_series, stream, summed_chain,
)
from sergm.statistics import ModelSpec, PeriodContext, Term, TermKind, eval_states

from conftest import LN2, all_terms, random_covariate, random_network

TRIADIC = ModelSpec([TermKind.EdgesPos, TermKind.EdgesNeg, Term(TermKind.GWESFPos, alpha=LN2),
                     Term(TermKind.GWESENeg, alpha=LN2), Term(TermKind.GWDNeg, alpha=LN2),
                     TermKind.IsolatesPos])
TRIADIC_THETA = np.array([-0.4, -0.2, 0.5, 0.4, -0.3, 0.3])


def test_settings_validation():
    with pytest.raises(InputError):
        SamplerSettings(burn_in=-1)
    with pytest.raises(InputError):
        SamplerSettings(interval=0)
    with pytest.raises(InputError):
        SamplerSettings(m=0)
    with pytest.raises(InputError):
        SamplerSettings(start="full")


def test_dyad_conditional_examples():
    y = SignedNetwork(3)
    assert dyad_conditional(ModelSpec([TermKind.EdgesPos]), [0.0], y, None, 0, 1) == pytest.approx((1 / 3,) * 3)
    p = dyad_conditional(ModelSpec([TermKind.EdgesPos]), [math.log(2)], y, None, 0, 1)
    assert p == pytest.approx((0.5, 0.25, 0.25), abs=1e-12)
    with pytest.raises(InputError):
        dyad_conditional(ModelSpec([TermKind.EdgesPos]), [np.inf], y, None, 0, 1)


def test_dyad_conditional_ignores_current_state(rng):
    y = random_network(rng, 5)
    for s in (0, 1, -1):
        z = y.copy()
        z.set_dyad(1, 3, s)
        p = dyad_conditional(TRIADIC, TRIADIC_THETA, z, None, 1, 3)
        assert sum(p) == pytest.approx(1.0, abs=1e-12)
        if s == 0:
            ref = p
        assert p == pytest.approx(ref, abs=1e-14)


def test_dyad_conditional_matches_enumeration(rng):
    probs = exact_distribution(TRIADIC, TRIADIC_THETA, n=4)
    for _ in range(10):
        y = random_network(rng, 4)
        i, j = (int(v) for v in sorted(rng.choice(4, 2, replace=False)))
        w = []
        for s in (1, -1, 0):
            z = y.copy()
            z.set_dyad(i, j, s)
            w.append(probs[state_index(z)])
        w = np.array(w) / sum(w)
        assert dyad_conditional(TRIADIC, TRIADIC_THETA, y, None, i, j) == pytest.approx(w, abs=1e-10)


def test_dyad_conditional_depends_only_on_change_statistics():
    # edges-only: every other dyad leaves the change statistics unchanged
    spec = ModelSpec([TermKind.EdgesPos, TermKind.EdgesNeg])
    y = build_network(4, [(0, 1, 1)])
    before = dyad_conditional(spec, [0.3, -0.2], y, None, 2, 3)
    y.set_dyad(0, 2, -1)
    assert dyad_conditional(spec, [0.3, -0.2], y, None, 2, 3) == before


def test_uniform_edges_mean():
    spec = ModelSpec([TermKind.EdgesPos])
    b = sample_period(spec, [0.0], None, SamplerSettings(100, 3, 20_000, "empty", seed=1), n=3)
    se = mcmc_standard_error(b.stat_chain[:, 0])
    assert abs(b.stat_chain[:, 0].mean() - 1.0) < 3 * se


def test_strong_positive_edges_fill_network():
    spec = ModelSpec([TermKind.EdgesPos])
    b = sample_period(spec, [20.0], None, SamplerSettings(500, 10, 50, "empty", seed=2), n=5)
    assert np.all(b.networks == 1)


def test_mean_matches_exact_moments():
    mean, _ = exact_moments(TRIADIC, TRIADIC_THETA, n=4)
    b = sample_period(TRIADIC, TRIADIC_THETA, None, SamplerSettings(1000, 20, 100_000, "empty", seed=3), n=4)
    se = mcmc_standard_error(b.stat_chain)
    assert np.all(np.abs(b.stat_chain.mean(axis=0) - mean) < 3 * se + 1e-12)


def test_short_stationarity():
    spec = ModelSpec([TermKind.EdgesPos, TermKind.EdgesNeg, Term(TermKind.GWESFPos, alpha=LN2),
                      Term(TermKind.GWESENeg, alpha=LN2)])
    theta = np.array([-0.2, 0.1, 0.6, 0.5])
    exact = exact_distribution(spec, theta, n=3)
    b = sample_period(spec, theta, None, SamplerSettings(100, 3, 50_000, "empty", seed=4), n=3)
    idx = [state_index(b.network(k)) for k in range(b.m)]
    emp = np.bincount(idx, minlength=27) / b.m
    assert 0.5 * np.abs(emp - exact).sum() < 0.03


def test_stat_chain_recomputes_exactly(rng):
    spec = ModelSpec(all_terms())
    y_prev = random_network(rng, 6)
    cov = {"x": random_covariate(rng, 6)}
    theta = rng.normal(scale=0.2, size=spec.p)
    b = sample_period(spec, theta, y_prev, SamplerSettings(200, 7, 30, "empty", seed=5), covariates=cov)
    ctx = PeriodContext(spec, 6, y_prev, cov)
    assert np.array_equal(eval_states(ctx, b.networks), b.stat_chain)
    assert b.networks.shape == (30, n_dyads(6))
    assert b.toggles == 200 + 7 * 30


def test_determinism_and_seed_sensitivity():
    s = SamplerSettings(100, 5, 40, "empty", seed=9)
    a = sample_period(TRIADIC, TRIADIC_THETA, None, s, n=5)
    b = sample_period(TRIADIC, TRIADIC_THETA, None, s, n=5)
    c = sample_period(TRIADIC, TRIADIC_THETA, None, s.with_(seed=10), n=5)
    assert np.array_equal(a.networks, b.networks)
    assert not np.array_equal(a.networks, c.networks)


def test_phase_streams_differ():
    a = stream(1, "estimation").random(4)
    b = stream(1, "variance").random(4)
    c = stream(1, "estimation", iteration=1).random(4)
    assert not np.allclose(a, b) and not np.allclose(a, c)


def test_start_observed_requires_network():
    with pytest.raises(InputError):
        sample_period(TRIADIC, TRIADIC_THETA, None, SamplerSettings(m=1), n=4)


@pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled kernel not built")
def test_backends_agree(rng):
    spec = ModelSpec(all_terms(alpha=1.2))
    y_prev = random_network(rng, 7)
    cov = {"x": random_covariate(rng, 7)}
    theta = rng.normal(scale=0.3, size=spec.p)
    s = SamplerSettings(300, 11, 25, "observed", seed=6)
    start = random_network(rng, 7)
    a = sample_period(spec, theta, y_prev, s, start, cov, backend="cython")
    b = sample_period(spec, theta, y_prev, s, start, cov, backend="python")
    assert np.array_equal(a.networks, b.networks)
    assert a.flips == b.flips


def test_sample_series_single_period_equals_sample_period(rng):
    y0 = random_network(rng, 5)
    y1 = random_network(rng, 5)
    spec = ModelSpec([TermKind.EdgesPos, TermKind.StabilityPos, Term(TermKind.GWESFPos, alpha=LN2)])
    theta = np.array([-0.5, 1.0, 0.2])
    s = SamplerSettings(100, 5, 20, "observed", seed=3)
    (batch,) = sample_series(spec, theta, NetworkSeries([y0, y1]), s, phase="simulate")
    direct = sample_period(spec, theta, y0, s, y1, phase="simulate", t=1)
    assert np.array_equal(batch.networks, direct.networks)


def test_identical_periods_give_matching_distributions(rng):
    y = random_network(rng, 6)
    spec = ModelSpec([TermKind.EdgesPos, TermKind.EdgesNeg, Term(TermKind.GWESFPos, alpha=LN2)])
    series = NetworkSeries([SignedNetwork(6), y, y])
    s = SamplerSettings(500, 30, 2000, "observed", seed=8)
    b1, b2 = sample_series(spec, [-0.3, -0.3, 0.3], series, s, n_jobs=2)
    assert not np.array_equal(b1.networks, b2.networks)  # independent streams
    for q in range(spec.p):
        assert stats.mannwhitneyu(b1.stat_chain[:, q], b2.stat_chain[:, q]).pvalue > 0.001
    assert np.array_equal(summed_chain([b1, b2]), b1.stat_chain + b2.stat_chain)


def test_parallel_matches_sequential(rng):
    nets = [random_network(rng, 5) for _ in range(4)]
    series = NetworkSeries(nets)
    spec = ModelSpec([TermKind.EdgesPos, TermKind.StabilityNeg])
    s = SamplerSettings(50, 3, 10, "observed", seed=2)
    seq = sample_series(spec, [0.1, 0.4], series, s)
    par = sample_series(spec, [0.1, 0.4], series, s, n_jobs=3)
    for a, b in zip(seq, par):
        assert np.array_equal(a.networks, b.networks)
