import numpy as np
import pytest

from sergm.errors import DegeneracyError, InputError
from sergm.inference import (
    VarianceReport, build_report, confidence_intervals, estimate_fisher, fisher_from_chain,
    mcmc_standard_error,
)
from sergm.network import NetworkSeries, SignedNetwork
from sergm.oracle import exact_moments
from sergm.sampler import SamplerSettings
from sergm.statistics import ModelSpec, Term, TermKind

from conftest import LN2

EDGES = ModelSpec([TermKind.EdgesPos, TermKind.EdgesNeg])


def covariance_se(chain):
    """Batch-means standard errors of each sample covariance entry."""
    centered = chain - chain.mean(axis=0)
    p = chain.shape[1]
    products = np.einsum("ki,kj->kij", centered, centered).reshape(len(chain), p * p)
    return mcmc_standard_error(products).reshape(p, p)


def ar1(rng, phi, M):
    e = rng.normal(size=M)
    x = np.empty(M)
    x[0] = e[0] / np.sqrt(1 - phi ** 2)
    for k in range(1, M):
        x[k] = phi * x[k - 1] + e[k]
    return x


def test_fisher_closed_form_edges_n3():
    series = NetworkSeries.static_network(SignedNetwork(3))
    fisher, chain = estimate_fisher([0.0, 0.0], EDGES, series, SamplerSettings(100, 3, 20_000, "empty", seed=1),
                                    return_chain=True)
    exact = 3 * np.array([[2 / 9, -1 / 9], [-1 / 9, 2 / 9]])
    assert np.all(np.abs(fisher - exact) < 3 * covariance_se(chain))


def test_fisher_matches_oracle_n4():
    spec = ModelSpec([TermKind.EdgesPos, TermKind.EdgesNeg, Term(TermKind.GWESFPos, alpha=LN2),
                      Term(TermKind.GWESENeg, alpha=LN2)])
    theta = np.array([-0.3, -0.1, 0.4, 0.3])
    series = NetworkSeries.static_network(SignedNetwork(4))
    fisher, chain = estimate_fisher(theta, spec, series, SamplerSettings(1000, 10, 50_000, "empty", seed=2),
                                    return_chain=True)
    _, exact = exact_moments(spec, theta, n=4)
    assert np.all(np.abs(fisher - exact) < 3 * covariance_se(chain))


def test_fisher_symmetric_psd():
    rng = np.random.default_rng(0)
    chain = rng.normal(size=(500, 4)) @ rng.normal(size=(4, 4))
    f = fisher_from_chain(chain)
    assert np.max(np.abs(f - f.T)) <= 1e-12
    assert np.linalg.eigvalsh(f).min() >= -1e-10


def test_fisher_degenerate():
    series = NetworkSeries.static_network(SignedNetwork(4))
    with pytest.raises(DegeneracyError, match=r"Edges-"):
        estimate_fisher([30.0, -30.0], EDGES, series, SamplerSettings(200, 5, 200, "empty", seed=1))
    with pytest.raises(InputError):
        estimate_fisher([np.nan, 0.0], EDGES, series, SamplerSettings(m=10))


def test_mcse_constant_chain():
    assert np.all(mcmc_standard_error(np.ones((400, 2))) == 0)


def test_mcse_iid():
    errs = [mcmc_standard_error(np.random.default_rng(s).normal(size=10_000)) for s in range(20)]
    assert np.mean(errs) == pytest.approx(0.01, rel=0.25)


def test_mcse_ar1():
    M = 10_000
    errs = [mcmc_standard_error(ar1(np.random.default_rng(s), 0.5, M)) for s in range(20)]
    assert np.mean(errs) == pytest.approx(np.sqrt(3) / np.sqrt(M), rel=0.25)


def test_mcse_decreases_with_thinning():
    x = ar1(np.random.default_rng(7), 0.9, 1_000_000)
    ses = [mcmc_standard_error(x[::k][:10_000]) for k in (1, 10, 100)]
    assert ses[0] > ses[1] > ses[2]


def test_mcse_short_chain():
    with pytest.raises(InputError):
        mcmc_standard_error(np.zeros(99))


def test_interval_examples():
    assert confidence_intervals([2.0], [[0.0]])[0] == pytest.approx([2.0, 2.0])
    assert confidence_intervals([0.0], [[1.0]], 0.95)[0] == pytest.approx([-1.959964, 1.959964], abs=1e-6)
    assert confidence_intervals([1.0], [[4.0]], 0.5)[0] == pytest.approx([1 - 2 * 0.674490, 1 + 2 * 0.674490],
                                                                           abs=1e-6)
    with pytest.raises(InputError):
        confidence_intervals([0.0], [[-1.0]])
    with pytest.raises(InputError):
        confidence_intervals([0.0], [[1.0]], 1.0)


def test_intervals_widen_with_level():
    cov = np.diag([0.5, 2.0])
    widths = [np.diff(confidence_intervals([0, 0], cov, lv), axis=1).ravel() for lv in (0.5, 0.8, 0.9, 0.99)]
    assert np.all(np.diff(np.array(widths), axis=0) > 0)


def test_report_combines_on_variance_scale():
    rng = np.random.default_rng(3)
    chain = rng.normal(size=(2500, 2)) * [1.0, 2.0]
    fisher = fisher_from_chain(chain)
    rep = build_report([0.1, 0.2], fisher, chain)
    assert np.allclose(rep.combined, rep.fisher_inverse + rep.mcmc_variance)
    assert np.count_nonzero(rep.mcmc_variance - np.diag(np.diag(rep.mcmc_variance))) == 0
    back = VarianceReport.from_dict(rep.to_dict())
    assert np.array_equal(back.combined, rep.combined) and back.ci_level == 0.95
