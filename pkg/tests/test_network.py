import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sergm.errors import InputError
from sergm.network import (
    CovariateSet, DyadState, NetworkSeries, SignedNetwork, build_network, dyad_index,
    n_dyads, nodal_to_dyadic, signed_degree,
)

from conftest import networks


def test_build_empty():
    net = build_network(3, [])
    assert all(net.get_dyad(i, j) == DyadState.ZERO for i in range(3) for j in range(3) if i != j)


def test_build_two_edges():
    net = build_network(3, [(0, 1, 1), (0, 2, -1)])
    assert net.get_dyad(0, 1) == DyadState.PLUS
    assert net.get_dyad(0, 2) == DyadState.MINUS
    assert net.get_dyad(1, 2) == DyadState.ZERO


@pytest.mark.parametrize("edges", [
    [(1, 1, 1)],            # self-loop
    [(0, 1, 1), (1, 0, -1)],  # duplicate dyad
    [(0, 3, 1)],            # out of range
    [(0, 1, 2)],            # bad sign
    [(-1, 1, 1)],
])
def test_build_rejects(edges):
    with pytest.raises(InputError):
        build_network(3, edges)


def test_set_get_symmetry():
    net = SignedNetwork(3)
    net.set_dyad(0, 1, DyadState.MINUS)
    assert net.get_dyad(1, 0) == DyadState.MINUS
    assert net.get_dyad(0, 2) == DyadState.ZERO
    with pytest.raises(InputError):
        net.set_dyad(2, 2, DyadState.PLUS)
    with pytest.raises(InputError):
        net.get_dyad(0, 5)


def test_signed_degree_star():
    net = build_network(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])
    assert signed_degree(net, 0, DyadState.PLUS) == 3
    assert signed_degree(net, 0, DyadState.MINUS) == 0
    assert signed_degree(net, 1, DyadState.PLUS) == 1


def test_dyad_index_matches_triu_order():
    n = 6
    iu, ju = np.triu_indices(n, 1)
    assert [dyad_index(n, int(i), int(j)) for i, j in zip(iu, ju)] == list(range(n_dyads(n)))
    assert dyad_index(n, 4, 2) == dyad_index(n, 2, 4)


@given(networks(), st.data())
def test_set_and_restore_roundtrip(net, data):
    n = net.n
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1).filter(lambda v: v != i))
    state = data.draw(st.sampled_from([0, 1, -1]))
    before = net.copy()
    old = net.get_dyad(i, j)
    net.set_dyad(i, j, state)
    net.set_dyad(i, j, old)
    assert net == before


@given(networks())
def test_degree_sum_is_twice_edges(net):
    for sign in (1, -1):
        total = sum(signed_degree(net, a, sign) for a in range(net.n))
        assert total == 2 * net.count(sign)


@given(networks())
def test_matrix_roundtrip(net):
    Y = net.to_matrix()
    assert np.array_equal(Y, Y.T)
    assert np.all(np.diag(Y) == 0)
    assert SignedNetwork.from_matrix(Y) == net


def test_from_matrix_rejects_asymmetric():
    Y = np.zeros((3, 3), dtype=int)
    Y[0, 1] = 1
    with pytest.raises(InputError):
        SignedNetwork.from_matrix(Y)


def test_series_requires_common_n():
    with pytest.raises(InputError):
        NetworkSeries([SignedNetwork(3), SignedNetwork(4)])


def test_series_periods():
    y0 = build_network(3, [(0, 1, 1)])
    y1 = build_network(3, [(0, 2, -1)])
    s = NetworkSeries([y0, y1])
    assert s.T == 1 and s.n == 3
    y, prev, cov = s.period(1)
    assert y == y1 and prev == y0 and cov == {}
    with pytest.raises(InputError):
        s.period(2)


def test_static_series_has_empty_lag():
    y = build_network(4, [(0, 1, 1)])
    s = NetworkSeries.static_network(y)
    assert s.static and s.T == 1
    assert s.networks[0].count(0) == n_dyads(4)


def test_covariates_time_invariant_and_per_period():
    c = CovariateSet()
    c.add("a", np.ones((3, 3)) - np.eye(3))
    c.add("b", [np.eye(3) * 0, np.ones((3, 3))])
    c.validate(3, 2)
    assert np.array_equal(c.at(2)["a"], c.at(1)["a"])
    assert c.at(2)["b"][0, 1] == 1
    with pytest.raises(InputError):
        c.validate(3, 3)
    with pytest.raises(InputError):
        c.add("bad", np.array([[0, 1, 0], [2, 0, 0], [0, 0, 0]]))


def test_nodal_transforms():
    x = [1.0, 3.0, 3.0]
    d = nodal_to_dyadic(x, "absdiff")
    assert d[0, 1] == 2 and d[1, 2] == 0 and d[0, 0] == 0
    m = nodal_to_dyadic(["a", "b", "b"], "match")
    assert m[1, 2] == 1 and m[0, 1] == 0 and m[1, 1] == 0
    with pytest.raises(InputError):
        nodal_to_dyadic(x, "ratio")


@settings(max_examples=30)
@given(networks(min_n=3, max_n=6), st.randoms())
def test_relabel_preserves_counts(net, rnd):
    perm = list(range(net.n))
    rnd.shuffle(perm)
    other = net.relabel(perm)
    for s in (0, 1, -1):
        assert other.count(s) == net.count(s)
