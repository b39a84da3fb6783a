"""Signed networks, network series and covariates.

Dyads of an ``n``-actor undirected network are stored in a flat ``int8`` array
of length ``n(n-1)/2`` in row-major upper-triangular order::

    (0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1)

so that dyad ``(i, j)`` with ``i < j`` lives at index
``i*(2n - i - 1)//2 + (j - i - 1)``. This is the same order as
``numpy.triu_indices(n, 1)``. States are encoded as ``+1`` (positive tie),
``-1`` (negative tie) and ``0`` (no tie).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError


class DyadState(enum.IntEnum):
    PLUS = 1
    MINUS = -1
    ZERO = 0

    @property
    def symbol(self) -> str:
        return {1: "+", -1: "-", 0: "0"}[int(self)]


def n_dyads(n: int) -> int:
    return n * (n - 1) // 2


def dyad_index(n: int, i: int, j: int) -> int:
    """Flat index of dyad ``{i, j}``; order of ``i`` and ``j`` is irrelevant."""
    if not (0 <= i < n and 0 <= j < n):
        raise InputError(f"actor index out of range for n={n}: ({i}, {j})")
    if i == j:
        raise InputError(f"self-loop ({i}, {i}) is not allowed")
    if i > j:
        i, j = j, i
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


class SignedNetwork:
    """Undirected signed network without self-loops.

    Parameters
    ----------
    n : int
        Number of actors, at least 2.
    states : array_like, optional
        Flat upper-triangular dyad states in ``{-1, 0, 1}``. Defaults to the
        empty network.
    """

    __slots__ = ("n", "states")

    def __init__(self, n: int, states=None):
        n = int(n)
        if n < 2:
            raise InputError(f"a network needs at least 2 actors, got n={n}")
        self.n = n
        if states is None:
            self.states = np.zeros(n_dyads(n), dtype=np.int8)
        else:
            arr = np.array(states, dtype=np.int8).reshape(-1)
            if arr.shape[0] != n_dyads(n):
                raise InputError(
                    f"expected {n_dyads(n)} dyad states for n={n}, got {arr.shape[0]}"
                )
            if np.any((arr < -1) | (arr > 1)):
                raise InputError("dyad states must be in {-1, 0, 1}")
            self.states = arr

    @classmethod
    def from_matrix(cls, matrix) -> "SignedNetwork":
        mat = np.asarray(matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InputError("adjacency matrix must be square")
        if not np.array_equal(mat, mat.T):
            raise InputError("adjacency matrix must be symmetric")
        if np.any(np.diag(mat) != 0):
            raise InputError("adjacency matrix must have a zero diagonal")
        n = mat.shape[0]
        iu = np.triu_indices(n, 1)
        return cls(n, mat[iu])

    def to_matrix(self) -> np.ndarray:
        """Dense symmetric ``int8`` adjacency matrix with zero diagonal."""
        mat = np.zeros((self.n, self.n), dtype=np.int8)
        iu = np.triu_indices(self.n, 1)
        mat[iu] = self.states
        mat.T[iu] = self.states
        return mat

    def get_dyad(self, i: int, j: int) -> DyadState:
        return DyadState(int(self.states[dyad_index(self.n, i, j)]))

    def set_dyad(self, i: int, j: int, state) -> None:
        value = int(state)
        if value not in (-1, 0, 1):
            raise InputError(f"invalid dyad state {state!r}")
        self.states[dyad_index(self.n, i, j)] = value

    def edges(self) -> list[tuple[int, int, int]]:
        """Non-zero dyads as ``(i, j, sign)`` with ``i < j``."""
        iu, ju = np.triu_indices(self.n, 1)
        nz = np.flatnonzero(self.states)
        return [(int(iu[k]), int(ju[k]), int(self.states[k])) for k in nz]

    def count(self, state) -> int:
        return int(np.count_nonzero(self.states == int(state)))

    def relabel(self, perm: Sequence[int]) -> "SignedNetwork":
        """Network with actor ``a`` renamed to ``perm[a]``."""
        perm = np.asarray(perm)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise InputError("perm must be a permutation of range(n)")
        mat = self.to_matrix()
        out = np.zeros_like(mat)
        out[np.ix_(perm, perm)] = mat
        return SignedNetwork.from_matrix(out)

    def copy(self) -> "SignedNetwork":
        return SignedNetwork(self.n, self.states.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SignedNetwork):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.states, other.states)

    def __hash__(self):
        return hash((self.n, self.states.tobytes()))

    def __repr__(self) -> str:
        return (
            f"SignedNetwork(n={self.n}, plus={self.count(1)}, minus={self.count(-1)})"
        )


def build_network(n: int, edges: Iterable[tuple[int, int, int]] = ()) -> SignedNetwork:
    """Network with the listed ``(i, j, sign)`` dyads set and all others zero."""
    net = SignedNetwork(n)
    seen = set()
    for i, j, sign in edges:
        i, j, sign = int(i), int(j), int(sign)
        if sign not in (1, -1):
            raise InputError(f"edge sign must be +1 or -1, got {sign}")
        k = dyad_index(n, i, j)
        if k in seen:
            raise InputError(f"duplicate dyad ({min(i, j)}, {max(i, j)})")
        seen.add(k)
        net.states[k] = sign
    return net


def signed_degree(network: SignedNetwork, actor: int, sign) -> int:
    """Number of ties of the given sign incident to ``actor``."""
    if not 0 <= actor < network.n:
        raise InputError(f"actor {actor} out of range for n={network.n}")
    row = network.to_matrix()[actor]
    return int(np.count_nonzero(row == int(sign)))


@dataclass
class CovariateSet:
    """Dyadic covariates per modeled period.

    ``dyadic[name]`` is a list of ``n x n`` symmetric float matrices, one per
    modeled period ``t = 1..T``; a single-element list is treated as
    time-invariant. Nodal attributes are converted to dyadic form with
    :func:`nodal_to_dyadic` at ingestion time.
    """

    dyadic: dict[str, list[np.ndarray]] = field(default_factory=dict)

    def add(self, name: str, matrices) -> None:
        if isinstance(matrices, np.ndarray) and matrices.ndim == 2:
            matrices = [matrices]
        mats = []
        for m in matrices:
            m = np.asarray(m, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise InputError(f"covariate {name!r}: matrices must be square")
            if not np.all(np.isfinite(m[~np.eye(m.shape[0], dtype=bool)])):
                raise InputError(f"covariate {name!r} has non-finite entries")
            if not np.allclose(m, m.T, equal_nan=True):
                raise InputError(f"covariate {name!r} must be symmetric")
            mats.append(m)
        if not mats:
            raise InputError(f"covariate {name!r} has no periods")
        self.dyadic[name] = mats

    def names(self) -> list[str]:
        return list(self.dyadic)

    def at(self, t: int) -> dict[str, np.ndarray]:
        """Covariate matrices for modeled period ``t`` (1-based)."""
        out = {}
        for name, mats in self.dyadic.items():
            if len(mats) == 1:
                out[name] = mats[0]
            elif 1 <= t <= len(mats):
                out[name] = mats[t - 1]
            else:
                raise InputError(f"covariate {name!r} has no value for period {t}")
        return out

    def validate(self, n: int, T: int) -> None:
        for name, mats in self.dyadic.items():
            if len(mats) not in (1, T):
                raise InputError(
                    f"covariate {name!r} has {len(mats)} periods, expected 1 or {T}"
                )
            for m in mats:
                if m.shape != (n, n):
                    raise InputError(
                        f"covariate {name!r} has shape {m.shape}, expected ({n}, {n})"
                    )


def nodal_to_dyadic(values, transform: str = "absdiff") -> np.ndarray:
    """Pairwise covariate from a nodal attribute.

    ``absdiff`` gives ``|x_i - x_j|`` (continuous attributes), ``match`` gives
    ``1{x_i == x_j}`` (categorical attributes).
    """
    x = np.asarray(values)
    if transform == "absdiff":
        x = x.astype(float)
        if not np.all(np.isfinite(x)):
            raise InputError("nodal covariate has non-finite values")
        mat = np.abs(x[:, None] - x[None, :])
    elif transform == "match":
        mat = (x[:, None] == x[None, :]).astype(float)
    else:
        raise InputError(f"unknown nodal transform {transform!r}")
    np.fill_diagonal(mat, 0.0)
    return mat


class NetworkSeries:
    """Networks ``y_0, ..., y_T`` on a fixed actor set plus covariates.

    ``y_0`` only conditions the first transition. A cross-sectional network is
    represented as ``T = 1`` with an empty ``y_0`` (see :meth:`static_network`).
    """

    def __init__(
        self,
        networks: Sequence[SignedNetwork],
        covariates: CovariateSet | None = None,
        static: bool = False,
    ):
        networks = list(networks)
        if not networks:
            raise InputError("a series needs at least one network")
        n = networks[0].n
        for t, net in enumerate(networks):
            if net.n != n:
                raise InputError(f"network {t} has n={net.n}, expected {n}")
        self.networks = networks
        self.covariates = covariates if covariates is not None else CovariateSet()
        self.static = static
        if self.T >= 1:
            self.covariates.validate(n, self.T)

    @classmethod
    def static_network(
        cls, network: SignedNetwork, covariates: CovariateSet | None = None
    ) -> "NetworkSeries":
        return cls([SignedNetwork(network.n), network], covariates, static=True)

    @property
    def n(self) -> int:
        return self.networks[0].n

    @property
    def T(self) -> int:
        return len(self.networks) - 1

    def period(self, t: int) -> tuple[SignedNetwork, SignedNetwork, Mapping[str, np.ndarray]]:
        """``(y_t, y_{t-1}, covariates_t)`` for modeled period ``t`` in ``1..T``."""
        if not 1 <= t <= self.T:
            raise InputError(f"period {t} outside 1..{self.T}")
        return self.networks[t], self.networks[t - 1], self.covariates.at(t)
