"""Sufficient statistics, change statistics and the triad balance census.

Every statistic is a function ``s(y_t, y_{t-1})`` of the current network and
(optionally) the lagged network. Terms fall into three groups:

* dyadic terms (edges, stability, exogenous covariates, lagged common
  friends/enemies) which are sums of a fixed per-dyad value over ties of one
  sign and therefore keep dyads conditionally independent;
* actor terms (isolates, geometrically weighted degree);
* triadic terms (geometrically weighted edgewise shared enemies/friends).

Geometric weights
-----------------
For decay ``alpha`` the weight of an edge (or actor) with ``k >= 1``
partners is ``exp(alpha) * (1 - (1 - exp(-alpha))**k)`` in the ``standard``
form and ``exp(alpha) * exp(-alpha*k)`` in the ``literal`` form. ``k = 0``
always has weight 0 and ``k = 1`` has weight 1 in both forms.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError
from .network import SignedNetwork, n_dyads

GW_FORMS = ("standard", "literal")


class TermKind(str, enum.Enum):
    EdgesPos = "EdgesPos"
    EdgesNeg = "EdgesNeg"
    IsolatesPos = "IsolatesPos"
    IsolatesNeg = "IsolatesNeg"
    StabilityPos = "StabilityPos"
    StabilityNeg = "StabilityNeg"
    GWESEPos = "GWESEPos"
    GWESENeg = "GWESENeg"
    GWESFPos = "GWESFPos"
    GWESFNeg = "GWESFNeg"
    GWDPos = "GWDPos"
    GWDNeg = "GWDNeg"
    ExoPos = "ExoPos"
    ExoNeg = "ExoNeg"
    ExoAny = "ExoAny"
    CFPos = "CFPos"
    CFNeg = "CFNeg"
    CEPos = "CEPos"
    CENeg = "CENeg"

    @property
    def family(self) -> str:
        for suffix in ("Pos", "Neg", "Any"):
            if self.value.endswith(suffix):
                return self.value[: -len(suffix)]
        raise AssertionError(self.value)

    @property
    def sign(self) -> int:
        """Sign of the focal tie: +1, -1, or 0 for "any non-zero tie"."""
        return {"Pos": 1, "Neg": -1, "Any": 0}[self.value[-3:]]

    @classmethod
    def from_parts(cls, family: str, sign) -> "TermKind":
        suffix = {
            "+": "Pos", "pos": "Pos", "1": "Pos", "+1": "Pos",
            "-": "Neg", "neg": "Neg", "-1": "Neg",
            "any": "Any", "±": "Any", "+-": "Any",
        }.get(str(sign).lower())
        if suffix is None:
            raise InputError(f"unknown term sign {sign!r}")
        try:
            return cls(family + suffix)
        except ValueError:
            raise InputError(f"unknown term {family!r} with sign {sign!r}") from None


_GW_FAMILIES = {"GWESE", "GWESF", "GWD"}
_LAG_FAMILIES = {"Stability", "CF", "CE"}
_DYADIC_FAMILIES = {"Edges", "Stability", "Exo", "CF", "CE"}
_SIGN_SYMBOL = {1: "+", -1: "-", 0: "±"}


@dataclass(frozen=True)
class Term:
    """One coordinate of the statistic vector."""

    kind: TermKind
    alpha: float | None = None
    gw_form: str = "standard"
    covariate: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TermKind(self.kind))
        if self.kind.family in _GW_FAMILIES:
            if self.alpha is None or not (self.alpha > 0 and math.isfinite(self.alpha)):
                raise InputError(f"{self.kind.value} needs a finite decay alpha > 0")
            if self.gw_form not in GW_FORMS:
                raise InputError(f"gw_form must be one of {GW_FORMS}, got {self.gw_form!r}")
            object.__setattr__(self, "alpha", float(self.alpha))
        else:
            object.__setattr__(self, "alpha", None)
            object.__setattr__(self, "gw_form", "standard")
        if self.kind.family == "Exo":
            if not self.covariate:
                raise InputError(f"{self.kind.value} needs a covariate name")
        else:
            object.__setattr__(self, "covariate", None)

    @property
    def family(self) -> str:
        return self.kind.family

    @property
    def sign(self) -> int:
        return self.kind.sign

    @property
    def dyadic_independent(self) -> bool:
        return self.family in _DYADIC_FAMILIES

    @property
    def needs_lag(self) -> bool:
        return self.family in _LAG_FAMILIES

    @property
    def label(self) -> str:
        base = f"{self.family}{_SIGN_SYMBOL[self.sign]}"
        if self.covariate:
            base += f"({self.covariate})"
        return base

    def to_dict(self) -> dict:
        out = {"kind": self.family, "sign": _SIGN_SYMBOL[self.sign].replace("±", "any")}
        if self.alpha is not None:
            out["alpha"] = self.alpha
            out["gw_form"] = self.gw_form
        if self.covariate is not None:
            out["covariate"] = self.covariate
        return out

    @classmethod
    def from_dict(cls, d: Mapping, default_alpha: float | None = None,
                  default_gw_form: str = "standard") -> "Term":
        if "kind" not in d:
            raise InputError(f"term entry without 'kind': {dict(d)!r}")
        kind = d["kind"]
        if "sign" in d:
            kind = TermKind.from_parts(kind, d["sign"])
        else:
            try:
                kind = TermKind(kind)
            except ValueError:
                raise InputError(f"unknown term kind {kind!r}") from None
        alpha = d.get("alpha", default_alpha) if kind.family in _GW_FAMILIES else None
        return cls(
            kind,
            alpha=alpha,
            gw_form=d.get("gw_form", default_gw_form),
            covariate=d.get("covariate"),
        )


class ModelSpec:
    """Ordered list of terms; the order fixes every statistic coordinate."""

    def __init__(self, terms: Sequence[Term | TermKind | str]):
        parsed = []
        for t in terms:
            if isinstance(t, Term):
                parsed.append(t)
            else:
                parsed.append(Term(TermKind(t)))
        if not parsed:
            raise InputError("a model needs at least one term")
        self.terms = tuple(parsed)

    @property
    def p(self) -> int:
        return len(self.terms)

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self.terms]

    @property
    def independent_mask(self) -> np.ndarray:
        """True for terms without endogenous dependence."""
        return np.array([t.dyadic_independent for t in self.terms], dtype=bool)

    @property
    def is_dyadic_independent(self) -> bool:
        return bool(self.independent_mask.all())

    @property
    def needs_lag(self) -> bool:
        return any(t.needs_lag for t in self.terms)

    @property
    def covariate_names(self) -> list[str]:
        return sorted({t.covariate for t in self.terms if t.covariate})

    def subset(self, mask) -> "ModelSpec":
        return ModelSpec([t for t, keep in zip(self.terms, mask) if keep])

    def to_dict(self) -> dict:
        return {"terms": [t.to_dict() for t in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: Mapping, default_alpha=None, default_gw_form="standard") -> "ModelSpec":
        if "terms" not in d:
            raise InputError("model spec needs a 'terms' list")
        return cls([Term.from_dict(t, default_alpha, default_gw_form) for t in d["terms"]])

    def __eq__(self, other):
        return isinstance(other, ModelSpec) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"ModelSpec({', '.join(self.labels)})"


def gw_weights(alpha: float, form: str, kmax: int) -> np.ndarray:
    """Weights for partner counts ``0..kmax`` (weight of 0 is 0)."""
    k = np.arange(kmax + 1, dtype=float)
    if form == "standard":
        w = math.exp(alpha) * (1.0 - (1.0 - math.exp(-alpha)) ** k)
    elif form == "literal":
        w = math.exp(alpha) * np.exp(-alpha * k)
    else:
        raise InputError(f"unknown gw_form {form!r}")
    w[0] = 0.0
    return w


# --------------------------------------------------------------------------
# per-period context: dyadic value vectors for the dyadic terms


def _lag_partner_matrix(prev: np.ndarray, sign: int) -> np.ndarray:
    a = (prev == sign).astype(np.float64)
    out = a @ a
    np.fill_diagonal(out, 0.0)
    return out


class PeriodContext:
    """Per-period inputs resolved against a spec.

    Holds, for every dyadic term, the ``n x n`` matrix whose ``(i, j)`` entry is
    the term's change when dyad ``(i, j)`` switches from 0 to the term's sign.
    """

    def __init__(self, spec: ModelSpec, n: int, y_prev: SignedNetwork | None = None,
                 covariates: Mapping[str, np.ndarray] | None = None):
        self.spec = spec
        self.n = n
        covariates = covariates or {}
        if y_prev is not None and y_prev.n != n:
            raise InputError(f"lag network has n={y_prev.n}, expected {n}")
        prev = y_prev.to_matrix() if y_prev is not None else None
        self.dyad_mats: dict[int, np.ndarray] = {}
        cache: dict = {}
        for q, term in enumerate(spec.terms):
            fam = term.family
            if fam == "Edges":
                mat = cache.setdefault("ones", np.ones((n, n)) - np.eye(n))
            elif fam == "Exo":
                if term.covariate not in covariates:
                    raise InputError(f"covariate {term.covariate!r} required by {term.label} is missing")
                mat = np.asarray(covariates[term.covariate], dtype=float)
                if mat.shape != (n, n):
                    raise InputError(f"covariate {term.covariate!r} has shape {mat.shape}, expected ({n}, {n})")
                off = ~np.eye(n, dtype=bool)
                if not np.all(np.isfinite(mat[off])):
                    raise InputError(f"covariate {term.covariate!r} has non-finite entries")
                mat = np.where(off, mat, 0.0)
            elif fam in _LAG_FAMILIES:
                if prev is None:
                    raise InputError(f"{term.label} needs a lag network")
                if fam == "Stability":
                    mat = cache.setdefault(("stab", term.sign), (prev == term.sign).astype(float))
                elif fam == "CF":
                    mat = cache.setdefault("cf", _lag_partner_matrix(prev, 1))
                else:
                    mat = cache.setdefault("ce", _lag_partner_matrix(prev, -1))
            else:
                continue
            self.dyad_mats[q] = mat
        iu = np.triu_indices(n, 1)
        self.dyad_vecs = {q: m[iu] for q, m in self.dyad_mats.items()}
        self.weights = {
            q: gw_weights(t.alpha, t.gw_form, n)
            for q, t in enumerate(spec.terms) if t.family in _GW_FAMILIES
        }


# --------------------------------------------------------------------------
# full evaluation (batched; single networks go through the same code path)


def _dense_batch(states: np.ndarray, n: int) -> np.ndarray:
    m = states.shape[0]
    out = np.zeros((m, n, n), dtype=np.int8)
    iu, ju = np.triu_indices(n, 1)
    out[:, iu, ju] = states
    out[:, ju, iu] = states
    return out


def _hist(values: np.ndarray, mask: np.ndarray, nbins: int) -> np.ndarray:
    """Per-row histogram of ``values[r][mask[r]]`` over ``0..nbins-1``."""
    m = values.shape[0]
    offs = values + (np.arange(m) * nbins)[:, None]
    counts = np.bincount(offs[mask], minlength=m * nbins)
    return counts.reshape(m, nbins)


def _eval_chunk(ctx: PeriodContext, states: np.ndarray) -> np.ndarray:
    spec, n = ctx.spec, ctx.n
    m = states.shape[0]
    out = np.zeros((m, spec.p))
    pos = states == 1
    neg = states == -1
    need_dense = any(t.family in ("GWESE", "GWESF", "GWD", "Isolates") for t in spec.terms)
    if need_dense:
        Y = _dense_batch(states, n)
        P = (Y == 1).astype(np.float64)
        N = (Y == -1).astype(np.float64)
        iu, ju = np.triu_indices(n, 1)
        deg = {1: P.sum(axis=2).astype(np.int64), -1: N.sum(axis=2).astype(np.int64)}
        shared: dict[int, np.ndarray] = {}

        def partners(sign):
            if sign not in shared:
                A = P if sign == 1 else N
                shared[sign] = np.rint(A @ A)[:, iu, ju].astype(np.int64)
            return shared[sign]

    for q, term in enumerate(spec.terms):
        fam = term.family
        focal = pos if term.sign == 1 else neg
        if fam in _DYADIC_FAMILIES:
            vec = ctx.dyad_vecs[q]
            if fam in ("Edges",):
                out[:, q] = np.count_nonzero(focal, axis=1)
            elif term.sign == 0:
                out[:, q] = (((pos | neg) * vec)).sum(axis=1)
            else:
                out[:, q] = (focal * vec).sum(axis=1)
        elif fam == "Isolates":
            out[:, q] = np.count_nonzero(deg[term.sign] == 0, axis=1)
        elif fam == "GWD":
            counts = _hist(deg[term.sign], np.ones_like(deg[term.sign], dtype=bool), n + 1)
            out[:, q] = (counts * ctx.weights[q]).sum(axis=1)
        else:  # GWESE / GWESF
            partner_sign = -1 if fam == "GWESE" else 1
            counts = _hist(partners(partner_sign), focal, n + 1)
            out[:, q] = (counts * ctx.weights[q]).sum(axis=1)
    return out


def eval_states(ctx: PeriodContext, states: np.ndarray, chunk_bytes: int = 64 << 20) -> np.ndarray:
    """Statistics for a batch of flat dyad-state rows, shape ``(m, p)``."""
    states = np.atleast_2d(np.asarray(states, dtype=np.int8))
    if states.shape[1] != n_dyads(ctx.n):
        raise InputError("state rows do not match the network size")
    per_row = max(1, 8 * ctx.n * ctx.n * 4)
    step = max(1, chunk_bytes // per_row)
    parts = [_eval_chunk(ctx, states[a:a + step]) for a in range(0, states.shape[0], step)]
    if not parts:
        return np.zeros((0, ctx.spec.p))
    return np.vstack(parts)


def eval_vector(spec: ModelSpec, y_t: SignedNetwork, y_prev: SignedNetwork | None = None,
                covariates: Mapping[str, np.ndarray] | None = None) -> np.ndarray:
    """Statistic vector ``s(y_t, y_prev)`` in spec order."""
    ctx = PeriodContext(spec, y_t.n, y_prev, covariates)
    return eval_states(ctx, y_t.states[None, :])[0]


def eval_term(term: Term, y_t: SignedNetwork, y_prev: SignedNetwork | None = None,
              covariates: Mapping[str, np.ndarray] | None = None) -> float:
    return float(eval_vector(ModelSpec([term]), y_t, y_prev, covariates)[0])


def sum_over_time(spec: ModelSpec, series) -> np.ndarray:
    """Observed summed statistics over modeled periods ``1..T``."""
    if series.T < 1:
        raise InputError("summing over time needs T >= 1")
    total = np.zeros(spec.p)
    for t in range(1, series.T + 1):
        y_t, y_prev, cov = series.period(t)
        total += eval_vector(spec, y_t, y_prev, cov)
    return total


# --------------------------------------------------------------------------
# change statistics via local formulas


class LocalState:
    """Dense network plus degree and shared-partner tables, updated per toggle.

    ``shared[s][a, b]`` counts actors ``h`` with ``y_ah = y_bh = s``.
    """

    def __init__(self, Y: np.ndarray):
        self.Y = np.array(Y, dtype=np.int8)
        self.n = self.Y.shape[0]
        P = (self.Y == 1).astype(np.int64)
        N = (self.Y == -1).astype(np.int64)
        self.deg = {1: P.sum(axis=1), -1: N.sum(axis=1)}
        self.shared = {1: P @ P, -1: N @ N}

    def _apply(self, i, j, sign, inc):
        Y = self.Y
        self.deg[sign][i] += inc
        self.deg[sign][j] += inc
        sh = self.shared[sign]
        hj = np.flatnonzero(Y[j] == sign)
        hj = hj[(hj != i) & (hj != j)]
        sh[i, hj] += inc
        sh[hj, i] += inc
        hi = np.flatnonzero(Y[i] == sign)
        hi = hi[(hi != i) & (hi != j)]
        sh[j, hi] += inc
        sh[hi, j] += inc

    def set(self, i: int, j: int, value: int) -> None:
        old = int(self.Y[i, j])
        if old == value:
            return
        if old != 0:
            self._apply(i, j, old, -1)
        self.Y[i, j] = self.Y[j, i] = value
        if value != 0:
            self._apply(i, j, value, +1)

    def changes(self, ctx: PeriodContext, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        """``(Delta^{0->+}, Delta^{0->-})`` at dyad ``(i, j)``.

        The dyad must currently be 0.
        """
        Y = self.Y
        spec = ctx.spec
        dplus = np.zeros(spec.p)
        dminus = np.zeros(spec.p)
        for q, term in enumerate(spec.terms):
            fam = term.family
            if fam in _DYADIC_FAMILIES:
                v = ctx.dyad_mats[q][i, j]
                if term.sign >= 0:
                    dplus[q] = 1.0 if fam == "Edges" else v
                if term.sign <= 0:
                    dminus[q] = 1.0 if fam == "Edges" else v
                continue
            target = dplus if term.sign == 1 else dminus
            if fam == "Isolates":
                d = self.deg[term.sign]
                target[q] = -float(int(d[i] == 0) + int(d[j] == 0))
            elif fam == "GWD":
                d = self.deg[term.sign]
                w = ctx.weights[q]
                target[q] = (w[d[i] + 1] - w[d[i]]) + (w[d[j] + 1] - w[d[j]])
            else:
                s = term.sign
                qs = -1 if fam == "GWESE" else 1
                w = ctx.weights[q]
                sh = self.shared[qs]
                # focal edge (i, j) takes sign s
                focal = w[sh[i, j]]
                # other s-edges gain (i or j) as a partner when (i, j) takes sign qs
                a = np.flatnonzero((Y[i] == s) & (Y[j] == qs))
                b = np.flatnonzero((Y[j] == s) & (Y[i] == qs))
                gain = (w[sh[i, a] + 1] - w[sh[i, a]]).sum() + (w[sh[j, b] + 1] - w[sh[j, b]]).sum()
                if s == 1:
                    dplus[q] += focal
                else:
                    dminus[q] += focal
                if qs == 1:
                    dplus[q] += gain
                else:
                    dminus[q] += gain
        return dplus, dminus


def change_statistics(spec: ModelSpec, y_t: SignedNetwork, y_prev: SignedNetwork | None,
                      i: int, j: int, to_state, covariates=None) -> np.ndarray:
    """``s(y with y_ij = to_state) - s(y with y_ij = 0)``."""
    if i == j:
        raise InputError("change statistics need i != j")
    to_state = int(to_state)
    if to_state == 0:
        y_t.get_dyad(i, j)  # range check
        return np.zeros(spec.p)
    ctx = PeriodContext(spec, y_t.n, y_prev, covariates)
    st = LocalState(y_t.to_matrix())
    st.set(i, j, 0)
    dplus, dminus = st.changes(ctx, i, j)
    return dplus if to_state == 1 else dminus


def change_table(ctx: PeriodContext, y_t: SignedNetwork) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Change statistics of every dyad given the rest of ``y_t``.

    Returns ``(dplus, dminus, observed)`` with shapes ``(D, p)``, ``(D, p)``
    and ``(D,)`` in flat dyad order.
    """
    n = y_t.n
    st = LocalState(y_t.to_matrix())
    iu, ju = np.triu_indices(n, 1)
    D = iu.shape[0]
    dplus = np.zeros((D, ctx.spec.p))
    dminus = np.zeros((D, ctx.spec.p))
    for k in range(D):
        i, j = int(iu[k]), int(ju[k])
        old = int(st.Y[i, j])
        if old != 0:
            st.set(i, j, 0)
        dplus[k], dminus[k] = st.changes(ctx, i, j)
        if old != 0:
            st.set(i, j, old)
    return dplus, dminus, y_t.states.copy()


def conditional_logodds(spec: ModelSpec, theta, y_t: SignedNetwork, y_prev: SignedNetwork | None,
                        i: int, j: int, covariates=None) -> tuple[float, float]:
    """Log-odds of ``+`` and of ``-`` against ``0`` for dyad ``(i, j)``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.p,):
        raise InputError(f"theta has shape {theta.shape}, expected ({spec.p},)")
    ctx = PeriodContext(spec, y_t.n, y_prev, covariates)
    st = LocalState(y_t.to_matrix())
    st.set(i, j, 0)
    dplus, dminus = st.changes(ctx, i, j)
    return float(theta @ dplus), float(theta @ dminus)


# --------------------------------------------------------------------------
# descriptive summaries


def partner_counts(network: SignedNetwork) -> dict[str, np.ndarray]:
    """Per-family count distributions used for goodness of fit.

    Keys ``degree+``/``degree-`` give the number of actors with degree
    ``k = 0..n-1``; ``ese+``, ``ese-``, ``esf+``, ``esf-`` give the number of
    edges of the focal sign with exactly ``k = 0..n-2`` shared enemies/friends.
    """
    n = network.n
    Y = network.to_matrix()
    P = (Y == 1).astype(np.int64)
    N = (Y == -1).astype(np.int64)
    iu, ju = np.triu_indices(n, 1)
    SF = (P @ P)[iu, ju]
    SE = (N @ N)[iu, ju]
    s = network.states
    return {
        "degree+": np.bincount(P.sum(axis=1), minlength=n)[:n],
        "degree-": np.bincount(N.sum(axis=1), minlength=n)[:n],
        "ese+": np.bincount(SE[s == 1], minlength=n - 1)[: n - 1],
        "ese-": np.bincount(SE[s == -1], minlength=n - 1)[: n - 1],
        "esf+": np.bincount(SF[s == 1], minlength=n - 1)[: n - 1],
        "esf-": np.bincount(SF[s == -1], minlength=n - 1)[: n - 1],
    }


def triad_balance_census(network: SignedNetwork, mode: str = "strong") -> tuple[int, int, float]:
    """Balanced and imbalanced counts over complete triads.

    A triad is complete when all three dyads are non-zero. In ``strong`` mode
    it is balanced iff it has an even number of negative ties; ``weak`` mode
    also accepts all-negative triads.
    """
    if network.n < 3:
        raise InputError("triad census needs n >= 3")
    if mode not in ("strong", "weak"):
        raise InputError(f"mode must be 'strong' or 'weak', got {mode!r}")
    Y = network.to_matrix().astype(np.int64)
    A = np.abs(Y)
    N = (Y == -1).astype(np.int64)
    complete = int(np.trace(A @ A @ A)) // 6
    signed_sum = int(np.trace(Y @ Y @ Y)) // 6  # (#even-minus) - (#odd-minus)
    balanced = (complete + signed_sum) // 2
    if mode == "weak":
        balanced += int(np.trace(N @ N @ N)) // 6
    imbalanced = complete - balanced
    frac = balanced / complete if complete else float("nan")
    return balanced, imbalanced, frac
