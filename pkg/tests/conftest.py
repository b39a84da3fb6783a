import numpy as np
import pytest
from hypothesis import strategies as st

from sergm.network import SignedNetwork, n_dyads
from sergm.statistics import ModelSpec, Term, TermKind

LN2 = float(np.log(2))


def all_terms(alpha=LN2, gw_form="standard", covariate="x"):
    """One term of every kind (Exo terms use covariate ``x``)."""
    terms = []
    for kind in TermKind:
        if kind.family in ("GWESE", "GWESF", "GWD"):
            terms.append(Term(kind, alpha=alpha, gw_form=gw_form))
        elif kind.family == "Exo":
            terms.append(Term(kind, covariate=covariate))
        else:
            terms.append(Term(kind))
    return terms


def random_network(rng, n, density=0.6):
    states = rng.choice([0, 1, -1], size=n_dyads(n),
                        p=[1 - density, density / 2, density / 2]).astype(np.int8)
    return SignedNetwork(n, states)


def random_covariate(rng, n):
    x = rng.normal(size=(n, n))
    x = (x + x.T) / 2
    np.fill_diagonal(x, 0.0)
    return x


@st.composite
def networks(draw, min_n=3, max_n=7):
    n = draw(st.integers(min_n, max_n))
    states = draw(st.lists(st.sampled_from([0, 1, -1]), min_size=n_dyads(n), max_size=n_dyads(n)))
    return SignedNetwork(n, np.array(states, dtype=np.int8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def edges_spec():
    return ModelSpec([TermKind.EdgesPos, TermKind.EdgesNeg])


FAST_CONFIG = {
    "seed": 5,
    "estimation": {"burn_in": 500, "interval": 20, "m": 1000},
    "variance": {"burn_in": 500, "interval": 20, "m": 1000},
    "bridge": {"burn_in": 500, "interval": 50, "m": 200},
    "gof": {"burn_in": 200, "interval": 10, "m": 100},
    "simulate": {"burn_in": 200, "interval": 10, "m": 5},
    "j_bridges": 4,
}


def write_fixture(root, config=None):
    """Write a small two-network panel with a dyadic covariate, an endogenous
    spec, an edges spec and a fast config; return the paths by name."""
    import json

    root.mkdir(parents=True, exist_ok=True)
    (root / "y0.csv").write_text("i,j,sign\n0,1,1\n1,2,-1\n2,3,1\n3,4,1\n0,4,-1\n", encoding="utf-8")
    (root / "y1.csv").write_text("i,j,sign\n0,1,1\n1,2,-1\n2,3,1\n0,2,-1\n1,4,1\n0,4,1\n3,4,-1\n",
                                 encoding="utf-8")
    lines = ["i,j,value"]
    for i in range(5):
        for j in range(i + 1, 5):
            lines.append(f"{i},{j},{((i * 7 + j * 3) % 5) / 4}")
    (root / "dist.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest = {"n": 5, "periods": ["y0.csv", "y1.csv"],
                "covariates": {"dist": {"type": "dyadic", "files": ["dist.csv"]}}}
    (root / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    spec = {"terms": [{"kind": "Edges", "sign": "+"}, {"kind": "Edges", "sign": "-"},
                      {"kind": "Stability", "sign": "+"},
                      {"kind": "GWESF", "sign": "+", "alpha": LN2},
                      {"kind": "Exo", "sign": "+", "covariate": "dist"}]}
    (root / "spec.json").write_text(json.dumps(spec), encoding="utf-8")
    edges = {"terms": [{"kind": "Edges", "sign": "+"}, {"kind": "Edges", "sign": "-"}]}
    (root / "edges.json").write_text(json.dumps(edges), encoding="utf-8")
    (root / "config.json").write_text(json.dumps(config or FAST_CONFIG), encoding="utf-8")
    return {name: root / f"{name}.json" for name in ("manifest", "spec", "edges", "config")}


def output_files(out):
    """Relative path -> bytes for everything under ``out``."""
    return {str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}


@pytest.fixture
def criterion(request):
    """Record an acceptance verdict; the terminal summary prints one line each."""
    def record(number, ok, detail=""):
        request.config.stash.setdefault(_VERDICTS, {})[number] = ("PASS" if ok else "FAIL", detail)
        assert ok, f"criterion {number}: {detail}"

    return record


_VERDICTS = pytest.StashKey()


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call" or call.excinfo is None:
        return
    verdicts = item.config.stash.setdefault(_VERDICTS, {})
    number = marker.args[0]
    if call.excinfo.errisinstance(pytest.skip.Exception):
        verdicts[number] = ("SKIP", str(call.excinfo.value.msg))
    elif number not in verdicts:
        verdicts[number] = ("FAIL", call.excinfo.exconly().splitlines()[0])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = config.stash.get(_VERDICTS, {})
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        status, detail = verdicts[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {detail}")
