import json

import numpy as np
import pytest
from click.testing import CliRunner

from sergm.cli import main
from sergm.config import RunConfig, load_config
from sergm.errors import InputError
from sergm.io import (
    check_spec_against_series, load_series, load_spec, read_dyadic_covariate, read_edgelist,
    write_edgelist,
)
from sergm.network import build_network
from sergm.statistics import ModelSpec, Term, TermKind

from conftest import output_files, write_fixture


def run(args):
    result = CliRunner().invoke(main, [str(a) for a in args])
    return result


# ---------------------------------------------------------------- files

def test_two_period_manifest(tmp_path):
    paths = write_fixture(tmp_path)
    series = load_series(paths["manifest"])
    assert series.T == 1 and series.n == 5 and not series.static
    assert series.networks[1].get_dyad(0, 2) == -1
    assert series.covariates.names() == ["dist"]
    assert series.covariates.at(1)["dist"][1, 0] == series.covariates.at(1)["dist"][0, 1]


def test_static_manifest(tmp_path):
    write_fixture(tmp_path)
    (tmp_path / "static.json").write_text(json.dumps({"n": 5, "static": True, "periods": ["y1.csv"]}))
    series = load_series(tmp_path / "static.json")
    assert series.static and series.T == 1 and series.networks[0].count(0) == 10


def test_bad_sign_names_file_and_line(tmp_path):
    write_fixture(tmp_path)
    (tmp_path / "y1.csv").write_text("i,j,sign\n0,1,1\n1,2,2\n", encoding="utf-8")
    with pytest.raises(InputError, match=r"y1\.csv:3"):
        load_series(tmp_path / "manifest.json")


@pytest.mark.parametrize("body, pattern", [
    ("i,j\n0,1\n", "header"),
    ("i,j,sign\n0,0,1\n", "self-loop"),
    ("i,j,sign\n0,9,1\n", "out of range"),
    ("i,j,sign\n0,1,1\n1,0,-1\n", "y.csv"),
    ("i,j,sign\na,1,1\n", "not an integer"),
])
def test_edgelist_errors(tmp_path, body, pattern):
    (tmp_path / "y.csv").write_text(body, encoding="utf-8")
    with pytest.raises(InputError, match=pattern):
        read_edgelist(tmp_path / "y.csv", 5)


def test_edgelist_roundtrip(tmp_path):
    net = build_network(5, [(0, 1, 1), (3, 2, -1), (1, 4, -1)])
    write_edgelist(net, tmp_path / "e.csv")
    assert read_edgelist(tmp_path / "e.csv", 5) == net


def test_dyadic_covariate_missing_pair(tmp_path):
    (tmp_path / "c.csv").write_text("i,j,value\n0,1,1.0\n0,2,2.0\n", encoding="utf-8")
    with pytest.raises(InputError, match="missing value"):
        read_dyadic_covariate(tmp_path / "c.csv", 3)


def test_inconsistent_n_and_missing_file(tmp_path):
    write_fixture(tmp_path)
    (tmp_path / "m.json").write_text(json.dumps({"n": 3, "periods": ["y0.csv", "y1.csv"]}))
    with pytest.raises(InputError, match="out of range"):
        load_series(tmp_path / "m.json")
    (tmp_path / "m.json").write_text(json.dumps({"n": 5, "periods": ["y0.csv", "nope.csv"]}))
    with pytest.raises(InputError, match="nope.csv"):
        load_series(tmp_path / "m.json")


def test_missing_covariate_names_term(tmp_path):
    paths = write_fixture(tmp_path)
    series = load_series(paths["manifest"])
    spec = ModelSpec([TermKind.EdgesPos, Term(TermKind.ExoNeg, covariate="trade")])
    with pytest.raises(InputError, match=r"Exo-\(trade\)"):
        check_spec_against_series(spec, series)


def test_spec_file_defaults(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"terms": [{"kind": "GWESE", "sign": "-"}, {"kind": "EdgesPos"}]}))
    spec = load_spec(tmp_path / "s.json", default_alpha=1.5)
    assert spec.terms[0].alpha == 1.5 and spec.labels == ["GWESE-", "Edges+"]
    with pytest.raises(InputError):
        load_spec(tmp_path / "s.json")  # no alpha anywhere


# ---------------------------------------------------------------- config

def test_config_defaults_match_reference_settings():
    cfg = RunConfig()
    assert cfg.alpha == 1.5
    est = cfg.sampler("estimation")
    assert (est.burn_in, est.interval, est.m) == (10_000, 1_000, 1_000)
    assert cfg.j_bridges == 16 and cfg.gamma_grid == 2000
    assert cfg.estimation_settings().step_margin == 1.05
    assert cfg.bridge_settings().method == "trapezoid"


def test_config_file_overrides(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"seed": 3, "variance": {"m": 50}}))
    cfg = load_config(tmp_path / "c.json", seed=9)
    assert cfg.seed == 9 and cfg.sampler("variance").m == 50 and cfg.sampler("variance").seed == 9
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("data", [{"sed": 1}, {"estimation": {"m": 0}}, {"alpha": -1},
                                  {"estimation": {"thin": 3}}, {"gamma_grid": 5}])
def test_config_rejects(tmp_path, data):
    (tmp_path / "c.json").write_text(json.dumps(data))
    with pytest.raises(InputError):
        load_config(tmp_path / "c.json")


# ---------------------------------------------------------------- CLI

def test_cli_fit_and_followups(tmp_path):
    paths = write_fixture(tmp_path / "data")
    out = tmp_path / "fit"
    r = run(["fit", "--manifest", paths["manifest"], "--spec", paths["spec"], "--config", paths["config"],
             "--out", out, "--level", "0.9", "--with-aic"])
    assert r.exit_code == 0, r.output
    doc = json.loads((out / "fit.json").read_text())
    assert doc["schema"] == "sergm.fit/1"
    assert [t["term"] for t in doc["terms"]] == ["Edges+", "Edges-", "Stability+", "GWESF+", "Exo+(dist)"]
    assert doc["variance"]["ci_level"] == 0.9
    assert doc["diagnostics"]["gamma_trace"][-1] == 1.0
    assert np.isfinite(doc["aic"])
    header = (out / "chain_variance.csv").read_text().splitlines()[0]
    assert header == "sample,Edges+,Edges-,Stability+,GWESF+,Exo+(dist)"

    common = ["--manifest", paths["manifest"], "--config", paths["config"], "--fit", out / "fit.json"]
    r = run(["simulate", *common, "--out", tmp_path / "sim"])
    assert r.exit_code == 0, r.output
    assert len(list((tmp_path / "sim" / "networks").glob("period1_sample*.csv"))) == 5
    r = run(["gof", *common, "--out", tmp_path / "gof", "--period", "1", "--family", "degree+"])
    assert r.exit_code == 0, r.output
    assert (tmp_path / "gof" / "gof.csv").read_text().splitlines()[1].startswith("degree+,0,")
    r = run(["aic", *common, "--out", tmp_path / "aic"])
    assert r.exit_code == 0, r.output
    assert json.loads((tmp_path / "aic" / "aic.json").read_text())["p"] == 5


def test_cli_census(tmp_path):
    paths = write_fixture(tmp_path / "data")
    r = run(["census", "--manifest", paths["manifest"], "--out", tmp_path / "c"])
    assert r.exit_code == 0, r.output
    rows = (tmp_path / "c" / "census.csv").read_text().splitlines()
    assert len(rows) == 3  # header plus y0 and y1
    # y1 has two complete triads, (0,1,2) with two negatives and (0,1,4) all positive
    assert rows[2].split(",")[1:4] == ["2", "2", "0"]


def test_cli_oracle(tmp_path):
    paths = write_fixture(tmp_path / "data")
    r = run(["oracle", "--manifest", paths["manifest"], "--spec", paths["edges"], "--out", tmp_path / "o"])
    assert r.exit_code == 0, r.output
    doc = json.loads((tmp_path / "o" / "oracle.json").read_text())
    assert doc["periods"][0]["mean"] == pytest.approx(doc["observed"], abs=1e-8)


def test_cli_boundary_exit_code(tmp_path):
    paths = write_fixture(tmp_path / "data")
    edges = "".join(f"{i},{j},1\n" for i in range(5) for j in range(i + 1, 5))
    (tmp_path / "data" / "y1.csv").write_text("i,j,sign\n" + edges, encoding="utf-8")
    r = run(["fit", "--manifest", paths["manifest"], "--spec", paths["edges"], "--config", paths["config"],
             "--out", tmp_path / "o"])
    assert r.exit_code == 3
    assert "Edges+" in r.output


def test_cli_input_exit_code(tmp_path):
    paths = write_fixture(tmp_path / "data")
    (tmp_path / "data" / "y1.csv").write_text("i,j,sign\n0,1,2\n", encoding="utf-8")
    r = run(["census", "--manifest", paths["manifest"], "--out", tmp_path / "o"])
    assert r.exit_code == 2 and "y1.csv:2" in r.output
    r = run(["simulate", "--manifest", paths["manifest"], "--out", tmp_path / "o"])
    assert r.exit_code == 2


def test_cli_budget_exit_code(tmp_path):
    write_fixture(tmp_path)
    rows = "".join(f"{i},{i + 1},1\n" for i in range(5))
    (tmp_path / "big.csv").write_text("i,j,sign\n" + rows, encoding="utf-8")
    (tmp_path / "big.json").write_text(json.dumps({"n": 6, "static": True, "periods": ["big.csv"]}))
    r = run(["oracle", "--manifest", tmp_path / "big.json", "--spec", tmp_path / "edges.json",
             "--out", tmp_path / "o"])
    assert r.exit_code == 6


def test_cli_non_convergence_exit_code(tmp_path):
    cfg = {"max_outer_iters": 1, "estimation": {"burn_in": 100, "interval": 5, "m": 200}}
    paths = write_fixture(tmp_path, cfg)
    r = run(["fit", "--manifest", paths["manifest"], "--spec", paths["edges"], "--config", paths["config"],
             "--out", tmp_path / "o"])
    assert r.exit_code == 5


@pytest.mark.parametrize("sub", ["fit", "simulate", "gof", "aic", "census", "oracle"])
def test_cli_deterministic(tmp_path, sub):
    paths = write_fixture(tmp_path / "data")
    fit_dir = tmp_path / "fit0"
    if sub in ("simulate", "gof", "aic"):
        assert run(["fit", "--manifest", paths["manifest"], "--spec", paths["spec"], "--config",
                    paths["config"], "--out", fit_dir]).exit_code == 0
    args = {
        "fit": ["--manifest", paths["manifest"], "--spec", paths["spec"], "--config", paths["config"]],
        "simulate": ["--manifest", paths["manifest"], "--config", paths["config"], "--fit", fit_dir / "fit.json"],
        "gof": ["--manifest", paths["manifest"], "--config", paths["config"], "--fit", fit_dir / "fit.json"],
        "aic": ["--manifest", paths["manifest"], "--config", paths["config"], "--fit", fit_dir / "fit.json"],
        "census": ["--manifest", paths["manifest"]],
        "oracle": ["--manifest", paths["manifest"], "--spec", paths["edges"]],
    }[sub]
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        r = run([sub, *args, "--out", out])
        assert r.exit_code == 0, r.output
        outs.append(output_files(out))
    assert outs[0] == outs[1] and outs[0]


def test_cli_seed_changes_fit(tmp_path):
    paths = write_fixture(tmp_path / "data")
    base = ["fit", "--manifest", paths["manifest"], "--spec", paths["edges"], "--config", paths["config"]]
    assert run([*base, "--out", tmp_path / "a", "--seed", "1"]).exit_code == 0
    assert run([*base, "--out", tmp_path / "b", "--seed", "2"]).exit_code == 0
    a = json.loads((tmp_path / "a" / "fit.json").read_text())
    b = json.loads((tmp_path / "b" / "fit.json").read_text())
    assert a["theta_hat"] != b["theta_hat"] and a["config"]["seed"] == 1
