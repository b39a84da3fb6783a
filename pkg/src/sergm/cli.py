"""Command-line entry point ``sergm``.

Exit codes: 0 success, 2 bad input, 3 boundary, 4 degeneracy,
5 non-convergence, 6 enumeration budget exceeded.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from .config import RunConfig, load_config
from .errors import InputError, SergmError
from .estimation import FitResult, fit_mcmc_mle
from .gof import FAMILIES, gof_report_csv, gof_simulate
from .io import check_spec_against_series, load_series, load_spec, write_edgelist
from .network import NetworkSeries
from .sampler import sample_series
from .selection import aic, loglik_at_mle
from .statistics import ModelSpec, sum_over_time, triad_balance_census


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_chain(chain: np.ndarray, labels, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", *labels])
        for k, row in enumerate(chain):
            w.writerow([k, *(repr(float(v)) for v in row)])


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SergmError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)

    return wrapper


def _outdir(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(manifest, spec_path, cfg: RunConfig) -> tuple[NetworkSeries, ModelSpec | None]:
    series = load_series(manifest)
    spec = None
    if spec_path is not None:
        spec = load_spec(spec_path, default_alpha=cfg.alpha, default_gw_form=cfg.gw_form)
        check_spec_against_series(spec, series)
    return series, spec


def _model_and_theta(spec, fit_path, theta_text, cfg):
    """Spec and parameters from ``--fit`` or from ``--spec`` plus ``--theta``."""
    if fit_path is not None:
        fit = FitResult.from_json(Path(fit_path).read_text(encoding="utf-8"))
        return fit.spec, fit.theta_hat, fit
    if spec is None or theta_text is None:
        raise InputError("give --fit, or both --spec and --theta")
    try:
        theta = np.array([float(x) for x in theta_text.split(",")])
    except ValueError:
        raise InputError(f"--theta must be comma-separated numbers, got {theta_text!r}") from None
    if theta.shape != (spec.p,):
        raise InputError(f"--theta has {theta.size} values, the spec has {spec.p} terms")
    return spec, theta, None


common = [
    click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False),
                 help="Series manifest JSON."),
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                 help="Run configuration JSON."),
    click.option("--seed", type=int, default=None, help="Overrides the config seed."),
    click.option("--out", default="out", show_default=True, type=click.Path(file_okay=False),
                 help="Output directory."),
]


def with_common(fn):
    for opt in reversed(common):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Signed exponential random graph models for networks and network panels."""


@main.command()
@with_common
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--level", type=float, default=None, help="Confidence level for intervals.")
@click.option("--with-aic", is_flag=True, help="Also evaluate the log-likelihood and AIC.")
@_handle_errors
def fit(manifest, config_path, seed, out, spec_path, level, with_aic):
    """Estimate a model by MCMC maximum likelihood."""
    cfg = load_config(config_path, seed=seed, level=level)
    series, spec = _load(manifest, spec_path, cfg)
    out = _outdir(out)
    result = fit_mcmc_mle(spec, series, cfg.estimation_settings(), level=cfg.level)
    if with_aic:
        ll = loglik_at_mle(spec, series, result.theta_hat, cfg.bridge_settings())
        result.loglik = ll.loglik
        result.aic = aic(result, ll.loglik)
    doc = result.to_dict()
    doc["config"] = cfg.to_dict()
    _dump(doc, out / "fit.json")
    _write_chain(result.estimation_chain, spec.labels, out / "chain_estimation.csv")
    _write_chain(result.stat_chain, spec.labels, out / "chain_variance.csv")
    for row in doc["terms"]:
        click.echo(f"{row['term']:>16} {row['estimate']:10.4f}  se {row['se']:.4f}  "
                   f"[{row['ci_lower']:.3f}, {row['ci_upper']:.3f}]")
    if with_aic:
        click.echo(f"loglik {result.loglik:.4f}  AIC {result.aic:.4f}")


@main.command()
@with_common
@click.option("--fit", "fit_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--theta", "theta_text", help="Comma-separated parameters (with --spec).")
@_handle_errors
def simulate(manifest, config_path, seed, out, fit_path, spec_path, theta_text):
    """Draw networks for every period given the observed lagged network."""
    cfg = load_config(config_path, seed=seed)
    series, spec = _load(manifest, spec_path, cfg)
    spec, theta, _ = _model_and_theta(spec, fit_path, theta_text, cfg)
    check_spec_against_series(spec, series)
    out = _outdir(out)
    batches = sample_series(spec, theta, series, cfg.sampler("simulate"), phase="simulate",
                            n_jobs=cfg.n_jobs)
    netdir = out / "networks"
    netdir.mkdir(exist_ok=True)
    width = len(str(batches[0].m - 1))
    for t, b in enumerate(batches, start=1):
        for k in range(b.m):
            write_edgelist(b.network(k), netdir / f"period{t}_sample{k:0{width}d}.csv")
    with open(out / "statistics.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "sample", *spec.labels])
        for t, b in enumerate(batches, start=1):
            for k, row in enumerate(b.stat_chain):
                w.writerow([t, k, *(repr(float(v)) for v in row)])
    _dump({"spec": spec.to_dict(), "theta": theta.tolist(), "seed": cfg.seed,
           "periods": series.T, "samples_per_period": batches[0].m,
           "mean_statistics": [b.stat_chain.mean(axis=0).tolist() for b in batches]},
          out / "simulate.json")
    click.echo(f"wrote {batches[0].m} networks for each of {series.T} period(s) to {netdir}")


@main.command()
@with_common
@click.option("--fit", "fit_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--theta", "theta_text")
@click.option("--period", type=int, default=None, help="Modeled period (default: last).")
@click.option("--family", "families", multiple=True, type=click.Choice(FAMILIES),
              help="Restrict to these statistic families (repeatable).")
@_handle_errors
def gof(manifest, config_path, seed, out, fit_path, spec_path, theta_text, period, families):
    """Compare observed degree and shared-partner counts with simulations."""
    cfg = load_config(config_path, seed=seed)
    series, spec = _load(manifest, spec_path, cfg)
    spec, theta, _ = _model_and_theta(spec, fit_path, theta_text, cfg)
    check_spec_against_series(spec, series)
    period = series.T if period is None else period
    out = _outdir(out)
    report = gof_simulate(spec, theta, series, period, families or None, cfg.sampler("gof"))
    (out / "gof.csv").write_text(gof_report_csv(report), encoding="utf-8")
    summary = report.summary()
    summary["seed"] = cfg.seed
    _dump(summary, out / "gof.json")
    click.echo(f"period {period}: {summary['cells_within_range']}/{summary['cells']} cells "
               f"within the simulated range ({report.m} simulations)")


@main.command(name="aic")
@with_common
@click.option("--fit", "fit_path", required=True, type=click.Path(exists=True, dir_okay=False))
@_handle_errors
def aic_cmd(manifest, config_path, seed, out, fit_path):
    """Log-likelihood at a fitted estimate and its AIC."""
    cfg = load_config(config_path, seed=seed)
    series = load_series(manifest)
    fit = FitResult.from_json(Path(fit_path).read_text(encoding="utf-8"))
    check_spec_against_series(fit.spec, series)
    out = _outdir(out)
    ll = loglik_at_mle(fit.spec, series, fit.theta_hat, cfg.bridge_settings())
    doc = ll.to_dict()
    doc["aic"] = aic(fit, ll.loglik)
    doc["seed"] = cfg.seed
    doc["p"] = fit.spec.p
    _dump(doc, out / "aic.json")
    click.echo(f"loglik {ll.loglik:.4f}  AIC {doc['aic']:.4f}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default="out", show_default=True, type=click.Path(file_okay=False))
@_handle_errors
def census(manifest, out):
    """Balanced and imbalanced complete triads for every network in the manifest."""
    series = load_series(manifest)
    out = _outdir(out)
    start = 1 if series.static else 0
    rows = []
    for t in range(start, series.T + 1):
        net = series.networks[t]
        bal, imb, frac = triad_balance_census(net, "strong")
        wbal, _, wfrac = triad_balance_census(net, "weak")
        rows.append({"network": t, "complete_triads": bal + imb, "balanced": bal,
                     "imbalanced": imb, "balanced_share": frac,
                     "weakly_balanced": wbal, "weakly_balanced_share": wfrac})
    with open(out / "census.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    _dump({"networks": rows}, out / "census.json")
    for r in rows:
        click.echo(f"network {r['network']}: {r['balanced']}/{r['complete_triads']} balanced "
                   f"({r['balanced_share']:.3f})")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--theta", "theta_text", help="Evaluate here instead of at the exact MLE.")
@click.option("--out", default="out", show_default=True, type=click.Path(file_okay=False))
@_handle_errors
def oracle(manifest, spec_path, config_path, theta_text, out):
    """Exact log-likelihood, normalizing constants, moments and MLE by enumeration (n <= 5)."""
    from .oracle import exact_kappa, exact_loglik, exact_mle, exact_moments

    cfg = load_config(config_path)
    series, spec = _load(manifest, spec_path, cfg)
    out = _outdir(out)
    doc = {"spec": spec.to_dict(), "observed": sum_over_time(spec, series).tolist()}
    if theta_text is None:
        theta = exact_mle(spec, series)
        doc["mle"] = theta.tolist()
    else:
        _, theta, _ = _model_and_theta(spec, None, theta_text, cfg)
    doc["theta"] = theta.tolist()
    doc["loglik"] = exact_loglik(spec, theta, series)
    periods = []
    for t in range(1, series.T + 1):
        _, y_prev, cov = series.period(t)
        mean, covm = exact_moments(spec, theta, y_prev, covariates=cov)
        periods.append({"period": t,
                        "log_kappa": exact_kappa(spec, theta, y_prev, covariates=cov),
                        "mean": mean.tolist(), "covariance": covm.tolist()})
    doc["periods"] = periods
    _dump(doc, out / "oracle.json")
    click.echo(f"exact loglik {doc['loglik']:.6f} at theta {np.round(theta, 6).tolist()}")


if __name__ == "__main__":
    main()
