"""Simulation-based goodness of fit on degree and shared-partner distributions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .network import NetworkSeries, SignedNetwork
from .sampler import SamplerSettings, sample_period
from .statistics import ModelSpec, partner_counts

FAMILIES = ("degree+", "degree-", "ese+", "ese-", "esf+", "esf-")
QUANTILES = (0.0, 0.25, 0.5, 0.75, 1.0)
CSV_COLUMNS = ("family", "k", "observed", "q0", "q25", "q50", "q75", "q100")


@dataclass
class GofFamily:
    observed: np.ndarray  # (K,)
    quantiles: np.ndarray  # (K, 5) min, q25, median, q75, max


@dataclass
class GofReport:
    period: int
    m: int
    families: dict[str, GofFamily] = field(default_factory=dict)

    def summary(self) -> dict:
        """Share of cells whose observed count lies within the simulated range."""
        inside = total = 0
        for fam in self.families.values():
            lo, hi = fam.quantiles[:, 0], fam.quantiles[:, -1]
            inside += int(np.sum((fam.observed >= lo) & (fam.observed <= hi)))
            total += len(fam.observed)
        return {
            "period": self.period,
            "simulations": self.m,
            "families": list(self.families),
            "cells": total,
            "cells_within_range": inside,
        }


def _check_families(families) -> list[str]:
    families = list(FAMILIES if families is None else families)
    unknown = [f for f in families if f not in FAMILIES]
    if unknown:
        raise InputError(f"unknown GOF families {unknown}; choose from {FAMILIES}")
    return families


def gof_simulate(spec: ModelSpec, theta_hat, series: NetworkSeries, period: int = 1,
                 families=None, settings: SamplerSettings | None = None, *,
                 backend: str | None = None) -> GofReport:
    """Simulate ``settings.m`` networks for ``period`` given the observed lag."""
    settings = settings or SamplerSettings(m=1000)
    families = _check_families(families)
    if not 1 <= period <= series.T:
        raise InputError(f"period {period} outside 1..{series.T}")
    y_t, y_prev, cov = series.period(period)
    batch = sample_period(spec, theta_hat, y_prev, settings, y_t, cov, phase="gof",
                          iteration=0, t=period, backend=backend)
    obs = partner_counts(y_t)
    sims = [partner_counts(SignedNetwork(series.n, row)) for row in batch.networks]
    report = GofReport(period, batch.m)
    for fam in families:
        counts = np.array([s[fam] for s in sims], dtype=float)
        report.families[fam] = GofFamily(obs[fam].astype(float),
                                         np.quantile(counts, QUANTILES, axis=0).T)
    return report


def gof_report_csv(report: GofReport, truncate: bool = True) -> str:
    """One row per (family, k); trailing cells that are zero everywhere are dropped."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for name, fam in report.families.items():
        K = len(fam.observed)
        if truncate:
            nonzero = np.flatnonzero((fam.observed != 0) | np.any(fam.quantiles != 0, axis=1))
            K = int(nonzero[-1]) + 1 if nonzero.size else 1
        for k in range(K):
            w.writerow([name, k, _num(fam.observed[k]), *(_num(v) for v in fam.quantiles[k])])
    return buf.getvalue()


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def parse_gof_csv(text: str, period: int = 1, m: int = 0) -> GofReport:
    """Inverse of :func:`gof_report_csv` (on the rows that were written)."""
    rows = list(csv.DictReader(io.StringIO(text)))
    report = GofReport(period, m)
    grouped: dict[str, list] = {}
    for r in rows:
        grouped.setdefault(r["family"], []).append(r)
    for name, rs in grouped.items():
        rs.sort(key=lambda r: int(r["k"]))
        observed = np.array([float(r["observed"]) for r in rs])
        quant = np.array([[float(r[c]) for c in CSV_COLUMNS[3:]] for r in rs])
        report.families[name] = GofFamily(observed, quant)
    return report
