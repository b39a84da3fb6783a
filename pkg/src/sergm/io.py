"""File formats: edge-list and covariate CSVs, series manifests, model specs.

Manifest layout (paths are relative to the manifest file)::

    {
      "n": 16,
      "static": false,
      "periods": ["y0.csv", "y1.csv", "y2.csv"],
      "covariates": {
        "dist": {"type": "dyadic", "files": ["dist.csv"]},
        "regime": {"type": "nodal", "transform": "match", "files": ["r1.csv", "r2.csv"]}
      }
    }

``periods`` lists ``y_0 .. y_T``. With ``"static": true`` it lists a single
network, which is modeled as period 1 after an empty ``y_0``. Covariate
``files`` holds one entry (time-invariant), one per modeled period, or one per
listed network (the entry for ``y_0`` is then ignored).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .network import CovariateSet, NetworkSeries, SignedNetwork, build_network, nodal_to_dyadic
from .statistics import ModelSpec


def _rows(path: Path, header: tuple[str, ...]):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or tuple(c.strip() for c in first) != header:
            raise InputError(f"{path}: expected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            yield lineno, [c.strip() for c in row]


def _int(text: str, path, lineno, what) -> int:
    try:
        return int(text)
    except ValueError:
        raise InputError(f"{path}:{lineno}: {what} {text!r} is not an integer") from None


def read_edgelist(path, n: int) -> SignedNetwork:
    """Read an ``i,j,sign`` CSV with 0-based actors and signs in {1, -1}."""
    path = Path(path)
    edges = []
    for lineno, (i, j, sign) in _rows(path, ("i", "j", "sign")):
        i = _int(i, path, lineno, "actor")
        j = _int(j, path, lineno, "actor")
        s = _int(sign, path, lineno, "sign")
        if s not in (1, -1):
            raise InputError(f"{path}:{lineno}: sign must be 1 or -1, got {s}")
        if not (0 <= i < n and 0 <= j < n):
            raise InputError(f"{path}:{lineno}: actor index out of range for n={n}")
        if i == j:
            raise InputError(f"{path}:{lineno}: self-loop on actor {i}")
        edges.append((i, j, s))
    try:
        return build_network(n, edges)
    except InputError as e:
        raise InputError(f"{path}: {e}") from None


def write_edgelist(network: SignedNetwork, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "sign"])
        for i, j, s in network.edges():
            w.writerow([i, j, s])


def _float(text, path, lineno) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"{path}:{lineno}: value {text!r} is not a number") from None
    if not np.isfinite(v):
        raise InputError(f"{path}:{lineno}: value must be finite")
    return v


def read_dyadic_covariate(path, n: int) -> np.ndarray:
    """Read ``i,j,value``; every off-diagonal pair must be given (either order)."""
    path = Path(path)
    mat = np.full((n, n), np.nan)
    for lineno, (i, j, value) in _rows(path, ("i", "j", "value")):
        i = _int(i, path, lineno, "actor")
        j = _int(j, path, lineno, "actor")
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise InputError(f"{path}:{lineno}: invalid dyad ({i}, {j}) for n={n}")
        v = _float(value, path, lineno)
        if not np.isnan(mat[i, j]) and mat[i, j] != v:
            raise InputError(f"{path}:{lineno}: conflicting values for dyad ({i}, {j})")
        mat[i, j] = mat[j, i] = v
    np.fill_diagonal(mat, 0.0)
    if np.isnan(mat).any():
        i, j = np.argwhere(np.isnan(mat))[0]
        raise InputError(f"{path}: missing value for dyad ({i}, {j})")
    return mat


def read_nodal_covariate(path, n: int) -> np.ndarray:
    """Read ``i,value`` for every actor."""
    path = Path(path)
    x = np.full(n, np.nan)
    for lineno, (i, value) in _rows(path, ("i", "value")):
        i = _int(i, path, lineno, "actor")
        if not 0 <= i < n:
            raise InputError(f"{path}:{lineno}: actor {i} out of range for n={n}")
        x[i] = _float(value, path, lineno)
    if np.isnan(x).any():
        raise InputError(f"{path}: missing value for actor {int(np.flatnonzero(np.isnan(x))[0])}")
    return x


def load_series(manifest) -> NetworkSeries:
    """Build a validated series from a manifest path or an already-parsed dict."""
    if isinstance(manifest, dict):
        data, base = manifest, Path(".")
    else:
        path = Path(manifest)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise InputError(f"cannot read manifest {path}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise InputError(f"manifest {path} is not valid JSON: {e}") from None
        base = path.parent
    try:
        n = int(data["n"])
        files = list(data["periods"])
    except (KeyError, TypeError, ValueError):
        raise InputError("manifest needs an integer 'n' and a 'periods' list") from None
    if n < 2:
        raise InputError("n must be >= 2")
    static = bool(data.get("static", False))
    if static and len(files) != 1:
        raise InputError("a static manifest lists exactly one network")
    if not static and len(files) < 2:
        raise InputError("a temporal manifest lists y_0 and at least one more network")
    networks = [read_edgelist(base / f, n) for f in files]
    if static:
        networks = [SignedNetwork(n)] + networks
    T = len(networks) - 1

    cov = CovariateSet()
    for name, entry in (data.get("covariates") or {}).items():
        kind = entry.get("type", "dyadic")
        cfiles = list(entry.get("files", []))
        if not static and len(cfiles) == len(files):
            cfiles = cfiles[1:]
        if len(cfiles) not in (1, T):
            raise InputError(f"covariate {name!r} lists {len(cfiles)} files; expected 1 or {T}")
        if kind == "dyadic":
            mats = [read_dyadic_covariate(base / f, n) for f in cfiles]
        elif kind == "nodal":
            transform = entry.get("transform", "absdiff")
            mats = [nodal_to_dyadic(read_nodal_covariate(base / f, n), transform) for f in cfiles]
        else:
            raise InputError(f"covariate {name!r} has unknown type {kind!r}")
        cov.add(name, mats)
    return NetworkSeries(networks, cov, static=static)


def load_spec(path, default_alpha: float | None = None, default_gw_form: str = "standard") -> ModelSpec:
    """Read a JSON model spec: ``{"terms": [{"kind": "GWESF", "sign": "+", "alpha": 1.5}, ...]}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot read spec {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"spec {path} is not valid JSON: {e}") from None
    return ModelSpec.from_dict(data, default_alpha=default_alpha, default_gw_form=default_gw_form)


def check_spec_against_series(spec: ModelSpec, series: NetworkSeries) -> None:
    """Name the first term whose covariate the data does not provide."""
    have = set(series.covariates.names())
    for term in spec.terms:
        if term.covariate and term.covariate not in have:
            raise InputError(f"term {term.label} references covariate {term.covariate!r}, "
                             "which the manifest does not define")
