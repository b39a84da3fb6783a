"""Run configuration read from JSON, with defaults for a small static network.

Every field is optional in the file. Example::

    {
      "seed": 7,
      "alpha": 1.5,
      "gamma_grid": 2000,
      "j_bridges": 16,
      "estimation": {"burn_in": 10000, "interval": 1000, "m": 1000, "start_empty": false},
      "variance": {"m": 3000},
      "bridge": {"interval": 2000, "start_empty": true}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import InputError
from .estimation import EstimationSettings
from .sampler import SamplerSettings
from .selection import BRIDGE_METHODS, BridgeSettings
from .statistics import GW_FORMS

PHASE_NAMES = ("estimation", "variance", "bridge", "gof", "simulate")


@dataclass(frozen=True)
class PhaseConfig:
    burn_in: int
    interval: int
    m: int
    start_empty: bool = False

    def __post_init__(self):
        for name in ("burn_in", "interval", "m"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < (0 if name == "burn_in" else 1):
                raise InputError(f"{name} must be a {'non-negative' if name == 'burn_in' else 'positive'} integer, got {v!r}")

    def sampler(self, seed: int) -> SamplerSettings:
        return SamplerSettings(self.burn_in, self.interval, self.m,
                               "empty" if self.start_empty else "observed", seed)


def _default_phases() -> dict[str, PhaseConfig]:
    return {
        "estimation": PhaseConfig(10_000, 1_000, 1_000, False),
        "variance": PhaseConfig(10_000, 1_000, 3_000, False),
        "bridge": PhaseConfig(10_000, 2_000, 1_000, True),
        "gof": PhaseConfig(10_000, 1_000, 1_000, False),
        "simulate": PhaseConfig(10_000, 1_000, 100, False),
    }


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    alpha: float = 1.5
    gw_form: str = "standard"
    gamma_grid: int = 2000
    j_bridges: int = 16
    bridge_method: str = "trapezoid"
    max_outer_iters: int = 60
    stabilize_tol: float = 1e-3
    level: float = 0.95
    n_jobs: int = 1
    phases: dict = field(default_factory=_default_phases)

    def __post_init__(self):
        if self.gw_form not in GW_FORMS:
            raise InputError(f"gw_form must be one of {GW_FORMS}")
        if self.bridge_method not in BRIDGE_METHODS:
            raise InputError(f"bridge_method must be one of {BRIDGE_METHODS}")
        if not self.alpha > 0:
            raise InputError("alpha must be > 0")
        if self.gamma_grid < 10:
            raise InputError("gamma_grid must be >= 10")
        if self.j_bridges < 2:
            raise InputError("j_bridges must be >= 2")
        if not 0 < self.level < 1:
            raise InputError("level must lie in (0, 1)")
        if self.max_outer_iters < 1 or self.n_jobs < 1:
            raise InputError("max_outer_iters and n_jobs must be positive")

    def sampler(self, phase: str) -> SamplerSettings:
        return self.phases[phase].sampler(self.seed)

    def estimation_settings(self) -> EstimationSettings:
        return EstimationSettings(
            gamma_grid=self.gamma_grid,
            max_outer_iters=self.max_outer_iters,
            stabilize_tol=self.stabilize_tol,
            estimation=self.sampler("estimation"),
            variance=self.sampler("variance"),
            bridge=self.sampler("bridge"),
            seed=self.seed,
            n_jobs=self.n_jobs,
        )

    def bridge_settings(self) -> BridgeSettings:
        return BridgeSettings(self.j_bridges, self.sampler("bridge"), self.bridge_method,
                              n_jobs=self.n_jobs)

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "phases"}
        for name, ph in self.phases.items():
            out[name] = {"burn_in": ph.burn_in, "interval": ph.interval, "m": ph.m,
                         "start_empty": ph.start_empty}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object")
        scalar = {f.name for f in fields(cls)} - {"phases"}
        unknown = set(data) - scalar - set(PHASE_NAMES)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kw = {k: data[k] for k in scalar if k in data}
        phases = _default_phases()
        for name in PHASE_NAMES:
            if name in data:
                entry = data[name]
                bad = set(entry) - {"burn_in", "interval", "m", "start_empty"}
                if bad:
                    raise InputError(f"unknown keys in {name}: {', '.join(sorted(bad))}")
                base = phases[name]
                phases[name] = PhaseConfig(
                    entry.get("burn_in", base.burn_in), entry.get("interval", base.interval),
                    entry.get("m", base.m), bool(entry.get("start_empty", base.start_empty)))
        try:
            return cls(phases=phases, **kw)
        except TypeError as e:
            raise InputError(f"bad config value: {e}") from None


def load_config(path=None, **overrides) -> RunConfig:
    """Config from an optional JSON file; ``None`` overrides are ignored."""
    data = {}
    if path is not None:
        p = Path(path)
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except OSError as e:
            raise InputError(f"cannot read config {p}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise InputError(f"config {p} is not valid JSON: {e}") from None
    cfg = RunConfig.from_dict(data)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return cfg.with_(**overrides) if overrides else cfg
