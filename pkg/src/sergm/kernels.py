"""Backend selection for the Gibbs toggle kernel.

The compiled extension ``sergm._gibbs`` is used when it was built; otherwise
the pure-Python ``sergm._fallback`` takes over. Set ``SERGM_BACKEND=python``
to force the fallback.
"""

import os

from . import _fallback

try:
    from . import _gibbs as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["cython"] = _compiled


def default_backend() -> str:
    forced = os.environ.get("SERGM_BACKEND")
    if forced:
        if forced not in BACKENDS:
            raise RuntimeError(f"SERGM_BACKEND={forced!r} is not available; have {sorted(BACKENDS)}")
        return forced
    return "cython" if _compiled is not None else "python"


BACKEND = default_backend()


def get_kernel(name: str | None = None):
    name = name or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise RuntimeError(f"backend {name!r} is not available; have {sorted(BACKENDS)}") from None
