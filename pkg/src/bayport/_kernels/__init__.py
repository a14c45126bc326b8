"""Backend selection for the sampler hot kernels.

Two interchangeable implementations of the per-draw assembly stage:

* ``_native`` — Cython extension, compiled at install time (optional);
* ``_ref`` — vectorized pure-numpy fallback.

The choice is made once at import.  Set ``BAYPORT_KERNELS`` to ``native``
(fail if unavailable), ``python`` (force the fallback), or ``auto``
(default: native when built).  The active backend name is exposed as
``BACKEND``.  Both backends consume identical pre-drawn randomness, so
switching backends never changes which variates a seed produces.
"""

from __future__ import annotations

import os
import warnings

from . import _ref

__all__ = ["BACKEND", "available_backends", "get_backend",
           "basic_weight_draws", "fast_weight_draws"]

_choice = os.environ.get("BAYPORT_KERNELS", "auto").strip().lower()
if _choice not in ("auto", "native", "python"):
    warnings.warn(f"unrecognized BAYPORT_KERNELS={_choice!r}; using 'auto'",
                  RuntimeWarning)
    _choice = "auto"

_impl = None
if _choice in ("auto", "native"):
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "native":
            raise ImportError(
                "BAYPORT_KERNELS=native but the compiled kernels are not "
                "built; reinstall the package or use BAYPORT_KERNELS=auto"
            ) from None
if _impl is None:
    _impl = _ref

BACKEND: str = "python" if _impl is _ref else "native"
basic_weight_draws = _impl.basic_weight_draws
fast_weight_draws = _impl.fast_weight_draws


def available_backends() -> tuple[str, ...]:
    """Names of the backends importable in this environment."""
    try:
        from . import _native  # noqa: F401
    except ImportError:
        return ("python",)
    return ("native", "python")


def get_backend(name: str):
    """Explicit backend handle ``(basic_weight_draws, fast_weight_draws)``.

    Used by benchmarks and cross-backend tests; normal callers go through
    the module-level functions.
    """
    if name == "python":
        return _ref.basic_weight_draws, _ref.fast_weight_draws
    if name == "native":
        from . import _native
        return _native.basic_weight_draws, _native.fast_weight_draws
    raise ValueError(f"unknown backend {name!r}")
