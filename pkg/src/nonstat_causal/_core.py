"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy fallback is used. Setting ``NONSTAT_CAUSAL_PURE=1`` forces the
fallback (handy for benchmarks and for checking that both agree).
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("NONSTAT_CAUSAL_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py

tv_apply = _impl.tv_apply
tv_compose = _impl.tv_compose
tv_invert = _impl.tv_invert
tv_backward = _impl.tv_backward
companion_norms = _impl.companion_norms

__all__ = [
    "BACKEND",
    "tv_apply",
    "tv_compose",
    "tv_invert",
    "tv_backward",
    "companion_norms",
]
