"""Kernel backend selection.

The compiled Cython extension is used when it imports; otherwise the NumPy
fallback is used. Setting ``COMPDEN_PURE_PYTHON=1`` forces the fallback.
All public callers go through the wrappers here, which normalise inputs to
C-contiguous float64 arrays.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_impl = _pykernels
BACKEND = "python"

if os.environ.get("COMPDEN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels


def _c2(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def sq_dist_rows(codewords, y, impl=None) -> np.ndarray:
    """Squared distances from ``y`` to every row of ``codewords``."""
    return (impl or _impl).sq_dist_rows(_c2(codewords), _c2(y))


def pair_sq_dists(a, b, impl=None) -> np.ndarray:
    """Row-wise squared distances ``||a_i - b_i||^2``."""
    return (impl or _impl).pair_sq_dists(_c2(a), _c2(b))


def dot(a, b, impl=None) -> float:
    return float((impl or _impl).dot(_c2(a), _c2(b)))


def nearest_indices(codewords, queries, impl=None) -> np.ndarray:
    """0-based index of the nearest codeword for each query row (ties -> smallest)."""
    return (impl or _impl).nearest_indices(_c2(codewords), _c2(queries))


def union_q_sum(codewords, d, offset: float, sigma: float, impl=None) -> float:
    """Unnormalised double sum of pairwise Gaussian-tail terms over ordered pairs m != v."""
    return float((impl or _impl).union_q_sum(_c2(codewords), _c2(d), float(offset), float(sigma)))


def available_backends() -> dict:
    """Map of backend name to implementation module, for benchmarks and parity tests."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass
    return out
