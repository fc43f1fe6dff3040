"""Shared domain types and exact vector primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class FormatError(ValueError):
    """A file does not follow the expected binary layout."""


class InsufficientDataError(ValueError):
    """Not enough training samples for the requested codebook size."""


class DegenerateCodewordsError(ValueError):
    """Two codewords coincide where distinct codewords are required."""


class CoverageError(ValueError):
    """A pixel is not covered by any patch during reassembly."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


class Signal:
    """Immutable real vector (clean signal, observation or noise)."""

    __slots__ = ("_values",)

    def __init__(self, values) -> None:
        arr = _frozen(values)
        if arr.ndim != 1 or arr.size < 1:
            raise DimensionError(f"a Signal must be a non-empty 1-D vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("Signal values must be finite")
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return int(self._values.shape[0])

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signal):
            return NotImplemented
        return self._values.shape == other._values.shape and bool(np.array_equal(self._values, other._values))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Signal({self._values.tolist()!r})"


def as_vector(x) -> np.ndarray:
    """Return a read-only float64 1-D view of a Signal or array-like."""
    if isinstance(x, Signal):
        return x.values
    return Signal(x).values


class Codebook:
    """Ordered set of ``M = 2**rate_bits`` codewords of a common dimension.

    Public codeword indices are 1-based (``1..M``); ``codewords`` is the
    underlying ``(M, dim)`` array, 0-based as usual for NumPy.
    """

    __slots__ = ("_codewords", "_rate_bits")

    def __init__(self, codewords, rate_bits: int) -> None:
        arr = _frozen(codewords)
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise DimensionError(f"codewords must form an (M, dim) array, got shape {arr.shape}")
        if int(rate_bits) != rate_bits or rate_bits < 1:
            raise DomainError(f"rate_bits must be a positive integer, got {rate_bits!r}")
        rate_bits = int(rate_bits)
        if arr.shape[0] != 2**rate_bits:
            raise DomainError(f"codebook holds {arr.shape[0]} codewords but rate {rate_bits} needs {2**rate_bits}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("codewords must be finite")
        self._codewords = arr
        self._rate_bits = rate_bits

    @property
    def codewords(self) -> np.ndarray:
        return self._codewords

    @property
    def rate_bits(self) -> int:
        return self._rate_bits

    @property
    def dim(self) -> int:
        return int(self._codewords.shape[1])

    @property
    def size(self) -> int:
        return int(self._codewords.shape[0])

    def __len__(self) -> int:
        return self.size

    def codeword(self, m: int) -> Signal:
        """Codeword with 1-based index ``m``."""
        if not 1 <= m <= self.size:
            raise IndexError(f"codeword index {m} outside 1..{self.size}")
        return Signal(self._codewords[m - 1])

    def has_distinct_codewords(self) -> bool:
        return np.unique(self._codewords, axis=0).shape[0] == self.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return (
            self._rate_bits == other._rate_bits
            and self._codewords.shape == other._codewords.shape
            and self._codewords.tobytes() == other._codewords.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Codebook(M={self.size}, dim={self.dim}, rate_bits={self._rate_bits})"


@dataclass(frozen=True)
class Gaussian:
    """Additive white Gaussian noise with standard deviation ``sigma``."""

    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma!r}")


@dataclass(frozen=True)
class Poisson:
    """Poisson counts ``y_i ~ Poisson(c_i)`` on signals pre-scaled to ``peak``."""

    peak: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.peak) and self.peak > 0):
            raise DomainError(f"peak must be positive and finite, got {self.peak!r}")


NoiseSpec = Union[Gaussian, Poisson]


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    va, vb = as_vector(a), as_vector(b)
    if va.shape != vb.shape:
        raise DimensionError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    return va, vb


def l2_distance(a, b) -> float:
    """Euclidean distance with a fixed left-to-right summation order."""
    va, vb = _pair(a, b)
    return math.sqrt(float(kernels.pair_sq_dists(va[None, :], vb[None, :])[0]))


def inner_product(a, b) -> float:
    """Left-to-right sum of ``a_i * b_i``."""
    va, vb = _pair(a, b)
    return kernels.dot(va, vb)
