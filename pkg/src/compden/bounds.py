"""Closed-form reconstruction-error envelope and decoding-error union bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Codebook, DegenerateCodewordsError, DimensionError, DomainError, as_vector

_SQRT2 = 1.4142135623730951
_LN2 = math.log(2.0)


def q_function(t: float) -> float:
    """Standard Gaussian tail ``P(Z > t)`` via ``erfc(t / sqrt 2) / 2``."""
    t = float(t)
    if math.isnan(t):
        raise DomainError("Q is undefined for NaN")
    return 0.5 * math.erfc(t / _SQRT2)


@dataclass(frozen=True)
class BoundEnvelope:
    lower: float
    upper: float
    guarantee_prob: float
    eta: float
    rate_bits: int
    sigma: float

    @property
    def vacuous(self) -> bool:
        return self.guarantee_prob == 0.0


def noise_radius(sigma: float, rate_bits: int, eta: float) -> float:
    """Additive term ``2 sigma sqrt(2 ln2 R) (1 + 2 sqrt(eta))`` of the upper envelope."""
    return 2.0 * sigma * math.sqrt(2.0 * _LN2 * rate_bits) * (1.0 + 2.0 * math.sqrt(eta))


def guarantee_probability(rate_bits: int, eta: float) -> float:
    return max(0.0, 1.0 - 2.0 ** (-eta * rate_bits + 2.0))


def _check_eta(eta: float) -> None:
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta!r}")


def theorem2_envelope(dP: float, sigma: float, rate_bits: int, eta: float) -> BoundEnvelope:
    """Envelope ``sqrt(D) <= ||x - x_hat|| <= sqrt(D) + noise_radius`` and its probability.

    ``guarantee_prob`` is clamped at 0 when ``eta * rate_bits <= 2``.
    """
    _check_eta(eta)
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if int(rate_bits) != rate_bits or rate_bits < 1:
        raise DomainError(f"rate_bits must be a positive integer, got {rate_bits!r}")
    if not dP >= 0:
        raise DomainError(f"D(P) must be non-negative, got {dP!r}")
    lower = math.sqrt(dP)
    return BoundEnvelope(
        lower=lower,
        upper=lower + noise_radius(sigma, int(rate_bits), eta),
        guarantee_prob=guarantee_probability(int(rate_bits), eta),
        eta=float(eta),
        rate_bits=int(rate_bits),
        sigma=float(sigma),
    )


def pairwise_error_prob(c_m, c_v, d, sigma: float) -> float:
    """Probability that ``c_v`` beats the correct codeword ``c_m`` when ``x = c_m - d``."""
    vm, vv, vd = as_vector(c_m), as_vector(c_v), as_vector(d)
    if not (vm.shape == vv.shape == vd.shape):
        raise DimensionError("c_m, c_v and d must share one dimension")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    diff = vv - vm
    sq = kernels.dot(diff, diff)
    if sq == 0.0:
        raise DegenerateCodewordsError("c_m and c_v coincide")
    dist = math.sqrt(sq)
    return q_function((dist / 2.0 + kernels.dot(vd, diff) / dist) / sigma)


def _check_codebook(codebook: Codebook, sigma: float) -> None:
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if not codebook.has_distinct_codewords():
        raise DegenerateCodewordsError("codebook contains duplicate codewords")


def union_bound_pe(codebook: Codebook, d, sigma: float) -> float:
    """Union bound on the ML decoding error probability, clamped to 1."""
    vd = as_vector(d)
    if vd.shape[0] != codebook.dim:
        raise DimensionError(f"d has dimension {vd.shape[0]}, codebook has {codebook.dim}")
    _check_codebook(codebook, sigma)
    total = kernels.union_q_sum(codebook.codewords, vd, 0.0, sigma)
    return min(1.0, total / codebook.size)


def worst_case_union_bound(codebook: Codebook, dP: float, sigma: float) -> float:
    """Union bound with every projection of ``d`` replaced by ``-sqrt(dP)``, clamped to 1."""
    if not dP >= 0:
        raise DomainError(f"D(P) must be non-negative, got {dP!r}")
    _check_codebook(codebook, sigma)
    zero = np.zeros(codebook.dim)
    total = kernels.union_q_sum(codebook.codewords, zero, -math.sqrt(dP), sigma)
    return min(1.0, total / codebook.size)
