"""Distortion-perception function, a scalar Gaussian reference, and 1-D W2."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError


@dataclass(frozen=True)
class DpParams:
    """MMSE distortion ``d_star`` and its perception index ``p_star``."""

    d_star: float
    p_star: float

    def __post_init__(self) -> None:
        for name in ("d_star", "p_star"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and non-negative, got {v!r}")


def dp_function(params: DpParams, perception: float) -> float:
    """Minimal distortion at perception level ``perception``.

    ``D(P) = d_star + max(0, p_star - P)**2``; flat at ``d_star`` once
    ``P >= p_star``.
    """
    if not perception >= 0:
        raise DomainError(f"perception must be non-negative, got {perception!r}")
    gap = max(0.0, params.p_star - perception)
    return params.d_star + gap * gap


def gaussian_mmse_reference(source_std: float, noise_std: float) -> DpParams:
    """(D*, P*) for x ~ N(0, s^2) observed through y = x + N(0, sigma^2).

    The posterior mean is ``s^2/(s^2+sigma^2) * y``, whose marginal is
    N(0, s^4/(s^2+sigma^2)); P* is the W2 distance between two centred
    Gaussians, i.e. the difference of their standard deviations.
    """
    if not (source_std > 0 and noise_std > 0) or not (math.isfinite(source_std) and math.isfinite(noise_std)):
        raise DomainError("source_std and noise_std must be positive and finite")
    s2 = source_std * source_std
    n2 = noise_std * noise_std
    d_star = s2 * n2 / (s2 + n2)
    p_star = abs(source_std - s2 / math.sqrt(s2 + n2))
    return DpParams(d_star=d_star, p_star=p_star)


def wasserstein2_1d(samples_a, samples_b) -> float:
    """Exact W2 between two equal-size 1-D empirical measures (sorted coupling)."""
    a = np.sort(np.asarray(samples_a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(samples_b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("sample sets must be non-empty")
    if a.size != b.size:
        raise DomainError(f"sample sets must have equal size, got {a.size} and {b.size}")
    diff = a - b
    return math.sqrt(float(np.mean(diff * diff)))
