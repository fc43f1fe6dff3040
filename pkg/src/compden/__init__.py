"""Compression-based ML denoising over explicit codebooks.

The package exposes codebook construction (:mod:`compden.codec`), the
likelihood and nearest-codeword denoisers (:mod:`compden.denoise`), the
closed-form error bounds (:mod:`compden.bounds`), the seeded Monte Carlo
harness (:mod:`compden.sim`), the distortion-perception helpers
(:mod:`compden.rdp`) and a small grayscale image pipeline
(:mod:`compden.imagelab`).
"""

from .core import (
    Codebook,
    CoverageError,
    DegenerateCodewordsError,
    DimensionError,
    DomainError,
    FormatError,
    Gaussian,
    InsufficientDataError,
    Poisson,
    Signal,
    inner_product,
    l2_distance,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Codebook",
    "CoverageError",
    "DegenerateCodewordsError",
    "DimensionError",
    "DomainError",
    "FormatError",
    "Gaussian",
    "InsufficientDataError",
    "Poisson",
    "Signal",
    "inner_product",
    "l2_distance",
]
