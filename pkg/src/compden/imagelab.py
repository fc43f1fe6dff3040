"""Grayscale image pipeline: PGM I/O, patches, codebook denoising, PSNR."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Codebook, CoverageError, DimensionError, DomainError, FormatError


@dataclass(frozen=True)
class GrayImage:
    """Row-major grayscale image with pixel values in ``[0, 1]``."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.array(self.pixels, dtype=np.float64, copy=True)
        if self.width < 1 or self.height < 1:
            raise DomainError("image dimensions must be positive")
        if px.size != self.width * self.height:
            raise DimensionError(f"{px.size} pixels do not fill a {self.width}x{self.height} image")
        px = px.reshape(self.height, self.width)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got shape {a.shape}")
        return cls(width=a.shape[1], height=a.shape[0], pixels=a)

    def clamped(self) -> "GrayImage":
        return GrayImage(self.width, self.height, np.clip(self.pixels, 0.0, 1.0))


def _read_header_tokens(data: bytes) -> tuple[list[bytes], int]:
    # magic, width, height, maxval separated by whitespace and optional comments,
    # followed by exactly one whitespace byte before the raster
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < 4:
        while pos < n and (data[pos:pos + 1].isspace() or data[pos:pos + 1] == b"#"):
            if data[pos:pos + 1] == b"#":
                end = data.find(b"\n", pos)
                pos = n if end < 0 else end + 1
            else:
                pos += 1
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise FormatError("PGM header not terminated by whitespace")
    return tokens, pos + 1


def read_pgm(path: str | os.PathLike) -> GrayImage:
    """Read an 8-bit binary (P5) PGM; value ``v`` maps to ``v / 255``."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise FormatError(f"unsupported PGM variant {data[:2]!r}; only binary P5 is read")
    tokens, offset = _read_header_tokens(data)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError("non-numeric PGM header field") from exc
    if width < 1 or height < 1:
        raise FormatError("PGM dimensions must be positive")
    if maxval != 255:
        raise FormatError(f"only maxval 255 is supported, got {maxval}")
    raster = data[offset:offset + width * height]
    if len(raster) != width * height:
        raise FormatError(f"truncated PGM raster: {len(raster)} of {width * height} bytes")
    px = np.frombuffer(raster, dtype=np.uint8).astype(np.float64) / 255.0
    return GrayImage(width, height, px)


def to_bytes8(image: GrayImage) -> np.ndarray:
    """Quantise to 8 bits with round-half-up and clamping."""
    return np.clip(np.floor(image.pixels * 255.0 + 0.5), 0, 255).astype(np.uint8)


def write_pgm(image: GrayImage, path: str | os.PathLike) -> None:
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + to_bytes8(image).tobytes())


def _axis_offsets(length: int, k: int, stride: int) -> list[int]:
    offs = list(range(0, length - k + 1, stride))
    if offs[-1] != length - k:
        offs.append(length - k)
    return offs


def patch_offsets(width: int, height: int, k: int, stride: int) -> list[tuple[int, int]]:
    """Top-left ``(row, col)`` offsets of every patch, last offset clamped to the border."""
    if k < 1 or stride < 1:
        raise DomainError("patch side and stride must be positive")
    if k > min(width, height):
        raise DomainError(f"patch side {k} exceeds image size {width}x{height}")
    rows = _axis_offsets(height, k, stride)
    cols = _axis_offsets(width, k, stride)
    return [(r, c) for r in rows for c in cols]


def extract_patches(image: GrayImage, k: int, stride: int) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """All ``k x k`` patches flattened row-major, with their offsets."""
    offsets = patch_offsets(image.width, image.height, k, stride)
    px = image.pixels
    patches = np.empty((len(offsets), k * k))
    for i, (r, c) in enumerate(offsets):
        patches[i] = px[r:r + k, c:c + k].ravel()
    return patches, offsets


def reassemble_average(patches, offsets, width: int, height: int, k: int) -> GrayImage:
    """Average overlapping patches back into an image, clamped to ``[0, 1]``."""
    p = np.asarray(patches, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != k * k or p.shape[0] != len(offsets):
        raise DimensionError("patches must have shape (len(offsets), k*k)")
    # running mean rather than sum/count: equal contributions reproduce the value exactly
    mean = np.zeros((height, width))
    cnt = np.zeros((height, width))
    for patch, (r, c) in zip(p, offsets):
        win = (slice(r, r + k), slice(c, c + k))
        cnt[win] += 1.0
        mean[win] += (patch.reshape(k, k) - mean[win]) / cnt[win]
    if np.any(cnt == 0):
        raise CoverageError(f"{int(np.count_nonzero(cnt == 0))} pixels are not covered by any patch")
    return GrayImage(width, height, np.clip(mean, 0.0, 1.0))


def patch_denoise(noisy: GrayImage, codebook: Codebook, k: int, stride: int, threads: int = 1) -> GrayImage:
    """Replace every patch by its nearest codeword and average the overlaps."""
    if codebook.dim != k * k:
        raise DimensionError(f"codebook dimension {codebook.dim} does not match patch size {k}x{k}")
    patches, offsets = extract_patches(noisy, k, stride)
    c = codebook.codewords
    if threads <= 1:
        idx = kernels.nearest_indices(c, patches)
    else:
        chunks = np.array_split(np.arange(patches.shape[0]), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ix: kernels.nearest_indices(c, patches[ix]), chunks))
        idx = np.concatenate(parts)
    return reassemble_average(c[idx], offsets, noisy.width, noisy.height, k)


def psnr(a: GrayImage, b: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB on the ``[0, 1]`` scale; ``inf`` for identical images."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionError("images must have the same dimensions")
    diff = a.pixels - b.pixels
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def add_awgn(image: GrayImage, sigma: float, seed: int, clip: bool = True) -> GrayImage:
    """Noisy copy of ``image`` with i.i.d. N(0, sigma^2) per pixel."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    rng = np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    px = image.pixels + sigma * rng.standard_normal(image.pixels.shape)
    if clip:
        px = np.clip(px, 0.0, 1.0)
    return GrayImage(image.width, image.height, px)


def synthetic_piecewise_constant(size: int = 64, n_rects: int = 12, seed: int = 0) -> GrayImage:
    """Random axis-aligned rectangles of constant gray on a constant background."""
    rng = np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    levels = np.linspace(0.1, 0.9, 9)
    img = np.full((size, size), levels[rng.integers(len(levels))])
    for _ in range(n_rects):
        r0, r1 = np.sort(rng.integers(0, size + 1, size=2))
        c0, c1 = np.sort(rng.integers(0, size + 1, size=2))
        img[r0:r1, c0:c1] = levels[rng.integers(len(levels))]
    return GrayImage.from_array(img)
