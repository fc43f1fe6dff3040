"""Seeded Monte Carlo harness for the denoiser's error bounds.

Every trial draws its randomness from seeds derived from ``(master_seed,
trial_index)`` alone, trials are processed in fixed-size blocks, and
per-trial results land in pre-allocated arrays that are reduced in index
order. Reports are therefore byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from . import kernels
from .bounds import guarantee_probability, noise_radius
from .codec import as_sample_matrix
from .core import Codebook, DimensionError, DomainError, Signal, as_vector

RNG_NAME = "numpy-PCG64/splitmix64-v1"
BLOCK_SIZE = 1024
PART1_SLACK = 1e-9
CSV_HEADER = ("trial", "err_norm", "dist_norm", "upper", "violated", "decode_error")

_MASK64 = 0xFFFFFFFFFFFFFFFF
_STREAM_SOURCE = 1
_STREAM_NOISE = 2


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int, stream: int = 0) -> int:
    """64-bit seed for ``index`` within ``stream``, a pure function of its arguments."""
    base = splitmix64((int(master_seed) & _MASK64) ^ splitmix64(stream))
    return splitmix64((base + int(index)) & _MASK64)


def _standard_noise(seed: int, dim: int) -> np.ndarray:
    return np.random.Generator(np.random.PCG64(seed)).standard_normal(dim)


def sample_awgn(x, sigma: float, seed: int) -> Signal:
    """``x + n`` with ``n ~ N(0, sigma^2 I)`` drawn from PCG64 seeded with ``seed``."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    v = as_vector(x)
    y = v + sigma * _standard_noise(int(seed) & _MASK64, v.shape[0])
    if not np.all(np.isfinite(y)):
        raise DomainError("noisy observation is not finite")
    return Signal(y)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise DomainError(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence!r}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    n = float(trials)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    low = 0.0 if successes == 0 else min(p, max(0.0, center - half))
    high = 1.0 if successes == trials else max(p, min(1.0, center + half))
    return low, high


def _row_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    acc = np.zeros(a.shape[0])
    for j in range(a.shape[1]):
        acc += a[:, j] * b[:, j]
    return acc


def _blocks(n_trials: int) -> list[tuple[int, int]]:
    return [(s, min(s + BLOCK_SIZE, n_trials)) for s in range(0, n_trials, BLOCK_SIZE)]


def _run_blocks(fn, n_trials: int, threads: int) -> list:
    blocks = _blocks(n_trials)
    if threads <= 1 or len(blocks) == 1:
        return [fn(a, b) for a, b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: fn(*ab), blocks))


@dataclass
class TrialConfig:
    codebook: Codebook
    sigma: float
    eta: float
    n_trials: int
    master_seed: int
    source: str = "codewords"
    samples: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")
        if not 0.0 < self.eta < 1.0:
            raise DomainError(f"eta must lie in (0, 1), got {self.eta!r}")
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise DomainError(f"n_trials must be a positive integer, got {self.n_trials!r}")
        if self.source not in ("codewords", "samples"):
            raise DomainError(f"source must be 'codewords' or 'samples', got {self.source!r}")
        if self.source == "samples":
            if self.samples is None:
                raise DomainError("source 'samples' needs a sample pool")
            self.samples = as_sample_matrix(self.samples)
            if self.samples.shape[0] == 0 or self.samples.shape[1] != self.codebook.dim:
                raise DimensionError("sample pool must be non-empty and match the codebook dimension")

    def pool(self) -> np.ndarray:
        return self.codebook.codewords if self.source == "codewords" else self.samples


@dataclass
class TrialReport:
    """Per-trial records and aggregates of :func:`run_denoise_trials`.

    ``source_index`` is the 0-based row of the drawn clean signal in its
    pool (codebook or sample pool).
    """

    config: dict
    source_index: np.ndarray
    err_norm: np.ndarray
    dist_norm: np.ndarray
    upper: np.ndarray
    violated: np.ndarray
    decode_error: np.ndarray
    part1_holds: np.ndarray
    aggregates: dict = field(default_factory=dict)

    @property
    def n_trials(self) -> int:
        return int(self.err_norm.shape[0])

    @property
    def violation_rate(self) -> float:
        return self.aggregates["violation_rate"]

    @property
    def empirical_pe(self) -> float:
        return self.aggregates["empirical_pe"]

    def to_dict(self, per_trial: bool = False) -> dict:
        out = {"config": dict(self.config), "aggregates": dict(self.aggregates)}
        if per_trial:
            out["trials"] = [
                {
                    "trial": i,
                    "source_index": int(self.source_index[i]),
                    "err_norm": float(self.err_norm[i]),
                    "dist_norm": float(self.dist_norm[i]),
                    "upper": float(self.upper[i]),
                    "violated": bool(self.violated[i]),
                    "decode_error": bool(self.decode_error[i]),
                }
                for i in range(self.n_trials)
            ]
        return out

    def to_json(self, per_trial: bool = False) -> str:
        return json.dumps(self.to_dict(per_trial), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i in range(self.n_trials):
            w.writerow(
                (
                    i,
                    repr(float(self.err_norm[i])),
                    repr(float(self.dist_norm[i])),
                    repr(float(self.upper[i])),
                    int(self.violated[i]),
                    int(self.decode_error[i]),
                )
            )
        return buf.getvalue()


def run_denoise_trials(config: TrialConfig, threads: int = 1) -> TrialReport:
    """Denoise noisy draws and check the per-instance error envelope on each trial.

    A trial violates the envelope when ``||x - x_hat||`` exceeds the trial's
    own ``||x - x_tilde||`` plus the noise radius. Each trial also records
    whether the decoded index differs from the clean signal's codeword and
    whether ``||e||^2 <= ||d||^2 + 2|<n,e>| + 2|<n,d>|`` holds (up to a
    relative slack of ``PART1_SLACK``).
    """
    cb = config.codebook
    c = cb.codewords
    pool = config.pool()
    sigma = float(config.sigma)
    radius = noise_radius(sigma, cb.rate_bits, config.eta)
    n_pool = pool.shape[0]
    seed = int(config.master_seed)

    def block(start: int, stop: int):
        count = stop - start
        src = np.empty(count, dtype=np.int64)
        noise = np.empty((count, cb.dim))
        for k, i in enumerate(range(start, stop)):
            # modulo bias is below 2**-40 for any realistic pool
            src[k] = derive_seed(seed, i, _STREAM_SOURCE) % n_pool
            noise[k] = sigma * _standard_noise(derive_seed(seed, i, _STREAM_NOISE), cb.dim)
        x = np.ascontiguousarray(pool[src])
        y = x + noise
        m_hat = kernels.nearest_indices(c, y)
        m_tilde = kernels.nearest_indices(c, x)
        e = c[m_hat] - x
        d = c[m_tilde] - x
        err_sq = kernels.pair_sq_dists(c[m_hat], x)
        dist_sq = kernels.pair_sq_dists(c[m_tilde], x)
        rhs = dist_sq + 2.0 * np.abs(_row_dot(noise, e)) + 2.0 * np.abs(_row_dot(noise, d))
        part1 = err_sq <= rhs + PART1_SLACK * np.maximum(1.0, rhs)
        return src, err_sq, dist_sq, m_hat != m_tilde, part1

    parts = _run_blocks(block, config.n_trials, threads)
    src = np.concatenate([p[0] for p in parts])
    err_sq = np.concatenate([p[1] for p in parts])
    dist_sq = np.concatenate([p[2] for p in parts])
    decode_error = np.concatenate([p[3] for p in parts])
    part1 = np.concatenate([p[4] for p in parts])

    err_norm = np.sqrt(err_sq)
    dist_norm = np.sqrt(dist_sq)
    upper = dist_norm + radius
    violated = err_norm > upper

    n = config.n_trials
    n_viol = int(np.count_nonzero(violated))
    n_err = int(np.count_nonzero(decode_error))
    pe_low, pe_high = wilson_interval(n_err, n)
    v_low, v_high = wilson_interval(n_viol, n)
    aggregates = {
        "n_trials": n,
        "mean_err_sq": float(np.mean(err_sq)),
        "violations": n_viol,
        "violation_rate": n_viol / n,
        "violation_wilson_low": v_low,
        "violation_wilson_high": v_high,
        "guarantee_prob": guarantee_probability(cb.rate_bits, config.eta),
        "decode_errors": n_err,
        "empirical_pe": n_err / n,
        "wilson_low": pe_low,
        "wilson_high": pe_high,
        "lower_bound_failures": int(np.count_nonzero(err_norm < dist_norm)),
        "part1_failures": int(np.count_nonzero(~part1)),
        "noise_radius": radius,
    }
    cfg = {
        "rate_bits": cb.rate_bits,
        "dim": cb.dim,
        "sigma": sigma,
        "eta": float(config.eta),
        "n_trials": n,
        "master_seed": seed,
        "source": config.source,
        "rng": RNG_NAME,
    }
    return TrialReport(
        config=cfg,
        source_index=src,
        err_norm=err_norm,
        dist_norm=dist_norm,
        upper=upper,
        violated=violated,
        decode_error=decode_error,
        part1_holds=part1,
        aggregates=aggregates,
    )


def distortion_vector(dim: int, dP: float, d_direction=None) -> np.ndarray:
    """``sqrt(dP) * unit(d_direction)``, or zeros when ``dP == 0``."""
    if not dP >= 0:
        raise DomainError(f"D(P) must be non-negative, got {dP!r}")
    if dP == 0:
        return np.zeros(dim)
    if d_direction is None:
        raise DomainError("a non-zero direction is required when D(P) > 0")
    u = np.array(as_vector(d_direction))
    if u.shape[0] != dim:
        raise DimensionError(f"direction has dimension {u.shape[0]}, expected {dim}")
    norm = math.sqrt(kernels.dot(u, u))
    if norm == 0.0:
        raise DomainError("direction must be non-zero when D(P) > 0")
    return math.sqrt(dP) * (u / norm)


def empirical_pe(
    codebook: Codebook,
    d_direction,
    dP: float,
    sigma: float,
    n_trials: int,
    master_seed: int,
    threads: int = 1,
    confidence: float = 0.95,
) -> tuple[float, float, float]:
    """Monte Carlo codeword-identification error rate with a Wilson interval.

    Each trial draws ``c_m`` uniformly, sets ``x = c_m - d`` and counts an
    error when the nearest codeword to ``y = x + n`` is not ``c_m``.
    """
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if int(n_trials) != n_trials or n_trials < 1:
        raise DomainError(f"n_trials must be a positive integer, got {n_trials!r}")
    c = codebook.codewords
    d = distortion_vector(codebook.dim, dP, d_direction)
    m_count = codebook.size
    seed = int(master_seed)
    sigma = float(sigma)

    def block(start: int, stop: int) -> int:
        count = stop - start
        m = np.empty(count, dtype=np.int64)
        noise = np.empty((count, codebook.dim))
        for k, i in enumerate(range(start, stop)):
            m[k] = derive_seed(seed, i, _STREAM_SOURCE) % m_count
            noise[k] = sigma * _standard_noise(derive_seed(seed, i, _STREAM_NOISE), codebook.dim)
        y = (c[m] - d) + noise
        return int(np.count_nonzero(kernels.nearest_indices(c, y) != m))

    errors = sum(_run_blocks(block, int(n_trials), threads))
    low, high = wilson_interval(errors, int(n_trials), confidence)
    return errors / n_trials, low, high
