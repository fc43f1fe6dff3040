"""Exit criteria for the package, one test per criterion.

Each test prints a PASS/FAIL line (collected again in the terminal summary)
and then asserts, so a failing criterion is both visible and red.
"""

import math
import time

import numpy as np
import pytest

from compden import Codebook, Gaussian
from compden.bounds import q_function, union_bound_pe, worst_case_union_bound
from compden.cli import main
from compden.codec import build_random_codebook, codebook_distortion, lloyd_codebook, save_codebook
from compden.denoise import ml_denoise, nn_denoise
from compden.imagelab import (
    add_awgn,
    extract_patches,
    patch_denoise,
    psnr,
    read_pgm,
    reassemble_average,
    synthetic_piecewise_constant,
    write_pgm,
)
from compden.rdp import DpParams, dp_function, gaussian_mmse_reference, wasserstein2_1d
from compden.sim import TrialConfig, derive_seed, empirical_pe, run_denoise_trials, sample_awgn

Q1 = 0.15865525393145705  # mpmath quadrature, see test_bounds


def test_c1_gaussian_ml_nn_equivalence(acceptance_line):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    agree = 0
    n_cases = 10**4
    for _ in range(n_cases):
        r = int(rng.integers(1, 7))  # M = 2..64
        n = int(rng.integers(1, 33))
        sigma = float(rng.choice([0.1, 1.0, 10.0]))
        cb = Codebook(rng.standard_normal((2**r, n)), r)
        y = cb.codewords[rng.integers(2**r)] + sigma * rng.standard_normal(n)
        agree += ml_denoise(cb, y, Gaussian(sigma))[0] == nn_denoise(cb, y)[0]
    elapsed = time.perf_counter() - t0
    ok = agree == n_cases and elapsed < 5.0
    acceptance_line("C1 ML/NN equivalence", ok, f"{agree}/{n_cases} identical, {elapsed:.2f}s (< 5s)")
    assert ok


def test_c2_theorem2_envelope(acceptance_line):
    rng = np.random.default_rng(202)
    cb = Codebook(rng.standard_normal((256, 16)), 8)
    t0 = time.perf_counter()
    rep = run_denoise_trials(TrialConfig(cb, 1.0, 0.5, 10**4, 2))
    elapsed = time.perf_counter() - t0
    agg = rep.aggregates
    half = (agg["violation_wilson_high"] - agg["violation_wilson_low"]) / 2
    limit = 2.0**-2 + 3 * half
    # literal lower bound: err_norm >= min_m ||x - c_m||, recomputed independently
    min_dist = np.array([np.min(np.linalg.norm(cb.codewords - cb.codewords[i], axis=1)) for i in rep.source_index])
    lower_ok = bool(np.all(rep.err_norm >= min_dist)) and agg["lower_bound_failures"] == 0
    ok = rep.violation_rate <= limit and lower_ok and elapsed < 10.0
    acceptance_line(
        "C2 envelope",
        ok,
        f"violation rate {rep.violation_rate:.4f} <= {limit:.4f}; lower bound on 100%: {lower_ok}; {elapsed:.2f}s (< 10s)",
    )
    assert ok


def test_c3_part1_inequality(acceptance_line):
    rng = np.random.default_rng(303)
    grid = [(s, r) for s in (0.1, 0.5, 1.0, 2.0) for r in (2, 4, 6, 8)]
    per_cell = 10**5 // len(grid)
    dim = 16
    t0 = time.perf_counter()
    failures = total = harness_failures = 0
    for cell, (sigma, r) in enumerate(grid):
        cb = Codebook(rng.standard_normal((2**r, dim)), r)
        pool = rng.standard_normal((512, dim))
        cfg = TrialConfig(cb, sigma, 0.5, per_cell, 1000 + cell, "samples", pool)
        rep = run_denoise_trials(cfg)
        harness_failures += rep.aggregates["part1_failures"]
        # independent re-derivation: public AWGN sampler plus a brute-force argmin search
        src = np.array([derive_seed(1000 + cell, i, 1) % pool.shape[0] for i in range(per_cell)])
        x = pool[src]
        y = np.stack([sample_awgn(x[i], sigma, derive_seed(1000 + cell, i, 2)).values for i in range(per_cell)])
        c = cb.codewords
        x_hat = c[np.argmin(((y[:, None, :] - c[None, :, :]) ** 2).sum(axis=2), axis=1)]
        x_tilde = c[np.argmin(((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2), axis=1)]
        noise = y - x
        e, d = x_hat - x, x_tilde - x
        lhs = np.einsum("ij,ij->i", e, e)
        rhs = np.einsum("ij,ij->i", d, d) + 2 * np.abs(np.einsum("ij,ij->i", noise, e)) + 2 * np.abs(np.einsum("ij,ij->i", noise, d))
        failures += int(np.count_nonzero(~(lhs <= rhs + 1e-9)))
        total += per_cell
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and harness_failures == 0 and total == 10**5 and elapsed < 30.0
    acceptance_line(
        "C3 intermediate inequality",
        ok,
        f"{total - failures}/{total} trials hold (harness failures {harness_failures}), {elapsed:.2f}s (< 30s)",
    )
    assert ok


def test_c4_two_codeword_pe(acceptance_line):
    cb = Codebook([[0.0, 0.0], [2.0, 0.0]], 1)
    n = 10**5
    t0 = time.perf_counter()
    est, low, high = empirical_pe(cb, None, 0.0, 1.0, n, 4)
    elapsed = time.perf_counter() - t0
    se = math.sqrt(Q1 * (1 - Q1) / n)
    ok = abs(est - Q1) <= 3 * se and abs(q_function(1.0) - Q1) <= 1e-12 and elapsed < 5.0
    acceptance_line("C4 two-codeword P_e", ok, f"estimate {est:.5f} vs Q(1) {Q1:.6f} (3 SE = {3 * se:.5f}), {elapsed:.2f}s (< 5s)")
    assert ok


def test_c5_union_bound_dominance(acceptance_line):
    rng = np.random.default_rng(505)
    dim = 4
    cells = []
    for m_bits in (1, 2, 4):
        cb = Codebook(rng.standard_normal((2**m_bits, dim)), m_bits)
        for sigma in (0.25, 0.5, 1.0):
            est, low, high = empirical_pe(cb, None, 0.0, sigma, 10**4, 50 + m_bits)
            ub = union_bound_pe(cb, np.zeros(dim), sigma)
            cells.append(est - (high - est) <= ub)
    dom_ok = all(cells)

    cb = Codebook(rng.standard_normal((16, dim)), 4)
    dp = 0.09
    worst = worst_case_union_bound(cb, dp, 0.5)
    gaps = []
    for _ in range(100):
        u = rng.standard_normal(dim)
        d = math.sqrt(dp) * u / np.linalg.norm(u)
        gaps.append(worst - union_bound_pe(cb, d, 0.5))
    worst_ok = min(gaps) >= -1e-12
    ok = dom_ok and worst_ok
    acceptance_line(
        "C5 union-bound dominance",
        ok,
        f"{sum(cells)}/9 grid cells dominated; worst-case >= union on 100 directions (min gap {min(gaps):.3e})",
    )
    assert ok


def test_c6_dp_function(acceptance_line):
    params = DpParams(0.3, 0.8)
    grid = np.linspace(0.0, 2.0, 1000)
    values = [dp_function(params, p) for p in grid]
    mono = all(b <= a for a, b in zip(values, values[1:]))
    flat = all(v == params.d_star for p, v in zip(grid, values) if p >= params.p_star)

    ref = gaussian_mmse_reference(1.0, 1.0)
    analytic = abs(ref.d_star - 0.5) <= 1e-12 and abs(ref.p_star - (1 - 1 / math.sqrt(2))) <= 1e-12

    rng = np.random.default_rng(606)
    n = 10**5
    x = rng.standard_normal(n)
    y = x + rng.standard_normal(n)
    est = 0.5 * y  # posterior mean for s = sigma = 1
    err = (x - est) ** 2
    se = err.std(ddof=1) / math.sqrt(n)
    mc_d = abs(err.mean() - ref.d_star) <= 3 * se
    w2 = wasserstein2_1d(x, est)
    mc_p = abs(w2 - ref.p_star) <= 0.01
    ok = mono and flat and analytic and mc_d and mc_p
    acceptance_line(
        "C6 DP function",
        ok,
        f"monotone {mono}, flat {flat}, analytic {analytic}, MC D* {err.mean():.4f} (3 SE {3 * se:.4f}), MC P* {w2:.4f} vs {ref.p_star:.4f}",
    )
    assert ok


def test_c7_lloyd(acceptance_line):
    rng = np.random.default_rng(707)
    centers = np.array([[0.0, 0.0], [10.0, 10.0]])
    x2 = centers[np.repeat([0, 1], 100)] + 0.1 * rng.standard_normal((200, 2))
    cb, hist = lloyd_codebook(x2, 1, 100, 1e-9, seed=1)
    got = cb.codewords[np.argsort(cb.codewords[:, 0])]
    centers_ok = bool(np.all(np.linalg.norm(got - centers, axis=1) < 0.1))

    x = rng.standard_normal((400, 3))
    mono_all = all(b <= a for a, b in zip(hist, hist[1:]))
    not_worse = 0
    for seed in range(100):
        cb, hist = lloyd_codebook(x, 3, 50, 1e-7, seed)
        mono_all &= all(b <= a for a, b in zip(hist, hist[1:]))
        not_worse += codebook_distortion(cb, x) <= codebook_distortion(build_random_codebook(x, 3, seed), x)
    ok = centers_ok and mono_all and not_worse == 100
    acceptance_line("C7 Lloyd", ok, f"centers within 0.1: {centers_ok}; histories non-increasing: {mono_all}; {not_worse}/100 restarts not worse")
    assert ok


def test_c8_image_pipeline(acceptance_line, tmp_path):
    t0 = time.perf_counter()
    clean = synthetic_piecewise_constant(64, seed=0)
    noisy = add_awgn(clean, 25 / 255, 1)
    patches, offs = extract_patches(clean, 4, 1)
    identity = np.array_equal(reassemble_average(patches, offs, 64, 64, 4).pixels, clean.pixels)
    cb, _ = lloyd_codebook(patches, 8, 50, 1e-6, 0)
    den = patch_denoise(noisy, cb, 4, 1)
    gain = psnr(clean, den) - psnr(clean, noisy)
    p1, p2 = tmp_path / "a.pgm", tmp_path / "b.pgm"
    write_pgm(noisy, p1)
    write_pgm(read_pgm(p1), p2)
    roundtrip = p1.read_bytes() == p2.read_bytes()
    elapsed = time.perf_counter() - t0
    ok = gain >= 3.0 and identity and roundtrip and elapsed < 10.0
    acceptance_line(
        "C8 image pipeline",
        ok,
        f"PSNR gain {gain:.2f} dB (>= 3), identity {identity}, PGM round trip {roundtrip}, {elapsed:.2f}s (< 10s)",
    )
    assert ok


def _cli_bytes(argv, out, capsys):
    code = main([str(a) for a in argv] + ["--out", str(out)])
    capsys.readouterr()
    assert code == 0
    return out.read_bytes()


def test_c9_determinism(acceptance_line, tmp_path, capsys):
    rng = np.random.default_rng(202)
    cb8 = tmp_path / "cb8.cdbk"
    save_codebook(Codebook(rng.standard_normal((256, 16)), 8), cb8)
    pair = tmp_path / "pair.cdbk"
    save_codebook(Codebook([[0.0, 0.0], [2.0, 0.0]], 1), pair)

    c2 = ["verify-bounds", "--codebook", cb8, "--sigma", 1, "--eta", 0.5, "--trials", 10**4, "--seed", 2, "--per-trial"]
    c4 = ["pe", "--codebook", pair, "--sigma", 1, "--trials", 10**5, "--seed", 4]
    results = {}
    for name, argv in (("C2", c2), ("C4", c4)):
        outs = [
            _cli_bytes(argv + ["--threads", t], tmp_path / f"{name}_{t}_{rep}.out", capsys)
            for t in (1, 4)
            for rep in range(2)
        ]
        results[name] = len(set(outs)) == 1
    ok = all(results.values())
    acceptance_line("C9 determinism", ok, f"byte-identical reports across runs and --threads 1/4: {results}")
    assert ok
