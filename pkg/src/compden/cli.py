"""Command-line interface.

Exit codes: 0 success, 2 usage or domain error, 3 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, codec, imagelab, rdp, sim
from .core import (
    DegenerateCodewordsError,
    DimensionError,
    DomainError,
    FormatError,
    InsufficientDataError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


def _load_vectors(path: str, patch: int | None = None, stride: int = 1) -> np.ndarray:
    """Samples from ``.npy``, a PGM (as k x k patches) or a delimited text file."""
    p = Path(path)
    if p.suffix.lower() == ".pgm":
        if patch is None:
            raise UsageError("--patch is required when training from a PGM image")
        patches, _ = imagelab.extract_patches(imagelab.read_pgm(p), patch, stride)
        return patches
    if p.suffix.lower() == ".npy":
        try:
            arr = np.load(p, allow_pickle=False)
        except ValueError as exc:
            raise FormatError(f"cannot parse {p}: {exc}") from exc
    else:
        with open(p, encoding="utf-8") as fh:
            text = fh.read()
        delim = "," if "," in text else None
        try:
            arr = np.loadtxt(io.StringIO(text), delimiter=delim, ndmin=2, dtype=np.float64)
        except ValueError as exc:
            raise FormatError(f"cannot parse {p}: {exc}") from exc
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or not np.all(np.isfinite(arr)):
        raise FormatError(f"{p} must hold a finite 2-D array of samples")
    return arr


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_float(v: float):
    return "inf" if v == math.inf else v


def _positive_int(name: str, v: int) -> int:
    if v < 1:
        raise UsageError(f"{name} must be >= 1, got {v}")
    return v


def _check_sigma(v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise UsageError(f"--sigma must be positive, got {v}")
    return v


def cmd_codebook_build(args) -> int:
    _positive_int("--rate", args.rate)
    x = _load_vectors(args.input, args.patch, args.stride)
    if args.method == "lloyd":
        cb, history = codec.lloyd_codebook(x, args.rate, args.iters, args.tol, args.seed)
    else:
        cb, history = codec.build_random_codebook(x, args.rate, args.seed), []
    codec.save_codebook(cb, args.out)
    summary = {
        "dim": cb.dim,
        "rate_bits": cb.rate_bits,
        "training_distortion": codec.codebook_distortion(cb, x),
        "method": args.method,
        "iterations": len(history),
    }
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify_bounds(args) -> int:
    _check_sigma(args.sigma)
    if not 0.0 < args.eta < 1.0:
        raise UsageError(f"--eta must lie in (0, 1), got {args.eta}")
    _positive_int("--trials", args.trials)
    _positive_int("--threads", args.threads)
    cb = codec.load_codebook(args.codebook)
    samples = None
    if args.source == "samples":
        if not args.samples:
            raise UsageError("--source samples requires --samples <path>")
        samples = _load_vectors(args.samples)
    if args.eta * cb.rate_bits <= 2:
        print(
            f"warning: vacuous guarantee: eta*R = {args.eta * cb.rate_bits:g} <= 2, "
            "the envelope holds with probability >= 0",
            file=sys.stderr,
        )
    config = sim.TrialConfig(cb, args.sigma, args.eta, args.trials, args.seed, args.source, samples)
    report = sim.run_denoise_trials(config, threads=args.threads)
    _emit(report.to_csv() if args.format == "csv" else report.to_json(per_trial=args.per_trial), args.out)
    return EXIT_OK


PE_FIELDS = ("empirical_pe", "wilson_low", "wilson_high", "union_bound", "worst_case_bound")


def cmd_pe(args) -> int:
    _check_sigma(args.sigma)
    _positive_int("--trials", args.trials)
    _positive_int("--threads", args.threads)
    if not args.dp >= 0:
        raise UsageError(f"--dp must be non-negative, got {args.dp}")
    cb = codec.load_codebook(args.codebook)
    direction = None
    if args.direction:
        direction = _load_vectors(args.direction).ravel()
    d = sim.distortion_vector(cb.dim, args.dp, direction)
    est, low, high = sim.empirical_pe(cb, direction, args.dp, args.sigma, args.trials, args.seed, args.threads)
    result = {
        "empirical_pe": est,
        "wilson_low": low,
        "wilson_high": high,
        "union_bound": bounds.union_bound_pe(cb, d, args.sigma),
        "worst_case_bound": bounds.worst_case_union_bound(cb, args.dp, args.sigma),
    }
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PE_FIELDS)
        w.writerow([repr(result[k]) for k in PE_FIELDS])
        text = buf.getvalue()
    else:
        meta = {"rate_bits": cb.rate_bits, "dim": cb.dim, "sigma": args.sigma, "dp": args.dp,
                "n_trials": args.trials, "master_seed": args.seed, "rng": sim.RNG_NAME}
        text = json.dumps({**result, "config": meta}, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_dp_curve(args) -> int:
    if args.gaussian_ref is not None:
        s, noise = args.gaussian_ref
        params = rdp.gaussian_mmse_reference(s, noise)
    else:
        if args.dstar is None or args.pstar is None:
            raise UsageError("give --dstar and --pstar, or --gaussian-ref S SIGMA")
        params = rdp.DpParams(args.dstar, args.pstar)
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    pmax = args.pmax if args.pmax is not None else (2.0 * params.p_star if params.p_star > 0 else 1.0)
    if not (math.isfinite(pmax) and pmax > 0):
        raise UsageError("--pmax must be positive")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("P", "D"))
    for k in range(args.points):
        p = pmax * k / (args.points - 1)
        w.writerow((repr(p), repr(rdp.dp_function(params, p))))
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_denoise_image(args) -> int:
    _positive_int("--patch", args.patch)
    _positive_int("--stride", args.stride)
    _positive_int("--threads", args.threads)
    noisy = imagelab.read_pgm(args.input)
    cb = codec.load_codebook(args.codebook)
    if cb.dim != args.patch * args.patch:
        raise UsageError(f"codebook dimension {cb.dim} does not match --patch {args.patch} (needs {args.patch ** 2})")
    clean = imagelab.read_pgm(args.clean) if args.clean else None
    den = imagelab.patch_denoise(noisy, cb, args.patch, args.stride, threads=args.threads)
    imagelab.write_pgm(den, args.out)
    if clean is not None:
        # score the image as written to disk, i.e. after 8-bit quantisation
        written = imagelab.read_pgm(args.out)
        metrics = {
            "psnr_noisy": _json_float(imagelab.psnr(clean, noisy)),
            "psnr_denoised": _json_float(imagelab.psnr(clean, written)),
        }
        sys.stdout.write(json.dumps(metrics, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_make_benchmark(args) -> int:
    _check_sigma(args.sigma)
    clean = imagelab.synthetic_piecewise_constant(args.size, seed=args.seed)
    noisy = imagelab.add_awgn(clean, args.sigma, args.seed + 1)
    imagelab.write_pgm(clean, args.clean)
    imagelab.write_pgm(noisy, args.noisy)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="compden", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codebook-build", help="train a codebook and write it in CDBK format")
    p.add_argument("--input", required=True, help="samples (.npy, .csv/.txt rows) or a P5 PGM image")
    p.add_argument("--rate", type=int, required=True, help="rate R in bits; the codebook holds 2**R codewords")
    p.add_argument("--method", choices=("random", "lloyd"), default="lloyd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--patch", type=int, help="patch side when --input is a PGM")
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_codebook_build)

    p = sub.add_parser("verify-bounds", help="Monte Carlo check of the per-instance error envelope")
    p.add_argument("--codebook", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--source", choices=("codewords", "samples"), default="codewords")
    p.add_argument("--samples")
    p.add_argument("--per-trial", action="store_true", help="include per-trial records in JSON output")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("pe", help="empirical decoding error probability against the union bounds")
    p.add_argument("--codebook", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dp", type=float, default=0.0, help="squared distortion D(P) = ||d||^2")
    p.add_argument("--direction", help="file holding the direction of d")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pe)

    p = sub.add_parser("dp-curve", help="tabulate the distortion-perception function")
    p.add_argument("--dstar", type=float)
    p.add_argument("--pstar", type=float)
    p.add_argument("--gaussian-ref", type=float, nargs=2, metavar=("S", "SIGMA"))
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--pmax", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dp_curve)

    p = sub.add_parser("denoise-image", help="patchwise nearest-codeword denoising of a PGM image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--patch", type=int, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--clean")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_denoise_image)

    p = sub.add_parser("make-benchmark", help="write the synthetic piecewise-constant clean/noisy pair")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--sigma", type=float, default=25.0 / 255.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clean", required=True)
    p.add_argument("--noisy", required=True)
    p.set_defaults(func=cmd_make_benchmark)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, DimensionError, DegenerateCodewordsError, InsufficientDataError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
