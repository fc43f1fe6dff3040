"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Kernel rows call both implementations directly on the same inputs and
check that their outputs are identical. The end-to-end rows run a Monte
Carlo workload in a subprocess per backend (selection happens at import).
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from compden import kernels

E2E = """
import time, numpy as np
from compden import Codebook
from compden.sim import TrialConfig, run_denoise_trials
from compden.codec import lloyd_codebook
rng = np.random.default_rng(0)
cb = Codebook(rng.standard_normal((256, 16)), 8)
t = time.perf_counter(); run_denoise_trials(TrialConfig(cb, 1.0, 0.5, 20000, 1)); a = time.perf_counter() - t
x = rng.standard_normal((4000, 16))
t = time.perf_counter(); lloyd_codebook(x, 8, 20, 1e-12, 0); b = time.perf_counter() - t
print(a, b)
"""


def kernel_cases(rng):
    c256 = rng.standard_normal((256, 16))
    q = rng.standard_normal((10000, 16))
    c64 = rng.standard_normal((64, 16))
    d = 0.1 * rng.standard_normal(16)
    return [
        ("nearest_indices M=256 n=16 Q=1e4", lambda impl: kernels.nearest_indices(c256, q, impl)),
        ("nearest_indices M=256 n=16 Q=1", lambda impl: kernels.nearest_indices(c256, q[:1], impl)),
        ("union_q_sum M=64 n=16", lambda impl: kernels.union_q_sum(c64, d, 0.0, 0.5, impl)),
        ("union_q_sum M=256 n=16", lambda impl: kernels.union_q_sum(c256, d, 0.0, 0.5, impl)),
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    rng = np.random.default_rng(1)

    print(f"{'case':40s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}  same")
    for name, fn in kernel_cases(rng):
        res = {k: fn(impl) for k, impl in backends.items()}
        same = np.array_equal(res["python"], res["cython"])
        t = {}
        for k, impl in backends.items():
            timer = timeit.Timer(lambda: fn(impl))
            number, _ = timer.autorange()
            t[k] = min(timer.repeat(args.repeat, number)) / number * 1e3
        print(f"{name:40s} {t['python']:12.3f} {t['cython']:12.3f} {t['python'] / t['cython']:8.1f}  {same}")

    rows = {}
    for name, env in (("python", {"COMPDEN_PURE_PYTHON": "1"}), ("cython", {})):
        out = subprocess.run(
            [sys.executable, "-c", E2E], env={**os.environ, **env}, capture_output=True, text=True, check=True
        )
        rows[name] = [float(v) * 1e3 for v in out.stdout.split()]
    for i, label in enumerate(("run_denoise_trials R=8 n=16 2e4 trials", "lloyd_codebook R=8 N=4000 20 iters")):
        py, cy = rows["python"][i], rows["cython"][i]
        print(f"{label:40s} {py:12.1f} {cy:12.1f} {py / cy:8.1f}")


if __name__ == "__main__":
    main()
