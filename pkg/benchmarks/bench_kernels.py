"""Compare the compiled density kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from spmilb import _kernels_py

try:
    from spmilb import _kernels
except ImportError:
    _kernels = None


CASES = [
    ("laguerre scalar m=29 r=30", lambda k: k.laguerre(29, 30.0, 17.5)),
    ("laguerre_array m=29 r=30 x4096", lambda k: k.laguerre_array(29, 30.0, XS)),
    ("wishart_density N=60 L=30 x256", lambda k: k.wishart_density(XS[:256], 60, 30)),
    ("wishart_density N=60 L=30 x4096", lambda k: k.wishart_density(XS, 60, 30)),
    ("wishart_density N=128 L=100 x4096", lambda k: k.wishart_density(XS, 128, 100)),
]
XS = np.linspace(0.0, 262.0, 4096)


def bench(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'case':40s} {'numpy [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for name, call in CASES:
        t_py = bench(lambda: call(_kernels_py), args.repeat)
        if _kernels is None:
            print(f"{name:40s} {t_py * 1e6:12.1f}")
            continue
        a, b = call(_kernels_py), call(_kernels)
        assert np.allclose(a, b, rtol=1e-10, atol=1e-300), name
        t_c = bench(lambda: call(_kernels), args.repeat)
        print(f"{name:40s} {t_py * 1e6:12.1f} {t_c * 1e6:12.1f} {t_py / t_c:8.1f}x")
    end_to_end()


END_TO_END = """
import time
from spmilb import BACKEND, optimal_lp, milb
t = time.perf_counter()
for p in (1.0, 100.0, 10000.0):
    milb.eig_density.cache_clear()
    optimal_lp(p, 40, 30, 60, 1.0)
print(BACKEND, time.perf_counter() - t)
"""


def end_to_end():
    """Three cold exhaustive pilot-length searches (29 densities each) per backend."""
    print("\nend-to-end: optimal_lp at K=40, L=30, N=60, three powers, cold caches")
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("SPMILB_PURE_PYTHON", None)
        if pure:
            env["SPMILB_PURE_PYTHON"] = "1"
        res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True)
        backend, secs = res.stdout.split()
        print(f"  {backend:8s} {float(secs) * 1e3:9.1f} ms")


if __name__ == "__main__":
    main()
