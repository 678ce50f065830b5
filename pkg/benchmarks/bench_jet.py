"""Compare the compiled jet kernel with the numpy fallback.

    python3 benchmarks/bench_jet.py [--points N] [--repeat R]

Each case evaluates value, gradient and Hessian of every component of a map
over N sample points; the best of R runs is reported.
"""
import argparse
import time

import numpy as np

from semiconf.core import Signature
from semiconf.diffops import NULL, SmoothMap
from semiconf.expr import BACKEND

CASES = [
    ("compactification (null)", Signature(2, 1), NULL, ["2/pi*atan(u)", "2/pi*atan(v)"]),
    ("polynomial 2D", Signature(2, 1), "cartesian",
     ["x^3 - 3*x*t^2 + x*t", "3*x^2*t - t^3 + x^2"]),
    ("transcendental 2D", Signature(2, 1), "cartesian",
     ["exp(0.3*x)*cos(t) + tanh(x*t)", "sqrt(2 + sin(x)) * log(1 + t^2)"]),
    ("affine 4D", Signature(4, 2), "cartesian",
     ["x1 + 0.5*x3", "x2 - x4", "2*x3 + x1", "x4 + 0.1*x2"]),
]


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if BACKEND != "compiled":
        raise SystemExit("compiled kernel not built; run pip install --no-build-isolation -e .")

    rng = np.random.default_rng(0)
    print(f"{'case':<26}{'points':>8}{'compiled ms':>14}{'numpy ms':>12}{'speedup':>9}")
    for name, sig, frame, comps in CASES:
        F = SmoothMap.from_strings(sig, comps, frame)
        pts = np.ascontiguousarray(rng.uniform(-0.9, 0.9, (args.points, sig.n)))
        a = F.bundle.jets(pts, "compiled")
        b = F.bundle.jets(pts, "python")
        for x, y in zip(a[:3], b[:3]):
            assert np.allclose(x, y, rtol=1e-13, atol=1e-13), name
        tc = best_time(lambda: F.bundle.jets(pts, "compiled"), args.repeat)
        tp = best_time(lambda: F.bundle.jets(pts, "python"), args.repeat)
        print(f"{name:<26}{args.points:>8}{tc * 1e3:>14.2f}{tp * 1e3:>12.2f}{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
