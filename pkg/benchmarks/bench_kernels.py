"""Time the compiled kernel against the pure-Python fallback.

Each backend runs in its own interpreter (the choice is made at import
time), on the same seeded workloads:

* ``weyl_mul``   products of random Weyl elements on the torus, D = 8
* ``fedosov``    building a curved Fedosov connection on R^2, D = 12
* ``star``       star products on that connection

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--json]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
from fedosov import BACKEND, AffineConnectionData, BaseFunction, ChartManifold, WeylSpace, build_fedosov, star, weyl_mul
from fedosov.basefunc import EUCLIDEAN, TORUS
from fedosov.sampling import random_function, rng_for, small_scalar

repeat = int(sys.argv[1])
rng = rng_for(7)
space = WeylSpace(1, 8, TORUS)


def element():
    out = space.zero()
    for _ in range(6):
        k = rng.randint(0, 2)
        alpha = (rng.randint(0, 3), rng.randint(0, 3))
        x = (rng.randint(-2, 2), rng.randint(-2, 2))
        out = out + space.monomial(k, alpha, x, small_scalar(rng) or 1)
    return out


pairs = [(element(), element()) for _ in range(200)]
R2 = ChartManifold(EUCLIDEAN, 1)
conn = AffineConnectionData.from_lowered(
    R2,
    {
        (0, 0, 0): BaseFunction(EUCLIDEAN, 2, {(0, 1): 1}),
        (0, 0, 1): BaseFunction(EUCLIDEAN, 2, {(1, 0): "1/2"}),
        (0, 1, 0): BaseFunction(EUCLIDEAN, 2, {(1, 0): "1/2"}),
        (1, 0, 0): BaseFunction(EUCLIDEAN, 2, {(1, 0): "1/2"}),
    },
)
F = build_fedosov(R2, conn, None, 8)
fs = [(random_function(rng, R2), random_function(rng, R2)) for _ in range(5)]

workloads = {
    "weyl_mul": lambda: [weyl_mul(a, b) for a, b in pairs],
    "fedosov": lambda: build_fedosov(R2, conn, None, 12),
    "star": lambda: [star(F, f, g) for f, g in fs],
}
out = {"backend": BACKEND}
for name, fn in workloads.items():
    out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def run_backend(pure, repeat):
    env = dict(os.environ, FEDOSOV_PURE_PYTHON="1" if pure else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", action="store_true", help="print raw timings as JSON")
    args = parser.parse_args(argv)
    compiled = run_backend(False, args.repeat)
    python = run_backend(True, args.repeat)
    if args.json:
        print(json.dumps({"compiled": compiled, "python": python}, indent=2, sort_keys=True))
        return 0
    if compiled["backend"] != "cython":
        print("note: compiled kernel unavailable, both columns use the fallback")
    print(f"{'workload':<10} {'compiled [s]':>13} {'python [s]':>11} {'speedup':>8}")
    for name in ("weyl_mul", "fedosov", "star"):
        c, p = compiled[name], python[name]
        print(f"{name:<10} {c:>13.3f} {p:>11.3f} {p / c:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
