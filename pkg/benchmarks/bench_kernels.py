"""Time the lattice kernels under numba and under plain numpy.

    python3 benchmarks/bench_kernels.py [--n 80] [--repeat 5]

Per-kernel timings call both implementations in one process. The
end-to-end row builds a head-on AvUs map in two subprocesses, one with
COGMAP_DISABLE_NUMBA=1, so import-time backend selection is exercised too.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cogmap import kernels

E2E = """
import time
from cogmap import planner, scenarios
sc = scenarios.generate(scenarios.preset("head_on", n={n}))
planner.build_map_avus(sc)            # warm-up (jit compile, predictor training)
t0 = time.perf_counter()
for _ in range({repeat}):
    planner.build_map_avus(sc)
print((time.perf_counter() - t0) / {repeat})
"""


def _inputs(n, rng):
    r = rng.uniform(-0.5, 3.0, (n, n))
    z = rng.uniform(-0.3, 0.3, (n, n))
    q = np.ones((n, n), dtype=np.uint8)
    om = np.full((n, n), -1, dtype=np.int64)
    m = 12
    centers = rng.uniform(0, n, (m, 2))
    ang = rng.uniform(0, 2 * np.pi, m)
    heads = np.column_stack([np.cos(ang), np.sin(ang)])
    return r, z, q, om, centers, heads, np.full(m, 6.0)


def _cases(fns, n, rng):
    r, z, q, om, centers, heads, radii = _inputs(n, rng)
    mask = np.zeros((n, n), dtype=bool)
    c = np.full((n, n), np.inf)
    prev = r - 0.3
    B = rng.random((n, n)) > 0.7
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    field = np.hypot(ii - 3.0, jj - 3.0)
    R = np.ones((n, n), dtype=np.bool_)
    out = np.zeros((40 * n, 3))
    return {
        "fhn_substeps": lambda: fns["fhn_substeps"](r.copy(), z.copy(), q, 0.2, 0.04, 0.05, 2),
        "accrete": lambda: fns["accrete"](r, q.copy(), om.copy(), B, 1, 1.0, 2.0),
        "record_arrivals": lambda: fns["record_arrivals"](prev, r, q, c.copy(), 0.1, 1.5),
        "stamp_discs": lambda: fns["stamp_discs"](mask, centers, radii),
        "stamp_lenses": lambda: fns["stamp_lenses"](mask, centers, centers + 3.0, radii),
        "zone_contact": lambda: fns["zone_contact"](r, q, om, centers, heads, radii * 3,
                                                    0.0873, 2.0, 1.0, 2.0),
        "descend": lambda: fns["descend"](field, R, n - 2.0, n - 2.0, field[n - 2, n - 2],
                                          3.0, 3.0, 0.5, 40 * n - 2, out),
    }


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def _e2e(n, repeat, disable):
    env = dict(os.environ)
    env.pop("COGMAP_DISABLE_NUMBA", None)
    if disable:
        env["COGMAP_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", E2E.format(n=n, repeat=repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=80)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=50)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args(argv)

    if not kernels.HAS_NUMBA:
        print("numba unavailable; nothing to compare")
        return 1
    np_cases = _cases(kernels.NUMPY_KERNELS, args.n, np.random.default_rng(0))
    nb_cases = _cases(kernels.NUMBA_KERNELS, args.n, np.random.default_rng(0))
    print(f"{'kernel':<16} {'numpy [us]':>12} {'numba [us]':>12} {'speedup':>8}")
    for name in np_cases:
        nb_cases[name]()          # compile outside the timed region
        a = _best(np_cases[name], args.repeat, args.number) * 1e6
        b = _best(nb_cases[name], args.repeat, args.number) * 1e6
        print(f"{name:<16} {a:12.1f} {b:12.1f} {a / b:8.1f}")
    if not args.skip_e2e:
        a = _e2e(args.n, 2, True)
        b = _e2e(args.n, 2, False)
        print(f"{'map build (s)':<16} {a:12.3f} {b:12.3f} {a / b:8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
