"""Time the compiled and numpy kernel backends on one refinement step.

    python benchmarks/bench_backends.py --size 64 --repeat 3
    python benchmarks/bench_backends.py --size 250 --repeat 1 --threads 8

Both backends must agree bit for bit; the script checks that before
reporting times.
"""
import argparse
import os
import statistics
import time

import numpy as np

from voxsubdiv import SubdivisionConfig, Volume, subdivide3d_tiled
from voxsubdiv._backend import BACKENDS


def bench(volume, mode, backend, threads, repeat):
    cfg = SubdivisionConfig(mode=mode, workers=threads)
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = subdivide3d_tiled(volume, cfg, backend=backend)
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64, help="edge length of the cubic input")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--modes", default="linear,nonlinear")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    vol = Volume(rng.random((args.size,) * 3, dtype=np.float32))
    n_out = (2 * args.size) ** 3
    print(f"input {args.size}^3 f32, threads={args.threads}, cores={os.cpu_count()}, "
          f"backends={sorted(BACKENDS)}")
    print(f"{'mode':<10} {'backend':<8} {'best s':>8} {'median s':>9} {'Mvox/s':>8}")
    for mode in args.modes.split(","):
        results = {}
        for name in sorted(BACKENDS):
            best, med, out = bench(vol, mode, name, args.threads, args.repeat)
            results[name] = (best, out.data)
            print(f"{mode:<10} {name:<8} {best:8.3f} {med:9.3f} {n_out / best / 1e6:8.1f}")
        outs = [data for _, data in results.values()]
        if any(o.tobytes() != outs[0].tobytes() for o in outs[1:]):
            raise SystemExit(f"backends disagree in {mode} mode")
        if "cython" in results:
            print(f"{'':<10} speedup cython/python: {results['python'][0] / results['cython'][0]:.2f}x")


if __name__ == "__main__":
    main()
