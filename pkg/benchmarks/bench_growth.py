"""Compare the compiled and pure-Python growth kernels.

    python benchmarks/bench_growth.py [--widths 128,256,512] [--height 40] [--repeat 3]

Both backends get identical pre-drawn random streams, so the script also
checks that they return the same surface.
"""

import argparse
import time

import numpy as np

from jjfab.filmgrowth import GrowthConfig, grow_surface, kernels, rate_to_mobility, thickness_to_ml


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--widths", default="128,256,512")
    ap.add_argument("--height", type=float, default=thickness_to_ml(15.0), help="mean height in monolayers")
    ap.add_argument("--angle", type=float, default=45.0)
    ap.add_argument("--rate", type=float, default=0.5, help="deposition rate in nm/s (sets hops and impurities)")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if kernels.compiled_kernel is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation` first")

    hops, contamination = rate_to_mobility(args.rate)
    print(f"height {args.height:.1f} ML, angle {args.angle:g} deg, {hops} hops, "
          f"contamination {contamination:g}, best of {args.repeat}")
    print(f"{'width':>6} {'python s':>10} {'cython s':>10} {'speedup':>8}  identical")
    for w in (int(x) for x in args.widths.split(",")):
        cfg = GrowthConfig(w, args.height, args.angle, hops, contamination, rng_seed=1)
        tp, sp = best_of(lambda: grow_surface(cfg, backend="python"), args.repeat)
        tc, sc = best_of(lambda: grow_surface(cfg, backend="cython"), args.repeat)
        same = np.array_equal(sp.heights, sc.heights)
        print(f"{w:>6} {tp:>10.4f} {tc:>10.4f} {tp / tc:>8.1f}  {same}")


if __name__ == "__main__":
    main()
