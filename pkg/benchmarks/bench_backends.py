"""
Benchmark the numba kernels against the pure-numpy fallback.

Kernels are timed in-process through kernels.implementations().  The full
recompile (targets, slopes, profile, quantisation) at 1920 projector columns
is timed in a fresh interpreter per backend, since PHASEFORGE_NUMBA is read
at import time.

    python3 benchmarks/bench_backends.py [--repeat 50]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from phaseforge import config, kernels

RECOMPILE = """
import time, numpy as np
from phaseforge import compiler, config, device, kernels
doc = config.demo_document("bent-surface")
doc["projector"]["n_cols"] = {n_cols}
cfg = config.parse_config(doc)
lut = device.simulate_calibration(cfg.pslm, cfg.sweep())
compiler.compile_phase_image(cfg.projector, cfg.surface, cfg.pslm, lut, rows=1)
ts = []
for _ in range({repeat}):
    t0 = time.perf_counter()
    compiler.compile_phase_image(cfg.projector, cfg.surface, cfg.pslm, lut, rows=1)
    ts.append(time.perf_counter() - t0)
print(kernels.BACKEND, np.median(ts))
"""


def median_time(fn, repeat):
    fn()  # warmup, and jit compile for numba
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return float(np.median(ts))


def kernel_cases(n_rays, n_blocks):
    surf = config.parse_config(config.demo_document("bent-surface")).surface
    rng = np.random.default_rng(0)
    ang = rng.uniform(-0.35, 0.35, n_rays)
    dirs = np.column_stack([np.sin(ang), np.cos(ang)])
    origin = np.zeros(2)
    s = rng.uniform(0, surf.total_length, n_rays)

    pitch = 3.74e-6
    h = 8 * pitch
    g = np.cumsum(rng.normal(size=n_blocks)) * 2e3
    c0 = 0.5 * h
    knot = np.concatenate([[g[0] * c0], g[0] * c0 + np.cumsum(0.5 * (g[:-1] + g[1:]) * h)])
    x = (np.arange(8 * n_blocks) + 0.5) * pitch
    table = kernels.phase_table(2 * np.pi, 256, 2.2)

    def cases(impl):
        phi = impl.c1_phase(c0, h, g, knot, x)
        drive, _ = impl.wrap_quantize(phi, 2 * np.pi, 256, 2.2, True)
        return {
            "intersect_fan": lambda: impl.intersect_fan(origin, dirs, surf.vertices, surf.cum_s),
            "points_at_arclength": lambda: impl.points_at_arclength(surf.vertices, surf.cum_s, s),
            "c1_phase": lambda: impl.c1_phase(c0, h, g, knot, x),
            "c1_slope": lambda: impl.c1_slope(c0, h, g, x),
            "wrap_quantize": lambda: impl.wrap_quantize(phi, 2 * np.pi, 256, 2.2, True),
            "unwrap_table": lambda: impl.unwrap_table(drive, table, 2 * np.pi),
        }

    return cases


def recompile_time(backend, n_cols, repeat):
    env = dict(os.environ, PHASEFORGE_NUMBA="1" if backend == "numba" else "0")
    code = RECOMPILE.format(n_cols=n_cols, repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, t = out.stdout.split()
    return name, float(t)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--n-cols", type=int, default=1920)
    args = ap.parse_args(argv)

    impls = kernels.implementations()
    print("=" * 72)
    print(f"phaseforge backends: {', '.join(impls)}  (default {kernels.BACKEND})")
    print("=" * 72)
    if "numba" not in impls:
        print("[warn] numba not importable; only the numpy path is timed")

    n_blocks = args.n_cols
    cases = kernel_cases(args.n_cols, n_blocks)
    timings = {name: cases(impl) for name, impl in impls.items()}

    print(f"\nkernels ({args.n_cols} rays, {n_blocks} blocks x 8 px), median of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{b:>14}" for b in impls) + f"{'speedup':>10}")
    print("-" * 72)
    for kname in timings["numpy"]:
        ts = [median_time(timings[b][kname], args.repeat) for b in impls]
        row = f"{kname:<22}" + "".join(f"{t * 1e6:>11.1f} us" for t in ts)
        if len(ts) == 2:
            row += f"{ts[0] / ts[1]:>9.1f}x"
        print(row)

    print(f"\nfull recompile, n_cols={args.n_cols}, median of {args.repeat}")
    print("-" * 72)
    base = None
    for backend in impls:
        name, t = recompile_time(backend, args.n_cols, args.repeat)
        note = "" if base is None else f"  ({base / t:.1f}x)"
        base = base or t
        print(f"{name:<22}{t * 1e3:>11.2f} ms{note}")


if __name__ == "__main__":
    main()
