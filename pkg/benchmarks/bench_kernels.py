"""Time the compiled walkers against the numpy fallback.

Run ``python3 benchmarks/bench_kernels.py [--paths N] [--repeat R]``. Both
backends consume the same random streams, so the script also checks that
their outputs agree before reporting timings.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from cotlar.kernels import BACKENDS
from cotlar.operators import GridFn, GridSpec
from cotlar.sde import PathConfig, gv_hilbert_pathwise, strip_exit_samples


def _trig() -> GridFn:
    spec = GridSpec(1, 64, 2.0 * math.pi)
    return GridFn.from_function(spec, lambda x: np.cos(x) + 0.5 * np.sin(2.0 * x))


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    strip_cfg = PathConfig(2, 2**-8, 4096, args.paths, seed=1)
    gv_cfg = PathConfig(2, 2**-7, 2048, max(args.paths // 4, 1000), seed=2)
    f = _trig()
    cases = {
        "strip_exit": lambda mod: strip_exit_samples(0.5, strip_cfg, mod),
        "halfplane_gv": lambda mod: gv_hilbert_pathwise(f, 0.25, gv_cfg, backend=mod),
    }
    print(f"backends: {', '.join(BACKENDS)}")
    print(f"{'case':14s} {'backend':8s} {'seconds':>9s} {'speedup':>8s}")
    for name, run in cases.items():
        times, outputs = {}, {}
        for key, mod in BACKENDS.items():
            times[key], outputs[key] = _best(lambda: run(mod), args.repeat)
        if len(outputs) == 2:
            a, b = outputs["numpy"], outputs["cython"]
            same = (np.allclose(a["y"], b["y"]) if name == "strip_exit"
                    else math.isclose(a["rms_residual"], b["rms_residual"], rel_tol=1e-9))
            if not same:
                print(f"warning: backends disagree on {name}")
        for key, sec in times.items():
            print(f"{name:14s} {key:8s} {sec:9.3f} {times['numpy'] / sec:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
