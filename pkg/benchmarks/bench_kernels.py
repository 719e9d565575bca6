"""Time the compiled and numpy kernel backends side by side.

    python benchmarks/bench_kernels.py [--size 512] [--repeat 5]
"""
import argparse
import time

import numpy as np

from bwfusion import _backend
from bwfusion.atrous import decompose
from bwfusion.harness import ExperimentSpec, generate_scene, run_experiment
from bwfusion.metrics import WindowSpec, windowed_metric


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    g = np.random.default_rng(0)
    x = g.normal(size=(args.size, args.size))
    y = x + 0.3 * g.normal(size=x.shape)
    scene = generate_scene(128, 128, 4, 4, seed=0)
    spec = ExperimentSpec(methods=("aw", "sw", "bw"))

    cases = {
        f"decompose {args.size}^2, 3 levels": lambda: decompose(x, 3),
        f"windowed uiqi {args.size}^2, 8x8": lambda: windowed_metric(x, y, WindowSpec(8), "uiqi"),
        "experiment 128^2 x4 bands, aw/sw/bw": lambda: run_experiment(scene.pan, scene.reference, spec),
    }
    backends = _backend.available()
    print(f"{'case':42s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    previous = _backend.name()
    try:
        for label, fn in cases.items():
            row = {}
            for b in backends:
                _backend.use(b)
                fn()  # warm-up
                row[b] = best_of(fn, args.repeat)
            speed = f"{row['python'] / row['cython']:10.1f}x" if "cython" in row else ""
            print(f"{label:42s}" + "".join(f"{row[b] * 1e3:10.1f}ms" for b in backends) + speed)
    finally:
        _backend.use(previous)


if __name__ == "__main__":
    main()
