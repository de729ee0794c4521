"""Compare the compiled and numpy MLP kernels.

    python benchmarks/bench_kernels.py [--repeat 20] [--fit]

Times one training epoch (the sweep's hot loop) for the [j, 15, 5, 2]
network at several input widths, and with ``--fit`` one complete training
run per backend.
"""

from __future__ import annotations

import argparse
import time
import timeit

import numpy as np

from dcann import kernels, mlp

N_FIT = 3375  # training rows left after the 75/25 split and the early-stop holdout


def epoch_times(j: int, repeat: int) -> dict[str, float]:
    rng = np.random.default_rng(j)
    sizes = (j, 15, 5, 2)
    X = rng.standard_normal((N_FIT, j))
    y = rng.integers(0, 2, N_FIT).astype(np.intp)
    order = rng.permutation(N_FIT).astype(np.intp)
    n = mlp.Architecture(sizes).n_params
    start = rng.standard_normal(n) * 0.1
    out = {}
    for name, kern in kernels.BACKENDS.items():
        p, m, v, g = start.copy(), np.zeros(n), np.zeros(n), np.zeros(n)

        def once():
            kern.train_epoch(p, m, v, g, sizes, X, y, order, 200, 1e-3, 0.9, 0.999, 1e-8, 0)

        once()
        out[name] = min(timeit.repeat(once, number=1, repeat=repeat))
    return out


def fit_times(j: int) -> dict[str, tuple[float, int]]:
    rng = np.random.default_rng(100 + j)
    X = rng.standard_normal((3750, j))
    y = (X[:, 0] + 0.5 * rng.standard_normal(3750) > 0).astype(int)
    out = {}
    for name in kernels.BACKENDS:
        t0 = time.perf_counter()
        _, log = mlp.train(mlp.Architecture.standard(j), X, y, mlp.TrainSettings(seed=1), backend=name)
        out[name] = (time.perf_counter() - t0, log.n_epochs)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--fit", action="store_true", help="also time complete training runs")
    args = ap.parse_args()

    names = list(kernels.BACKENDS)
    print(f"backends: {', '.join(names)} (active: {kernels.BACKEND})")
    if "cython" not in names:
        print("compiled extension not built; only the numpy kernels can be timed")
    print(f"{'inputs':>6} " + " ".join(f"{n + ' ms/epoch':>18}" for n in names) + "   speedup")
    for j in (1, 10, 30, 100):
        t = epoch_times(j, args.repeat)
        speed = f"{t['python'] / t['cython']:8.2f}x" if "cython" in t else ""
        print(f"{j:>6} " + " ".join(f"{t[n] * 1e3:18.3f}" for n in names) + f"   {speed}")
    if args.fit:
        print()
        for j in (10, 100):
            for name, (secs, epochs) in fit_times(j).items():
                print(f"fit j={j:<3} {name:<7} {secs:7.3f}s  {epochs} epochs")


if __name__ == "__main__":
    main()
