"""Benchmark the compiled recurrence kernels against the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--hidden 800] [--steps 2000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from convsql.neural.kernels import _gates_np

try:
    from convsql.neural.kernels import _gates_cy
except ImportError:
    _gates_cy = None


def bench_backend(impl, hidden: int, steps: int, seed: int = 0) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    preacts = rng.normal(size=(steps, 4 * hidden))
    grad = rng.normal(size=(2, hidden))
    c = np.zeros(hidden)

    t0 = time.perf_counter()
    caches = []
    for j in range(steps):
        hc, cache = impl.lstm_gates_forward(preacts[j], c)
        c = hc[1]
        caches.append(cache)
    t_forward = time.perf_counter() - t0

    t0 = time.perf_counter()
    for cache in reversed(caches):
        impl.lstm_gates_backward(cache, grad)
    t_backward = time.perf_counter() - t0
    return t_forward, t_backward


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--hidden", type=int, default=800)
    parser.add_argument("--steps", type=int, default=2000)
    args = parser.parse_args()

    rows = [("python", *bench_backend(_gates_np, args.hidden, args.steps))]
    if _gates_cy is not None:
        rows.append(("cython", *bench_backend(_gates_cy, args.hidden, args.steps)))
    else:
        print("compiled backend unavailable; run pip install -e . first")

    print(f"hidden={args.hidden} steps={args.steps}")
    print(f"{'backend':<8} {'forward':>10} {'backward':>10} {'steps/s fwd':>12}")
    for name, fwd, bwd in rows:
        print(f"{name:<8} {fwd:>9.3f}s {bwd:>9.3f}s {args.steps / fwd:>12.0f}")
    if len(rows) == 2:
        print(f"speedup: forward {rows[0][1] / rows[1][1]:.2f}x, backward {rows[0][2] / rows[1][2]:.2f}x")

    # numerical agreement between backends on a shared workload
    if _gates_cy is not None:
        rng = np.random.default_rng(1)
        preact = rng.normal(size=4 * args.hidden)
        c_prev = rng.normal(size=args.hidden)
        hc_np, _ = _gates_np.lstm_gates_forward(preact, c_prev)
        hc_cy, _ = _gates_cy.lstm_gates_forward(preact, c_prev)
        print(f"max forward difference: {np.abs(hc_np - hc_cy).max():.2e}")


if __name__ == "__main__":
    main()
