"""Benchmark the compiled raster kernels against the numpy fallback.

Run after installing the package:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from splatalloc.fitting import _kernels_np

try:
    from splatalloc.fitting import _kernels
except ImportError:
    _kernels = None

CUTOFF = 3.0


def make_workload(seed: int, count: int, height: int, width: int):
    rng = np.random.default_rng(seed)
    params = np.column_stack(
        [
            rng.uniform(0.0, width, count),
            rng.uniform(0.0, height, count),
            rng.uniform(0.5, 3.0, count),
            rng.uniform(-1.0, 1.0, count),
        ]
    )
    residual = rng.standard_normal((height, width))
    return params, residual


def time_backend(module, params, residual, reps: int) -> tuple[float, float]:
    height, width = residual.shape
    start = time.perf_counter()
    for _ in range(reps):
        module.render(params, height, width, CUTOFF)
    render_s = (time.perf_counter() - start) / reps
    start = time.perf_counter()
    for _ in range(reps):
        module.gradient_stats(params, residual, CUTOFF)
    grad_s = (time.perf_counter() - start) / reps
    return render_s, grad_s


def main() -> None:
    cases = [
        ("small", 256, 32, 32, 50),
        ("medium", 1024, 64, 64, 20),
        ("large", 4096, 128, 128, 5),
    ]
    print(f"{'case':<8} {'backend':<10} {'render ms':>10} {'gradient ms':>12}")
    for name, count, height, width, reps in cases:
        params, residual = make_workload(0, count, height, width)
        backends = [("python", _kernels_np)]
        if _kernels is not None:
            backends.append(("compiled", _kernels))
        timings = {}
        for label, module in backends:
            render_s, grad_s = time_backend(module, params, residual, reps)
            timings[label] = (render_s, grad_s)
            print(
                f"{name:<8} {label:<10} {render_s * 1e3:>10.3f} {grad_s * 1e3:>12.3f}"
            )
        if "compiled" in timings:
            py_r, py_g = timings["python"]
            c_r, c_g = timings["compiled"]
            print(
                f"{name:<8} {'speedup':<10} {py_r / c_r:>9.1f}x {py_g / c_g:>11.1f}x"
            )
    if _kernels is None:
        print("compiled extension not available; showed the fallback only")


if __name__ == "__main__":
    main()
