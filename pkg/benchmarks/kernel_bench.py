#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot paths (pairwise IoU, greedy NMS, bilinear resize) on
detector-scale workloads and prints a comparison table. Run:

    python3 benchmarks/kernel_bench.py [--iters N]

Force one backend for the rest of the stack via PHISHGUARD_KERNELS.
"""

import argparse
import time

import numpy as np

from phishguard._kernels import numba_impl, numpy_impl


def _boxes(rng, n):
    x0y0 = rng.uniform(0, 0.8, (n, 2))
    wh = rng.uniform(0.01, 0.4, (n, 2))
    return np.concatenate([x0y0, np.minimum(x0y0 + wh, 1.0)], axis=1)


def bench(fn, args, iters):
    fn(*args)  # warm (and JIT-compile on the numba path)
    start = time.perf_counter()
    for _ in range(iters):
        fn(*args)
    return (time.perf_counter() - start) / iters


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iters", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rects = _boxes(rng, 100)
    scores = rng.uniform(0, 1, 100)
    classes = rng.integers(0, 5, 100)
    image = rng.uniform(0, 255, (760, 540, 3))

    workloads = [
        ("iou_matrix 100x100", "iou_matrix", (rects, rects)),
        ("nms 100 boxes", "nms_keep", (rects, scores, classes, 0.5, 0.3, True)),
        ("resize 540x760 -> 432x768", "resize_bilinear", (image, 768, 432)),
    ]

    print(f"{'workload':<28} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for label, name, wargs in workloads:
        t_np = bench(getattr(numpy_impl, name), wargs, args.iters)
        t_nb = bench(getattr(numba_impl, name), wargs, args.iters)
        print(
            f"{label:<28} {t_np * 1e3:>10.3f}ms {t_nb * 1e3:>10.3f}ms "
            f"{t_np / t_nb:>8.1f}x"
        )
        # both paths must agree bit-for-bit
        a = getattr(numpy_impl, name)(*wargs)
        b = getattr(numba_impl, name)(*wargs)
        assert np.array_equal(a, b), f"backend mismatch in {name}"


if __name__ == "__main__":
    main()
