#!/usr/bin/env python3
"""Benchmark the native (Cython) kernels against the numpy fallback.

Times both weight samplers across asset counts for each available backend
and prints a table with the native speedup.  Run from the repo root after
an editable install:

    python3 benchmarks/bench_kernels.py [--B 50000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import bayport._kernels as kernels
from bayport import (DiffusePrior, PortfolioContext, ReturnsWindow, RngStream,
                     posterior_params, sample_weights_basic,
                     sample_weights_fast)
from bayport._kernels import available_backends, get_backend


def _window(k: int, n: int, seed: int) -> ReturnsWindow:
    gen = np.random.Generator(np.random.PCG64(seed))
    mu = 0.002 + 0.001 * np.arange(k) / max(k - 1, 1)
    root = 0.02 * (np.eye(k) + 0.1 * gen.standard_normal((k, k)) / np.sqrt(k))
    returns = mu + gen.standard_normal((n, k)) @ root.T
    dates = tuple(f"d{i:04d}" for i in range(n))
    assets = tuple(f"A{i:02d}" for i in range(k))
    return ReturnsWindow(assets=assets, dates=dates, returns=returns)


def _time_one(sampler, post, ctx, b: int, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        sampler(post, ctx, b, rng=RngStream(99))
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--B", type=int, default=50_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}   B={args.B}")
    header = f"{'sampler':<8} {'k':>3}"
    for name in backends:
        header += f" {name + ' (s)':>12}"
    if len(backends) > 1:
        header += f" {'speedup':>8}"
    print(header)

    saved = (kernels.basic_weight_draws, kernels.fast_weight_draws)
    try:
        for k in (2, 5, 10):
            window = _window(k, 120, seed=k)
            post = posterior_params(window, DiffusePrior())
            ctx = PortfolioContext(gamma=2.0, wealth=1.0, t=0, horizon=1,
                                   rf_schedule=np.array([0.0005]))
            for label, sampler in (("fast", sample_weights_fast),
                                   ("basic", sample_weights_basic)):
                times = []
                reference = None
                for name in backends:
                    kernels.basic_weight_draws, kernels.fast_weight_draws = \
                        get_backend(name)
                    check = sampler(post, ctx, 2000, rng=RngStream(7)).draws
                    if reference is None:
                        reference = check
                        tolerance = 1e-6 * np.abs(check).max()
                    elif np.abs(check - reference).max() > tolerance:
                        # same variates, but the backends may factorize
                        # through different LAPACK drivers; anything past
                        # rounding noise is a real divergence
                        raise SystemExit(f"backend {name!r} draws diverge "
                                         f"for {label} sampler at k={k}")
                    times.append(_time_one(sampler, post, ctx, args.B,
                                           args.repeat))
                row = f"{label:<8} {k:>3}"
                for elapsed in times:
                    row += f" {elapsed:>12.3f}"
                if len(times) > 1:
                    row += f" {times[1] / times[0]:>7.2f}x"
                print(row)
    finally:
        kernels.basic_weight_draws, kernels.fast_weight_draws = saved


if __name__ == "__main__":
    main()
