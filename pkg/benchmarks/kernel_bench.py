"""Timing comparison of the compiled and pure stepping kernels.

Runs each kernel on catalog-scale inputs under both backends and prints
the speedup.  Usage::

    python benchmarks/kernel_bench.py [--repeat N]
"""
from __future__ import annotations

import argparse
import time

from lblab import _kernels_py
from lblab.bench import get_benchmark
from lblab.model import _mask_for, _tables


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        if dt < best:
            best = dt
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions (default: 5)")
    args = parser.parse_args()

    try:
        from lblab import _kernels_cy as compiled
    except ImportError:
        print("compiled kernels are not built; run pip install -e . first")
        return 1

    bench = get_benchmark("irregular-sublinear")
    model = bench.model
    mu, iota, imax = _tables(model)
    _, mask = _mask_for(model, tuple(range(45, model.gamma, 45)))
    small = bench.variant(gamma=18)
    mu_s, iota_s, imax_s = _tables(small)

    cases = [
        (
            "scenario_total (gamma=600)",
            lambda k: k.scenario_total(mu, iota, imax, model.C, mask),
        ),
        (
            "scenario_trace (gamma=600)",
            lambda k: k.scenario_trace(mu, iota, imax, model.C, mask),
        ),
        (
            "criterion_run menon (gamma=600)",
            lambda k: k.criterion_run(mu, iota, imax, model.C, _kernels_py.KIND_MENON, 0.0, 0),
        ),
        (
            "criterion_run zhai (gamma=600)",
            lambda k: k.criterion_run(mu, iota, imax, model.C, _kernels_py.KIND_ZHAI, 0.0, 3),
        ),
        (
            "subset_totals (gamma=18, 131072 scenarios)",
            lambda k: k.subset_totals(mu_s, iota_s, imax_s, small.C),
        ),
    ]

    print(f"{'kernel':<44} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for name, call in cases:
        t_pure = _time(lambda: call(_kernels_py), args.repeat)
        t_comp = _time(lambda: call(compiled), args.repeat)
        print(f"{name:<44} {t_pure * 1e3:>8.2f}ms {t_comp * 1e3:>8.2f}ms {t_pure / t_comp:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
