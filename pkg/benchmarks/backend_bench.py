"""Throughput benchmark: compiled kernel vs pure-numpy fallback.

Runs identical branching workloads through both backends and reports events
per second.  Invoke from the repository root:

    python benchmarks/backend_bench.py [--scaling N] [--t-max T]
"""
from __future__ import annotations

import argparse
import time

import numpy as np
from numpy.random import SFC64, SeedSequence

from superbm import _fallback
from superbm.errors import ParticleCapError

try:
    from superbm import _speedups
except ImportError:
    _speedups = None


def bench_backend(mod, name, scaling, t_max, orthant, repeats=3):
    rate = 2.0 * 0.5 * scaling
    p2 = 0.5 * (1.0 + 1.0 / rate)
    best = None
    events = 0
    for rep in range(repeats):
        bg = SFC64(SeedSequence([2024, rep]))
        if orthant:
            pos = np.full((scaling, 1), 1.0)
        else:
            pos = np.zeros((scaling, 1))
        t0 = time.perf_counter()
        try:
            if orthant:
                out, ev = mod.advance_orthant(
                    pos, 0.0, t_max, rate, p2, 1, 1e-3, bg, 50_000_000
                )
            else:
                out, ev = mod.advance_full(
                    pos, 0.0, t_max, rate, p2, bg, 50_000_000
                )
        except ParticleCapError as exc:
            print(f"{name}: {exc}")
            return None
        elapsed = time.perf_counter() - t0
        if best is None or elapsed < best[0]:
            best = (elapsed, ev, out.shape[0])
        events = ev
    elapsed, ev, n_out = best
    rate_ev = ev / elapsed if elapsed > 0 else float("inf")
    print(
        f"{name:>9}: {ev:>12,} events in {elapsed:7.2f}s "
        f"-> {rate_ev/1e6:7.2f} M events/s ({1e9*elapsed/max(ev,1):6.1f} ns/event), "
        f"{n_out:,} survivors"
    )
    return rate_ev


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scaling", type=int, default=1000)
    parser.add_argument("--t-max", type=float, default=3.0)
    args = parser.parse_args()

    for orthant, label in ((False, "full space"), (True, "orthant (1 absorbed)")):
        print(f"\n== {label}: N={args.scaling}, t_max={args.t_max} ==")
        rates = {}
        if _speedups is not None:
            rates["compiled"] = bench_backend(
                _speedups, "compiled", args.scaling, args.t_max, orthant
            )
        else:
            print(" compiled: extension not built")
        rates["python"] = bench_backend(
            _fallback, "python", args.scaling, args.t_max, orthant
        )
        if len(rates) == 2 and all(v for v in rates.values()):
            print(f"  speedup: {rates['compiled'] / rates['python']:.1f}x")


if __name__ == "__main__":
    main()
