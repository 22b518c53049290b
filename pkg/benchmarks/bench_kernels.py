"""Benchmark the compiled assignment kernels against the pure-Python fallback.

Run as: python3 benchmarks/bench_kernels.py
"""

import importlib
import time

import numpy as np

from playtree.kernels import _fallback


def _load_compiled():
    try:
        return importlib.import_module("playtree.kernels._assignment")
    except ImportError:
        return None


def bench_hungarian(mod, mats, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for a in mats:
            mod.hungarian(a)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_batch_align(mod, template, plays, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        mod.batch_align(template, plays, True)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    compiled = _load_compiled()
    if compiled is None:
        print("compiled extension unavailable; nothing to compare")
        return

    rng = np.random.default_rng(42)
    mats = [rng.uniform(0, 100, size=(5, 5)) for _ in range(2000)]
    template = rng.uniform(0, 94, size=(5, 100, 2))
    plays = rng.uniform(0, 94, size=(1000, 5, 100, 2))

    # both backends must agree exactly before timing means anything
    for a in mats[:200]:
        mc, tc, fc = compiled.hungarian(a)
        mp, tp, fp = _fallback.hungarian(a)
        assert np.array_equal(mc, mp) and tc == tp and bool(fc) == bool(fp)
    pc, cc, fc = compiled.batch_align(template, plays[:50], True)
    pp, cp, fp = _fallback.batch_align(template, plays[:50], True)
    # assignments match exactly; totals may differ in the last bits because
    # the two backends accumulate frame distances in different orders
    assert np.array_equal(pc, pp) and np.allclose(cc, cp, rtol=1e-9)
    print("backend agreement: ok")

    t_c = bench_hungarian(compiled, mats)
    t_p = bench_hungarian(_fallback, mats)
    print(f"hungarian 2000x 5x5:   compiled {t_c*1e3:8.1f} ms   "
          f"python {t_p*1e3:8.1f} ms   speedup {t_p/t_c:5.1f}x")

    t_c = bench_batch_align(compiled, template, plays)
    t_p = bench_batch_align(_fallback, template, plays)
    print(f"batch_align 1000x F=100: compiled {t_c*1e3:8.1f} ms   "
          f"python {t_p*1e3:8.1f} ms   speedup {t_p/t_c:5.1f}x")


if __name__ == "__main__":
    main()
