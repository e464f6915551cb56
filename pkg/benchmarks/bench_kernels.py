"""Compare the compiled and numpy blade-product kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sites 4096]

Times ``product_table`` on full blade lists and ``field_product`` on random
fields for n = 1, 2, 3, checks that both backends agree, and prints one line
per case with the speed-up.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from levyleblond._core import backends


def _cases(sites: int, rng: np.random.Generator):
    for n in (1, 2, 3):
        full = np.arange(1 << (2 * n + 2), dtype=np.int64)
        spatial = np.array([b for b in full if not b & (1 | (1 << (2 * n + 1)))], dtype=np.int64)
        for label, xb, yb in (("full x full", full, full), ("spatial x spatial", spatial, spatial)):
            x = rng.normal(size=(sites, len(xb))) + 1j * rng.normal(size=(sites, len(xb)))
            y = rng.normal(size=(sites, len(yb))) + 1j * rng.normal(size=(sites, len(yb)))
            yield n, label, xb, x, yb, y


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sites", type=int, default=4096)
    args = ap.parse_args(argv)
    mods = backends()
    if "cython" not in mods:
        print("compiled kernels unavailable; only the numpy backend is installed")
    rng = np.random.default_rng(0)
    print(f"{'n':>2} {'case':<18} {'kernel':<14} " + " ".join(f"{k:>12}" for k in mods) + "   speed-up")
    for n, label, xb, x, yb, y in _cases(args.sites, rng):
        results = {}
        for name, mod in mods.items():
            t_tab = min(timeit.repeat(lambda: mod.product_table(xb, yb, n), number=1, repeat=args.repeat))
            t_fld = min(timeit.repeat(lambda: mod.field_product(xb, x, yb, y, n), number=1, repeat=args.repeat))
            results[name] = (t_tab, t_fld, mod.field_product(xb, x, yb, y, n))
        if len(results) == 2:
            (bp, op), (bc, oc) = results["python"][2], results["cython"][2]
            assert np.array_equal(bp, bc) and np.allclose(op, oc, rtol=1e-13, atol=1e-12), "backends disagree"
        for k, kernel in enumerate(("product_table", "field_product")):
            times = [results[m][k] for m in mods]
            speed = times[0] / times[-1] if len(times) == 2 else float("nan")
            print(f"{n:>2} {label:<18} {kernel:<14} " + " ".join(f"{t * 1e3:10.3f}ms" for t in times) + f"   {speed:8.1f}x")


if __name__ == "__main__":
    main()
