"""Time the numba and numpy contraction kernels on the same coupling chunks.

    python benchmarks/bench_kernels.py [--points 65536] [--repeat 5]

Set REPLICALC_DISABLE_NUMBA=1 to run the numpy column only.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from replicalc import Polynomial, big_delta, big_delta_power
from replicalc.numerics import _kernels
from replicalc.numerics.evaluate import compile_polynomial
from replicalc.numerics.model import KernelMode, pair_signs
from replicalc.operators import DiagonalMode

CASES = [
    ("(1,2)", 3, lambda g: g),
    ("Delta (1,2)", 3, lambda g: big_delta(g, DiagonalMode.KERNEL)),
    ("Delta^2 (1,2)", 3, lambda g: big_delta_power(g, 2, DiagonalMode.KERNEL)),
    ("Delta^2 (1,2)", 4, lambda g: big_delta_power(g, 2, DiagonalMode.KERNEL)),
]


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=1 << 16)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"backend available: {_kernels.backend()}   points per call: {args.points}")
    print(f"{'case':<16}{'N':>3}{'terms':>7}{'numpy ms':>11}{'numba ms':>11}{'speedup':>9}{'max diff':>11}")
    for label, n, build in CASES:
        poly = build(Polynomial.parse("(1,2)"))
        prog = compile_polynomial(poly, n, KernelMode.EXACT)
        signs = pair_signs(n)
        g = 0.3 * rng.standard_normal((args.points, signs.shape[1]))

        ref, _ = _kernels.component_values(g, signs, prog, use_numba=False)
        t_np = best_of(lambda: _kernels.component_values(g, signs, prog, use_numba=False), args.repeat)
        if _kernels.HAVE_NUMBA:
            _kernels.component_values(g[:8], signs, prog, use_numba=True)  # compile
            got, _ = _kernels.component_values(g, signs, prog, use_numba=True)
            t_nb = best_of(lambda: _kernels.component_values(g, signs, prog, use_numba=True), args.repeat)
            diff = float(np.max(np.abs(prog.combine(got) - prog.combine(ref))))
            print(f"{label:<16}{n:>3}{len(poly):>7}{t_np * 1e3:>11.1f}{t_nb * 1e3:>11.1f}"
                  f"{t_np / t_nb:>8.1f}x{diff:>11.1e}")
        else:
            print(f"{label:<16}{n:>3}{len(poly):>7}{t_np * 1e3:>11.1f}{'-':>11}{'-':>9}{'-':>11}")


if __name__ == "__main__":
    main()
