"""Time the compiled and pure-numpy ansatz kernels on the same inputs.

Run: python benchmarks/bench_kernels.py [--repeat 200]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from partrot import _kernels_py
from partrot.fit import Ansatz

try:
    from partrot import _kernels as _compiled
except ImportError:
    _compiled = None

CASES = [(2, 3), (3, 8), (3, 19)]


def _skeleton(k: int, m: int, rng: np.random.Generator) -> tuple[tuple[int, int], ...]:
    out: list[tuple[int, int]] = []
    while len(out) < m:
        a, b = (int(x) for x in rng.choice(k, 2, replace=False))
        if not out or out[-1] != (a, b):
            out.append((a, b))
    return tuple(out)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = [("python", _kernels_py)] + ([("cython", _compiled)] if _compiled is not None else [])
    if _compiled is None:
        print("compiled extension not importable; timing the python kernels only")
    print(f"{'qubits':>6} {'cnots':>5} {'backend':>8} {'unitary_ms':>11} {'jacobian_ms':>12}")
    for k, m in CASES:
        ans = Ansatz(k, _skeleton(k, m, rng))
        cx = ans.array()
        p = rng.uniform(-np.pi, np.pi, ans.num_params)
        for name, mod in backends:
            tu = timeit.timeit(lambda: mod.ansatz_unitary(k, cx, p), number=args.repeat) / args.repeat
            tj = timeit.timeit(lambda: mod.ansatz_jacobian(k, cx, p), number=args.repeat) / args.repeat
            print(f"{k:>6} {m:>5} {name:>8} {tu * 1e3:>11.4f} {tj * 1e3:>12.4f}")


if __name__ == "__main__":
    main()
