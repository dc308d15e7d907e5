"""Compare the compiled and pure-Python kernels.

Usage: ``python benchmarks/bench_kernels.py [--repeat 3]``.  Each row times
one kernel call per backend and checks that both backends agree.
"""

import argparse
import timeit

import numpy as np

from multiwalk import _backend
from multiwalk.fock import SparseModeMap, create, random_unitary
from multiwalk.graph import build_line
from multiwalk.walk import coin_preset, symmetric_walkers


def permanent_cases(rng):
    for n in (6, 8, 10):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        yield f"permanent n={n}", (lambda mod, a=a: mod.permanent(a))


def apply_cases(rng):
    # a Hadamard-coin round on a line, then a dense unitary on a small mode set
    g = build_line(101)
    state = symmetric_walkers(g, [48, 50, 52])
    coins = coin_preset(g, "hadamard")
    step = np.zeros((g.mode_count, g.mode_count))
    step[g.step_permutation, np.arange(g.mode_count)] = 1
    yield "apply_linear line V=101 n=3", _apply(state, step @ coins.block_diagonal(g))
    M = 8
    dense = create([0, 1, 2], M)
    u = random_unitary(M, rng)
    warm = _backend.apply_linear(dense.terms, *_csc(u), 1e-14)
    yield "apply_linear dense M=8 n=3", (lambda mod: mod.apply_linear(warm, *_csc(u), 1e-14))


def _csc(u):
    m = SparseModeMap([[(r, complex(u[r, c])) for r in range(len(u)) if u[r, c] != 0] for c in range(len(u))])
    return m.indptr, m.indices, m.data


def _apply(state, u):
    args = _csc(u)
    return lambda mod: mod.apply_linear(state.terms, *args, 1e-14)


def _agree(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(abs(a[k] - b[k]) <= 1e-10 for k in a)
    return abs(a - b) <= 1e-8 * max(1.0, abs(a))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = {name: _backend.load(name) for name in _backend.available()}
    rng = np.random.default_rng(0)
    header = f"{'case':32s}" + "".join(f"{name:>12s}" for name in backends) + ("     speedup" if len(backends) > 1 else "")
    print(header)
    for label, fn in [*permanent_cases(rng), *apply_cases(rng)]:
        results = {name: fn(mod) for name, mod in backends.items()}
        first = next(iter(results.values()))
        if not all(_agree(first, r) for r in results.values()):
            raise SystemExit(f"backends disagree on {label}")
        times = {
            name: min(timeit.repeat(lambda mod=mod: fn(mod), number=1, repeat=args.repeat)) for name, mod in backends.items()
        }
        row = f"{label:32s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times.values())
        if len(times) > 1:
            row += f"{times['python'] / times['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
