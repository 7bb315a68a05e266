"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_backends.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from superselect import _backend, linops, verdicts
from superselect.algebra import CompositeSpace
from superselect.schemes import PAULI_X, PAULI_Z


def _qubit_search(constrained):
    r = 1 / np.sqrt(2)
    space = CompositeSpace(2, 4)
    states = [np.array([1.0, 0.0]), np.array([r, 1j * r])]
    return lambda: verdicts.constrained_search(space, PAULI_X, PAULI_Z, np.diag([1.0, -1, 1, -1]),
                                               np.eye(4)[0], states, budget=5000, restarts=20,
                                               constrained=constrained)


def cases():
    rng = np.random.default_rng(0)
    h8 = linops.random_hermitian(8, rng)
    h16 = linops.random_hermitian(16, rng)
    return [
        ("eigh 8x8", lambda: _backend.eigh(h8), 2000),
        ("eigh 16x16", lambda: _backend.eigh(h16), 1000),
        ("jacobi_eigh 8x8", lambda: _backend.jacobi_eigh(h8), 1000),
        ("jacobi_eigh 16x16", lambda: _backend.jacobi_eigh(h16), 200),
        ("expi 16x16", lambda: _backend.expi(h16, 0.7), 1000),
        ("search constrained (20x5000)", _qubit_search(True), 1),
        ("search unconstrained (20x5000)", _qubit_search(False), 1),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    names = _backend.available()
    print(f"{'case':<32}" + "".join(f"{n:>14}" for n in names) + ("      speedup" if len(names) > 1 else ""))
    for label, fn, number in cases():
        times = []
        for name in names:
            previous = _backend.use(name)
            try:
                best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            finally:
                _backend.use(previous)
            times.append(best)
        row = f"{label:<32}" + "".join(f"{t * 1e6:>12.1f}us" for t in times)
        if len(times) > 1:
            row += f"{times[1] / times[0]:>12.1f}x"
        print(row)


if __name__ == "__main__":
    main()
