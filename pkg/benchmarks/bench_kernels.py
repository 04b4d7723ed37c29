"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once per backend to warm up (JIT compile), then the best of
``--repeat`` runs is reported along with the max difference between backends.
"""
import argparse
import time

import numpy as np

from l4sparsify import _kernels as K
from l4sparsify.matkit import random_unitary


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def _jacobi(m, use_numba):
    w = np.array(m, order="C")
    v = np.eye(m.shape[1], dtype=np.complex128)
    K.jacobi_orthogonalize(w, v, 1e-15, 60, use_numba=use_numba)
    return np.sort(np.linalg.norm(w, axis=0))


def cases():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    a = random_unitary(64, rng)
    xi, xk = rng.standard_normal((2, 10**6)) + 1j * rng.standard_normal((2, 10**6))
    w = np.full(10**6, 1e-6)
    return [
        ("jacobi 64x64", lambda nb: _jacobi(m, nb)),
        ("analytic_l1_rows B=64", lambda nb: K.analytic_l1_rows(a, use_numba=nb)),
        ("dct_quadsum B=32", lambda nb: np.array([K.dct_quadsum(32, i, 0, use_numba=nb) for i in range(1, 32)])),
        ("pair_moments S=1e6", lambda nb: np.array(K.pair_moments(xi, xk, w, use_numba=nb))),
    ]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    print(f"{'kernel':<24}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, fn in cases():
        t_nb, out_nb = _best(lambda: fn(True), args.repeat)
        t_np, out_np = _best(lambda: fn(False), args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_nb) - np.asarray(out_np))))
        print(f"{name:<24}{1e3 * t_nb:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_nb:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
