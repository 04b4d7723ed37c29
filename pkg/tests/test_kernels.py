"""Compiled and numpy kernels must agree."""
import numpy as np
import pytest

from l4sparsify import _kernels
from l4sparsify._accel import HAVE_NUMBA, numba_enabled
from l4sparsify.matkit import dft_matrix, random_unitary

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_round_robin_covers_each_pair_once(n):
    sched = _kernels.round_robin(n)
    seen = set()
    for rnd in sched:
        used = set()
        for p, q in rnd:
            if p < 0:
                continue
            assert not {p, q} & used
            used |= {p, q}
            seen.add((min(p, q), max(p, q)))
    assert seen == {(p, q) for p in range(n) for q in range(p + 1, n)}


def test_jacobi_backends_agree(rng):
    m = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    out = []
    for flag in (False, True):
        w, v = m.copy(), np.eye(9, dtype=complex)
        _kernels.jacobi_orthogonalize(w, v, 1e-14, 60, use_numba=flag)
        out.append(np.sort(np.linalg.norm(w, axis=0)))
        assert np.allclose(w @ v.conj().T, m, atol=1e-12)
    assert np.allclose(out[0], out[1], rtol=1e-12)


def test_analytic_rows_backends_agree(rng):
    a = random_unitary(7, rng)
    assert np.allclose(_kernels.analytic_l1_rows(a, False), _kernels.analytic_l1_rows(a, True), rtol=1e-12)


@pytest.mark.parametrize("b,i,k", [(3, 2, 0), (8, 5, 1), (16, 15, 13)])
def test_dct_quadsum_backends_agree(b, i, k):
    assert _kernels.dct_quadsum(b, i, k, False) == pytest.approx(_kernels.dct_quadsum(b, i, k, True), rel=1e-11, abs=1e-12)


def test_pair_moments_backends_agree(rng):
    xi, xk = (rng.standard_normal(500) + 1j * rng.standard_normal(500) for _ in range(2))
    w = rng.uniform(size=500)
    a = _kernels.pair_moments(xi, xk, w, False)
    b = _kernels.pair_moments(xi, xk, w, True)
    assert np.allclose(a, b, rtol=1e-12)
    # direct definitions
    assert a[2] == pytest.approx(np.sum(w * np.abs(xi * xk) ** 2))
    assert a[3] == pytest.approx(np.sum(w * (xi * xk.conj()) ** 2))


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("L4SPARSIFY_NUMBA", "0")
    assert not numba_enabled()
    monkeypatch.setenv("L4SPARSIFY_NUMBA", "1")
    assert numba_enabled()


def test_dispatch_default_follows_flag(monkeypatch):
    f = dft_matrix(6)
    monkeypatch.setenv("L4SPARSIFY_NUMBA", "off")
    a = _kernels.analytic_l1_rows(f)
    monkeypatch.setenv("L4SPARSIFY_NUMBA", "on")
    assert np.allclose(a, _kernels.analytic_l1_rows(f), rtol=1e-12)
