import numpy as np
import pytest
import scipy.fft
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from l4sparsify import matkit as mk
from l4sparsify.errors import DegenerateProjection, InvalidArguments, InvalidDimension, InvalidInput, NotUnitary


@pytest.mark.parametrize("n", [1, 2, 3, 8, 31])
def test_dft_is_unitary_with_expected_entries(n):
    f = mk.dft_matrix(n)
    assert mk.unitarity_defect(f) < 1e-12
    i, k = 1 % n, (n - 1) % n
    assert np.isclose(f[i, k], np.exp(-2j * np.pi * i * k / n) / np.sqrt(n))


@pytest.mark.parametrize("n", [2, 5, 16])
def test_dct_matches_scipy(n):
    ref = scipy.fft.dct(np.eye(n), type=2, norm="ortho", axis=0)
    assert np.allclose(mk.dct2_matrix(n).real, ref, atol=1e-14)
    assert mk.unitarity_defect(mk.dct2_matrix(n)) < 1e-12


def test_dimension_validation():
    with pytest.raises(InvalidDimension):
        mk.dft_matrix(0)
    with pytest.raises(InvalidDimension):
        mk.as_unitary(np.ones((2, 3)))
    with pytest.raises(InvalidInput):
        mk.as_cmatrix(np.array([[np.nan]]))
    with pytest.raises(NotUnitary):
        mk.as_unitary(2 * np.eye(3))


def test_as_unitary_is_read_only_copy():
    src = np.eye(3, dtype=complex)
    a = mk.as_unitary(src)
    src[0, 0] = 5
    assert a[0, 0] == 1
    with pytest.raises(ValueError):
        a[0, 0] = 2


@pytest.mark.parametrize("shape", [(1, 1), (4, 4), (7, 3), (3, 7), (32, 32)])
def test_svd_against_lapack(rng, shape):
    m = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    u, s, v = mk.svd(m)
    assert np.allclose(s, np.linalg.svd(m, compute_uv=False), rtol=1e-12, atol=1e-13)
    assert np.allclose(u * s @ v.conj().T, m, atol=1e-12)
    r = min(shape)
    assert np.allclose(u.conj().T @ u, np.eye(r), atol=1e-12)
    assert np.allclose(v.conj().T @ v, np.eye(r), atol=1e-12)


def test_svd_rank_deficient_completes_basis(rng):
    x = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    m = x @ x.conj().T[:2, :]  # 6 x 6? keep shape square but rank 2
    m = x @ (rng.standard_normal((2, 6)) + 0j)
    u, s, v = mk.svd(m)
    assert np.all(s[2:] < 1e-12 * s[0])
    assert mk.unitarity_defect(u) < 1e-12
    assert np.allclose(u * s @ v.conj().T, m, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**31))
def test_svd_reconstructs_random_matrices(n, seed):
    r = np.random.default_rng(seed)
    m = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    u, s, v = mk.svd(m)
    assert np.all(np.diff(s) <= 0)
    assert np.linalg.norm(u * s @ v.conj().T - m) <= 1e-12 * np.linalg.norm(m)


def test_project_unitary_matches_polar(rng):
    m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    q, _ = scipy.linalg.polar(m)
    assert np.allclose(mk.project_unitary(m), q, atol=1e-12)


def test_project_unitary_degenerate():
    with pytest.raises(DegenerateProjection):
        mk.project_unitary(np.zeros((3, 3)))
    with pytest.raises(DegenerateProjection):
        mk.project_unitary(np.diag([1.0, 1.0, 0.0]))


def test_givens_convention():
    g = mk.GivensRotation(1, 0, np.pi / 2).matrix(2)
    # G[i,i]=G[k,k]=cos, G[i,k]=sin, G[k,i]=-sin
    assert np.allclose(g, [[0, -1], [1, 0]])
    with pytest.raises(InvalidArguments):
        mk.GivensRotation(0, 1, 0.1)
    with pytest.raises(InvalidArguments):
        mk.GivensRotation(1, 1, 0.1)


def test_apply_update_equals_matrix_product(rng):
    a = mk.random_unitary(5, rng)
    g, bi, bk = mk.GivensRotation(3, 1, 0.37), mk.PhaseShift(3, 1.1), mk.PhaseShift(1, -0.4)
    ref = g.matrix(5) @ bi.matrix(5) @ bk.matrix(5) @ a
    out = mk.apply_update(a, g, bi, bk)
    assert np.allclose(out, ref, atol=1e-14)
    assert mk.unitarity_defect(out) < 1e-12
    with pytest.raises(InvalidArguments):
        mk.apply_update(a, g, mk.PhaseShift(2, 0.0), bk)


def test_nearest_cp_two_point_dft():
    cp = mk.nearest_cp(mk.dft_matrix(2))
    assert cp.distance_sq == pytest.approx(4 - 2 * np.sqrt(2), abs=1e-14)
    # all moduli tie; the lowest row wins, so both columns pick row 0
    assert list(cp.perm) == [0, 0]
    assert not cp.is_permutation


def test_nearest_cp_of_cp_is_exact(rng):
    p = mk.random_cp(6, rng)
    cp = mk.nearest_cp(p)
    assert cp.is_permutation
    assert cp.distance_sq < 1e-28
    assert np.allclose(cp.matrix(), p)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_l4_bounds_on_unitary_group(rng, n):
    for _ in range(50):
        v = mk.l4_norm4(mk.random_unitary(n, rng))
        assert 1 - 1e-9 <= v <= n + 1e-9
    assert mk.l4_norm4(mk.dft_matrix(n)) == pytest.approx(1.0, abs=1e-12)
    assert mk.l4_norm4(mk.random_cp(n, rng)) == pytest.approx(n, abs=1e-12)


def test_geodesic_stays_unitary(rng):
    a = mk.random_unitary(5, rng)
    k = mk.random_tangent(a, rng)
    assert np.allclose(k, -k.conj().T)
    assert np.linalg.norm(k) == pytest.approx(1.0)
    b = mk.move_along(a, k, 0.3)
    assert mk.unitarity_defect(b) < 1e-12


def test_maybe_renormalize_only_when_drifted(rng):
    a = mk.random_unitary(4, rng)
    assert mk.maybe_renormalize(a) is a
    drifted = a * (1 + 1e-6)
    fixed = mk.maybe_renormalize(drifted)
    assert mk.unitarity_defect(fixed) < 1e-12
