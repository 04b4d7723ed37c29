import itertools
import json

import numpy as np
import pytest

from l4sparsify import matkit as mk
from l4sparsify import objective as ob
from l4sparsify.errors import InvalidArguments
from l4sparsify.models import MultipathModel, SinusoidModel


def _fd_gradient(a, y, h=1e-6):
    """Central differences on real and imaginary parts separately; returns
    ``dg/d conj(A) = (dg/dRe + j dg/dIm) / 2``."""
    out = np.zeros_like(a)
    for p, q in itertools.product(*map(range, a.shape)):
        e = np.zeros_like(a)
        e[p, q] = h
        d_re = (ob.g_det(a + e, y) - ob.g_det(a - e, y)) / (2 * h)
        d_im = (ob.g_det(a + 1j * e, y) - ob.g_det(a - 1j * e, y)) / (2 * h)
        out[p, q] = (d_re + 1j * d_im) / 2
    return out


def test_phase_and_permutation_invariance(rng):
    a = mk.random_unitary(5, rng)
    y = rng.standard_normal((5, 30)) + 1j * rng.standard_normal((5, 30))
    r = np.diag(np.exp(1j * rng.uniform(0, 6, 5)))
    p = mk.random_cp(5, rng)
    g = ob.g_det(a, y)
    assert ob.g_det(r @ a, y) == pytest.approx(g, rel=1e-13)
    assert ob.g_det(p @ a, y) == pytest.approx(g, rel=1e-13)


@pytest.mark.parametrize("n", [2, 4, 7])
def test_grad_gdet_matches_finite_differences(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    y = rng.standard_normal((n, 6)) + 1j * rng.standard_normal((n, 6))
    fd = _fd_gradient(a, y)
    g = ob.grad_gdet(a, y)
    assert np.linalg.norm(g - fd) <= 1e-6 * np.linalg.norm(g)


def test_gradient_dispatch_matches_dataset(rng):
    y = rng.standard_normal((4, 10)) + 1j * rng.standard_normal((4, 10))
    a = mk.random_unitary(4, rng)
    spec = ob.ObjectiveSpec.dataset(y)
    assert np.allclose(ob.gradient(a, spec), ob.grad_gdet(a, y))
    assert ob.objective(a, spec) == pytest.approx(ob.g_det(a, y))


def test_pure_objective_is_l4_of_matrix(rng):
    a = mk.random_unitary(5, rng)
    assert ob.objective(a, ob.ObjectiveSpec.pure(5)) == pytest.approx(mk.l4_norm4(a))


def _count_quadruples(b):
    return sum(1 for p, q, r, n in itertools.product(range(b), repeat=4) if p - q + r - n == 0)


@pytest.mark.parametrize("b", [2, 3, 4, 6])
def test_analytic_l1_at_dft_by_counting(b):
    # each DFT row contributes (number of index quadruples with p-q+r-n=0)/b^2
    per_row = _count_quadruples(b) / b**2
    rows = ob.g_analytic_l1_rows(mk.dft_matrix(b))
    assert np.allclose(rows.real, per_row, atol=1e-12)
    assert ob.g_analytic_l1(mk.dft_matrix(b), b) == pytest.approx(b * per_row, abs=1e-12)


def test_analytic_l1_two_point_values():
    rows = ob.g_analytic_l1_rows(mk.dft_matrix(2))
    assert np.allclose(rows, 1.5)
    assert ob.g_analytic_l1(mk.dft_matrix(2), 2) == pytest.approx(3.0)
    assert ob.g_analytic_l1(mk.dft_matrix(2), 2, c_mag=2.0) == pytest.approx(48.0)


def test_analytic_l1_rows_symmetric_at_dft():
    rows = ob.g_analytic_l1_rows(mk.dft_matrix(16))
    assert np.ptp(rows.real) <= 1e-12


def test_analytic_l1_equals_finer_grid(rng):
    # the 4B-point grid is exact; an 8B grid must give the same value
    b = 6
    a = mk.random_unitary(b, rng)
    om = 2 * np.pi * np.arange(8 * b) / (8 * b)
    y = np.exp(1j * np.outer(np.arange(b), om))
    assert ob.g_analytic_l1(a, b) == pytest.approx(ob.g_det(a, y) / y.shape[1], rel=1e-12)
    assert ob.objective(a, ob.ObjectiveSpec.analytic_l1(b)) == pytest.approx(ob.g_analytic_l1(a, b), rel=1e-12)


def test_monte_carlo_agrees_with_analytic(rng):
    b = 5
    a = mk.random_unitary(b, rng)
    spec = ob.ObjectiveSpec.monte_carlo(MultipathModel(b), n_draws=40000, seed=4)
    est = ob.g_mc(a, spec)
    assert abs(est.mean - ob.g_analytic_l1(a, b)) <= 5 * est.stderr


def test_mc_single_draw_has_nan_stderr():
    spec = ob.ObjectiveSpec.monte_carlo(MultipathModel(3), n_draws=1)
    assert np.isnan(ob.g_mc(np.eye(3), spec).stderr)


def test_spec_validation():
    with pytest.raises(InvalidArguments):
        ob.ObjectiveSpec.monte_carlo(MultipathModel(3), n_draws=0)
    with pytest.raises(InvalidArguments):
        ob.ObjectiveSpec.analytic_l1(0)
    with pytest.raises(InvalidArguments):
        ob.objective(np.eye(3), ob.ObjectiveSpec.analytic_l1(4))
    with pytest.raises(InvalidArguments):
        ob.g_mc(np.eye(3), ob.ObjectiveSpec.analytic_l1(3))


def _givens_curve(a, spec, i, k, h=1e-4):
    def g(alpha):
        return ob.objective(mk.GivensRotation(i, k, alpha).matrix(a.shape[0]) @ a, spec)

    first = (g(h) - g(-h)) / (2 * h)
    second = (g(h) - 2 * g(0.0) + g(-h)) / h**2
    return first, second


@pytest.mark.parametrize("trial", range(5))
def test_ca_derivatives_match_finite_differences(trial):
    r = np.random.default_rng(trial)
    n = 4 + trial % 3
    a = mk.random_unitary(n, r)
    spec = ob.ObjectiveSpec.dataset(r.standard_normal((n, 12)) + 1j * r.standard_normal((n, 12)))
    rep = ob.ca_derivatives(a, spec)
    for i, k, first, second in rep.pairs:
        f, s = _givens_curve(a, spec, i, k)
        assert first == pytest.approx(f, rel=1e-6, abs=1e-6)
        assert second == pytest.approx(s, rel=1e-4, abs=1e-4)


def test_derivative_report_json(rng):
    rep = ob.ca_derivatives(mk.dft_matrix(3), ob.ObjectiveSpec.analytic_l1(3))
    d = json.loads(rep.to_json())
    assert set(d) == {"b", "pairs", "max_abs_first", "max_second"}
    assert len(d["pairs"]) == 3
    assert rep.second_matrix()[2, 0] == pytest.approx(d["pairs"][1][3])


def test_d1_closed_form_values():
    assert ob.d1_closed_form(2, 1, 0) == pytest.approx(-8.0)
    assert ob.d1_closed_form(4, 3, 1) == pytest.approx(-20.0)
    for b in range(2, 65):
        for d in range(1, b):
            assert ob.d1_closed_form(b, d, 0) < 0
    with pytest.raises(InvalidArguments):
        ob.d1_closed_form(4, 1, 1)


@pytest.mark.parametrize("b", [2, 3, 5, 8, 16])
def test_second_derivatives_at_dft_equal_closed_form(b):
    rep = ob.ca_derivatives(mk.dft_matrix(b), ob.ObjectiveSpec.analytic_l1(b))
    assert rep.max_abs_first < 1e-12
    for i, k, _, s in rep.pairs:
        assert s == pytest.approx(ob.d1_closed_form(b, i, k), rel=1e-9)


def test_second_derivative_b2_matches_quadrature():
    # independent oracle: Givens curve of the exact objective on a fine grid
    om = 2 * np.pi * np.arange(1024) / 1024
    y = np.exp(1j * np.outer(np.arange(2), om))
    spec = ob.ObjectiveSpec.dataset(y / 1024 ** 0.25)
    _, s = _givens_curve(mk.dft_matrix(2), spec, 1, 0, h=1e-3)
    assert s == pytest.approx(-8.0, rel=1e-5)


@pytest.mark.parametrize("b", [2, 3, 4, 6, 9])
def test_dct_closed_form_matches_quadrature(b):
    q = ob.dct_first_derivative_quadrature(b, grid=256)
    for k in range(b):
        for i in range(k + 1, b):
            assert ob.dct_first_derivative(b, i, k) == pytest.approx(q[i, k], abs=1e-10)


def test_dct_quadrature_is_mc_consistent():
    # Monte-Carlo over the sinusoid model as a third route
    b = 4
    spec = ob.ObjectiveSpec.monte_carlo(SinusoidModel(b, seed=1), n_draws=200000)
    first = ob.ca_derivatives(mk.dct2_matrix(b), spec).first_matrix()
    assert first[3, 1] == pytest.approx(ob.dct_first_derivative(4, 3, 1), abs=0.02)


def test_dct_parity_zeros():
    for b in (4, 7):
        for k in range(b):
            for i in range(k + 1, b, 2):
                assert abs(ob.dct_first_derivative(b, i, k)) <= 1e-12
