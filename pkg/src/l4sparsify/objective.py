"""l4 sparsity objectives, their gradients and coordinate-ascent derivatives.

Every objective is an expectation of ``||A y||_4^4``. :class:`ObjectiveSpec`
hides where the expectation comes from:

* ``dataset``: plain sum over the columns of a sample matrix,
* ``monte_carlo``: mean over ``n_draws`` fixed draws of a generative model,
* ``analytic_l1``: exact mean for the single-path model. All quantities used
  here are trigonometric polynomials in Omega of degree below ``2b``, so the
  mean over ``4b`` equispaced angles is exact.

Each spec reduces to weighted samples ``(Y, w)``; sums over samples use
numpy's pairwise summation in index order, which keeps results bit-stable.

Gradients are with respect to ``conj(A)`` (Wirtinger convention):
``grad = sum_m w_m 2 (|x_m|^2 * x_m) y_m^H`` with ``x_m = A y_m``.
"""
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import InvalidArguments
from .matkit import dct2_matrix
from .models import MultipathModel, SampleSet, SinusoidModel, sample_multipath, sample_sinusoid

DEFAULT_MC_DRAWS = 10**5


def _as_samples(y):
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise InvalidArguments(f"samples must be a matrix, got shape {y.shape}")
    return y


def _check_dims(a, y):
    if a.ndim != 2 or a.shape[1] != y.shape[0]:
        raise InvalidArguments(f"transform {a.shape} does not act on samples of length {y.shape[0]}")


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    kind: str
    samples: SampleSet = None
    model: object = None
    n_draws: int = 0
    b: int = 0
    c_mag: float = 1.0

    @classmethod
    def dataset(cls, y):
        return cls(kind="dataset", samples=y if isinstance(y, SampleSet) else SampleSet(_as_samples(y)))

    @classmethod
    def pure(cls, n):
        """``||A||_4^4``, i.e. the dataset objective with ``Y = I``."""
        return cls.dataset(np.eye(n, dtype=np.complex128))

    @classmethod
    def monte_carlo(cls, model, n_draws=DEFAULT_MC_DRAWS, seed=None):
        if n_draws < 1:
            raise InvalidArguments("n_draws must be >= 1")
        if not isinstance(model, (MultipathModel, SinusoidModel)):
            raise InvalidArguments(f"unsupported model {type(model).__name__}")
        if seed is not None:
            model = replace(model, seed=seed)
        return cls(kind="monte_carlo", model=model, n_draws=int(n_draws))

    @classmethod
    def analytic_l1(cls, b, c_mag=1.0):
        if b < 1:
            raise InvalidArguments("b must be >= 1")
        return cls(kind="analytic_l1", b=int(b), c_mag=float(c_mag))

    @property
    def dim(self):
        if self.kind == "dataset":
            return self.samples.dim
        if self.kind == "monte_carlo":
            return self.model.b
        return self.b

    @cached_property
    def weighted_samples(self):
        """``(Y, w)`` such that the objective is ``sum_m w_m ||A y_m||_4^4``."""
        if self.kind == "dataset":
            y = self.samples.y
            return y, np.ones(y.shape[1])
        if self.kind == "monte_carlo":
            if isinstance(self.model, MultipathModel):
                y = sample_multipath(self.model, self.n_draws).y
            else:
                y = sample_sinusoid(self.model, self.n_draws).y
            return y, np.full(self.n_draws, 1.0 / self.n_draws)
        grid = 4 * self.b
        omega = 2 * np.pi * np.arange(grid) / grid
        y = self.c_mag * np.exp(1j * np.outer(np.arange(self.b), omega))
        return y, np.full(grid, 1.0 / grid)

    def describe(self):
        out = {"kind": self.kind, "dim": self.dim}
        if self.kind == "dataset":
            out["count"] = self.samples.count
        elif self.kind == "monte_carlo":
            out.update(model=type(self.model).__name__, n_draws=self.n_draws, seed=self.model.seed)
            if isinstance(self.model, MultipathModel):
                out["gains"] = [[g.real, g.imag] for g in self.model.gains]
        else:
            out["c_mag"] = self.c_mag
        return out


def _l4_columns(x):
    p = x.real**2 + x.imag**2
    return np.sum(p * p, axis=0)


def g_det(a, y):
    """``||A Y||_4^4`` summed over the columns of ``Y``."""
    a = np.asarray(a, dtype=np.complex128)
    y = _as_samples(y)
    _check_dims(a, y)
    return float(np.sum(_l4_columns(a @ y)))


class MCEstimate(NamedTuple):
    mean: float
    stderr: float  # nan for a single draw


def g_mc(a, spec):
    """Sample mean of ``||A y||_4^4`` over the spec's fixed draws."""
    if spec.kind != "monte_carlo":
        raise InvalidArguments(f"g_mc needs a monte_carlo spec, got {spec.kind}")
    y, _ = spec.weighted_samples
    a = np.asarray(a, dtype=np.complex128)
    _check_dims(a, y)
    vals = _l4_columns(a @ y)
    if vals.size < 2:
        return MCEstimate(float(vals.mean()), float("nan"))
    return MCEstimate(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size)))


def g_analytic_l1_rows(a, c_mag=1.0):
    """Per-row contributions of the exact single-path objective (complex;
    the imaginary parts are rounding residue)."""
    a = np.asarray(a, dtype=np.complex128)
    return c_mag**4 * _kernels.analytic_l1_rows(a)


def g_analytic_l1(a, b, c_mag=1.0):
    """Exact ``E ||A y||_4^4`` for ``y = c p(Omega)``, Omega uniform.

    Enumerates index quadruples with ``p - q + r - n = 0``, the only ones that
    survive averaging over Omega.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (b, b):
        raise InvalidArguments(f"transform shape {a.shape} does not match b={b}")
    rows = g_analytic_l1_rows(a, c_mag)
    total = rows.sum()
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"imaginary residual {total.imag:.3e} in analytic objective")
    return float(total.real)


def objective(a, spec):
    """Value of the spec's objective at ``a`` (sum for data, mean otherwise)."""
    y, w = spec.weighted_samples
    a = np.asarray(a, dtype=np.complex128)
    _check_dims(a, y)
    return float(np.dot(w, _l4_columns(a @ y)))


def grad_gdet(a, y):
    """``sum_m 2 (|A y_m|^2 * A y_m) y_m^H``."""
    a = np.asarray(a, dtype=np.complex128)
    y = _as_samples(y)
    _check_dims(a, y)
    x = a @ y
    return 2.0 * ((x.real**2 + x.imag**2) * x) @ y.conj().T


def gradient(a, spec):
    y, w = spec.weighted_samples
    a = np.asarray(a, dtype=np.complex128)
    _check_dims(a, y)
    x = a @ y
    return 2.0 * ((x.real**2 + x.imag**2) * x * w[None, :]) @ y.conj().T


@dataclass
class DerivativeReport:
    """First/second derivatives of the objective along every Givens curve
    ``alpha -> G(i, k, alpha) A`` at ``alpha = 0``."""

    b: int
    pairs: list = field(default_factory=list)  # (i, k, first, second)
    max_abs_first: float = 0.0
    max_second: float = 0.0

    def first_matrix(self):
        out = np.zeros((self.b, self.b))
        for i, k, f, _ in self.pairs:
            out[i, k] = f
        return out

    def second_matrix(self):
        out = np.zeros((self.b, self.b))
        for i, k, _, s in self.pairs:
            out[i, k] = s
        return out

    def to_dict(self):
        return {
            "b": self.b,
            "pairs": [[int(i), int(k), float(f), float(s)] for i, k, f, s in self.pairs],
            "max_abs_first": self.max_abs_first,
            "max_second": self.max_second,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def derivative_matrices(x, w):
    """First and second Givens derivatives for all pairs from transformed
    samples ``x = A Y`` with weights ``w``. Entry ``[i, k]`` is valid for i > k."""
    p = x.real**2 + x.imag**2
    xw = x * w[None, :]
    # E[|x_i|^2 x_i x_k*] and E[|x_k|^2 x_i x_k*]
    s1 = (p * xw) @ x.conj().T
    s2 = xw @ (p * x).conj().T
    first = 4.0 * np.real(s1 - s2)
    x2 = x * x
    t = (x2 * w[None, :]) @ x2.conj().T  # t[k, i] = E[x_k^2 conj(x_i)^2]
    pp = (p * w[None, :]) @ p.T
    p4 = np.diagonal(pp)
    second = 4.0 * (2.0 * np.real(t.T) + 4.0 * pp - p4[None, :] - p4[:, None])
    return first, second


def ca_derivatives(a, spec):
    y, w = spec.weighted_samples
    a = np.asarray(a, dtype=np.complex128)
    _check_dims(a, y)
    first, second = derivative_matrices(a @ y, w)
    n = a.shape[0]
    pairs = [(i, k, float(first[i, k]), float(second[i, k])) for k in range(n) for i in range(k + 1, n)]
    if not pairs:
        return DerivativeReport(b=n)
    return DerivativeReport(
        b=n,
        pairs=pairs,
        max_abs_first=max(abs(f) for _, _, f, _ in pairs),
        max_second=max(s for _, _, _, s in pairs),
    )


def d1_closed_form(b, i, k):
    """Second derivative at the DFT for the unit-gain single-path model:
    ``(8/b^2) (3 b csc^2(pi (i-k)/b) - (2 b^3 + 7 b)/3)``."""
    if b < 2:
        raise InvalidArguments("b must be >= 2")
    if i == k:
        raise InvalidArguments("need i != k")
    if not (0 <= k < b and 0 <= i < b):
        raise InvalidArguments(f"indices ({i}, {k}) out of range for b={b}")
    csc2 = 1.0 / np.sin(np.pi * (i - k) / b) ** 2
    return 8.0 / b**2 * (3.0 * b * csc2 - (2.0 * b**3 + 7.0 * b) / 3.0)


def dct_first_derivative(b, i, k):
    """First Givens derivative at the DCT-II for the real sinusoid model.

    ``i > k`` are 0-based DCT rows, which coincide with the cosine
    frequencies. Evaluates the closed-form cosine sum restricted to
    ``p - q + r - n = 0`` (twice) and ``p - q - r + n = 0``; the prefactor is
    ``2 / (b^2 sqrt(1 + delta[k]))``.
    """
    if b < 2:
        raise InvalidArguments("b must be >= 2")
    if not (0 <= k < i < b):
        raise InvalidArguments(f"need 0 <= k < i < b, got i={i}, k={k}, b={b}")
    scale = 2.0 / (b * b * np.sqrt(2.0 if k == 0 else 1.0))
    return scale * _kernels.dct_quadsum(b, i, k)


def dct_first_derivative_quadrature(b, grid=512, block=32):
    """All first derivatives at the DCT-II by a ``grid x grid`` trapezoid rule
    over (Omega, Phi). Returns a ``b x b`` matrix, entry ``[i, k]`` for i > k.

    Independent of :func:`dct_first_derivative`; used as its oracle.
    """
    c = dct2_matrix(b).real
    ang = 2 * np.pi * np.arange(grid) / grid
    bidx = np.arange(b)
    acc = np.zeros((b, b))
    for lo in range(0, grid, block):
        om = ang[lo : lo + block]
        # y[b, omega, phi] = cos(omega * b + phi)
        y = np.cos(bidx[:, None, None] * om[None, :, None] + ang[None, None, :]).reshape(b, -1)
        x = c @ y
        acc += (x**3) @ x.T
    m3 = acc / (grid * grid)  # m3[i, k] = E[x_i^3 x_k]
    return 4.0 * (m3 - m3.T)
