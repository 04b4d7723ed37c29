"""Dense complex linear algebra used by the learners.

Matrices are plain ``complex128`` numpy arrays. A "unitary matrix" is an
array whose defect ``||A^H A - I||_F`` is below :data:`UNITARY_TOL`; use
:func:`as_unitary` to validate one. Row/column indices are 0-based.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .errors import (
    DegenerateProjection,
    InvalidArguments,
    InvalidDimension,
    InvalidInput,
    NotUnitary,
)

UNITARY_TOL = 1e-10
# learners re-project once accumulated drift exceeds this
DRIFT_TOL = 1e-8
SVD_TOL = 1e-14
SVD_MAX_SWEEPS = 60
DEGENERATE_RATIO = 1e-12


def as_cmatrix(m):
    """Return ``m`` as a 2-D complex128 array with finite entries."""
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidDimension(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("matrix has non-finite entries")
    return arr


def unitarity_defect(a):
    a = np.asarray(a)
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[1])))


def as_unitary(a, tol=UNITARY_TOL):
    """Validate ``a`` as a square unitary matrix and return a read-only copy."""
    arr = as_cmatrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidDimension(f"unitary matrix must be square, got {arr.shape}")
    defect = unitarity_defect(arr)
    if defect > tol:
        raise NotUnitary(f"unitarity defect {defect:.3e} exceeds {tol:.1e}")
    out = arr.copy()
    out.setflags(write=False)
    return out


def _check_dim(n):
    if int(n) != n or n < 1:
        raise InvalidDimension(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def dft_matrix(n):
    """Unitary DFT matrix, entry (i, k) = exp(-2j pi i k / n) / sqrt(n)."""
    n = _check_dim(n)
    idx = np.arange(n)
    # reduce the exponent mod n before scaling to keep large products exact
    expo = np.outer(idx, idx) % n
    return np.exp(-2j * np.pi * expo / n) / np.sqrt(n)


def dct2_matrix(n):
    """Orthonormal DCT-II matrix (real entries, complex dtype)."""
    n = _check_dim(n)
    k = np.arange(n)[:, None]
    t = np.arange(n)[None, :] + 0.5
    c = np.sqrt(2.0 / n) * np.cos(np.pi / n * t * k)
    c[0] /= np.sqrt(2.0)
    return c.astype(np.complex128)


def l4_norm4(m):
    """Sum of |entry|^4."""
    m = np.asarray(m)
    p = m.real**2 + m.imag**2
    return float(np.sum(p * p))


def svd(m, tol=SVD_TOL, max_sweeps=SVD_MAX_SWEEPS):
    """Singular value decomposition by one-sided (Hestenes) Jacobi.

    Returns ``(u, sigma, v)`` with ``m = u @ diag(sigma) @ v.conj().T`` and
    ``sigma`` non-increasing. For a rectangular input the thin factors are
    returned (``min(rows, cols)`` columns).
    """
    m = as_cmatrix(m)
    rows, cols = m.shape
    if rows < cols:
        u, s, v = svd(m.conj().T, tol=tol, max_sweeps=max_sweeps)
        return v, s, u
    w = np.array(m, dtype=np.complex128, order="C", copy=True)
    v = np.eye(cols, dtype=np.complex128)
    _kernels.jacobi_orthogonalize(w, v, tol, max_sweeps)
    sigma = np.sqrt(np.sum(w.real**2 + w.imag**2, axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma, w, v = sigma[order], w[:, order], v[:, order]
    cutoff = sigma[0] * rows * np.finfo(float).eps if sigma[0] > 0 else 0.0
    good = sigma > cutoff
    u = np.zeros_like(w)
    u[:, good] = w[:, good] / sigma[good]
    r = int(good.sum())
    if r < cols:
        q, _ = np.linalg.qr(u[:, :r], mode="complete") if r else (np.eye(rows), None)
        u[:, r:] = q[:, r:cols]
    return u, sigma, v


def project_unitary(m):
    """Closest unitary matrix in Frobenius norm, ``U V^H`` from the SVD."""
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise InvalidDimension(f"projection needs a square matrix, got {m.shape}")
    u, s, v = svd(m)
    if s[0] == 0.0 or s[-1] < DEGENERATE_RATIO * s[0]:
        raise DegenerateProjection(
            f"sigma_min/sigma_max = {s[-1] / s[0] if s[0] else 0.0:.3e} below {DEGENERATE_RATIO:.0e}"
        )
    return u @ v.conj().T


def renormalize(a):
    """Re-project ``a`` onto the unitary group to remove rounding drift."""
    return project_unitary(a)


def maybe_renormalize(a, tol=DRIFT_TOL):
    return project_unitary(a) if unitarity_defect(a) > tol else a


@dataclass(frozen=True)
class GivensRotation:
    """Real rotation in the (i, k) plane, ``i > k``."""

    i: int
    k: int
    alpha: float

    def __post_init__(self):
        if not (0 <= self.k < self.i):
            raise InvalidArguments(f"need 0 <= k < i, got i={self.i}, k={self.k}")
        if not np.isfinite(self.alpha):
            raise InvalidArguments("rotation angle must be finite")

    def matrix(self, n):
        if self.i >= n:
            raise InvalidArguments(f"index {self.i} out of range for n={n}")
        g = np.eye(n, dtype=np.complex128)
        c, s = np.cos(self.alpha), np.sin(self.alpha)
        g[self.i, self.i] = g[self.k, self.k] = c
        g[self.i, self.k] = s
        g[self.k, self.i] = -s
        return g


@dataclass(frozen=True)
class PhaseShift:
    k: int
    beta: float

    def __post_init__(self):
        if self.k < 0:
            raise InvalidArguments(f"negative index {self.k}")

    def matrix(self, n):
        if self.k >= n:
            raise InvalidArguments(f"index {self.k} out of range for n={n}")
        r = np.eye(n, dtype=np.complex128)
        r[self.k, self.k] = np.exp(1j * self.beta)
        return r


def apply_update(a, g, bi, bk):
    """Return ``G(i,k,alpha) R(i,beta_i) R(k,beta_k) a``.

    Only rows ``i`` and ``k`` change, so this costs O(N).
    """
    if bi.k != g.i or bk.k != g.k:
        raise InvalidArguments(
            f"phase indices ({bi.k}, {bk.k}) do not match rotation ({g.i}, {g.k})"
        )
    a = np.asarray(a, dtype=np.complex128)
    if g.i >= a.shape[0]:
        raise InvalidArguments(f"index {g.i} out of range for {a.shape[0]} rows")
    out = a.copy()
    c, s = np.cos(g.alpha), np.sin(g.alpha)
    ri = np.exp(1j * bi.beta) * a[g.i]
    rk = np.exp(1j * bk.beta) * a[g.k]
    out[g.k] = c * rk - s * ri
    out[g.i] = s * rk + c * ri
    return out


@dataclass(frozen=True)
class CpProjection:
    """Column-wise nearest complex permutation.

    ``perm[k]`` is the row holding column k's non-zero, ``phases[k]`` its angle.
    """

    perm: np.ndarray
    phases: np.ndarray
    distance_sq: float

    @property
    def is_permutation(self):
        return len(set(self.perm.tolist())) == len(self.perm)

    def matrix(self):
        n = len(self.perm)
        p = np.zeros((n, n), dtype=np.complex128)
        p[self.perm, np.arange(n)] = np.exp(1j * self.phases)
        return p


def nearest_cp(w):
    """Project each column onto its largest-modulus coordinate.

    Ties go to the lowest row index. When ``||w||_4^4 / N >= 1 - eps`` with
    ``eps < (1 - 1/sqrt 2) / N`` the rows are distinct and the result is a
    genuine complex permutation; outside that range ``perm`` may repeat.
    """
    w = as_cmatrix(w)
    perm = np.argmax(np.abs(w), axis=0)
    cols = np.arange(w.shape[1])
    phases = np.angle(w[perm, cols])
    p = np.zeros_like(w)
    p[perm, cols] = np.exp(1j * phases)
    d = w - p
    return CpProjection(perm=perm, phases=phases, distance_sq=float(np.sum(d.real**2 + d.imag**2)))


def random_unitary(n, rng):
    """Haar-distributed unitary matrix."""
    n = _check_dim(n)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def random_cp(n, rng):
    """Uniformly random complex permutation matrix."""
    n = _check_dim(n)
    p = np.zeros((n, n), dtype=np.complex128)
    p[rng.permutation(n), np.arange(n)] = np.exp(1j * rng.uniform(0.0, 2 * np.pi, n))
    return p


def random_tangent(a, rng):
    """Unit-Frobenius tangent direction ``a @ K`` with K skew-Hermitian."""
    n = a.shape[0]
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    k = (z - z.conj().T) / 2.0
    return k / np.linalg.norm(k)


def move_along(a, k, t):
    """Geodesic ``a @ expm(t K)``; stays exactly on the unitary group."""
    return np.asarray(a) @ expm(t * k)
