"""Learning unitary sparsifying transforms.

Two ascent methods on ``max_A E||A y||_4^4`` over the unitary group:

* MSP (matching, stretching, projection): ``A <- polar(grad)``, i.e. projected
  gradient ascent with an infinite step.
* CA (coordinate ascent): sweep over row pairs (i, k) and apply the best
  ``G(i, k, alpha) R(i, beta_i) R(k, beta_k)`` update, which keeps A unitary.

Plus the fixed-point and local-optimality checks for both.
"""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .errors import InvalidArguments
from .matkit import (
    GivensRotation,
    PhaseShift,
    apply_update,
    as_unitary,
    maybe_renormalize,
    project_unitary,
)
from .objective import ca_derivatives, gradient, objective

log = logging.getLogger(__name__)

TERMINATIONS = ("step_tol", "obj_tol", "max_iters", "fixed_point")


@dataclass
class LearnTrace:
    objective: list = field(default_factory=list)
    step_norm: list = field(default_factory=list)
    terminated_by: str = None
    sweep_gain: list = field(default_factory=list)  # CA only

    def to_dict(self):
        return {
            "objective": [float(v) for v in self.objective],
            "step_norm": [float(v) for v in self.step_norm],
            "terminated_by": self.terminated_by,
            "sweep_gain": [float(v) for v in self.sweep_gain],
        }


@dataclass
class MspConfig:
    init: np.ndarray
    max_iters: int = 500
    step_tol: float = 1e-10
    obj_tol: float = 1e-12

    def __post_init__(self):
        if self.max_iters < 1 or self.step_tol <= 0 or self.obj_tol <= 0:
            raise InvalidArguments("need max_iters >= 1 and positive tolerances")


@dataclass
class CaConfig:
    init: np.ndarray
    max_sweeps: int = 50
    sweep_order: str = "lexicographic"
    inner_tol: float = 1e-10
    # relative: a sweep gaining less than improvement_tol * max(1, |g|) stops
    improvement_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.sweep_order not in ("lexicographic", "seeded-random"):
            raise InvalidArguments(f"unknown sweep order {self.sweep_order!r}")
        if self.max_sweeps < 1 or self.inner_tol <= 0 or self.improvement_tol <= 0:
            raise InvalidArguments("need max_sweeps >= 1 and positive tolerances")


# ---------------------------------------------------------------------------
# MSP


def msp_step(a, grad):
    return project_unitary(grad)


def msp_pure_step(a):
    """One MSP iteration on ``||A||_4^4``: polar factor of ``|A|^2 * A``."""
    a = np.asarray(a, dtype=np.complex128)
    return project_unitary((a.real**2 + a.imag**2) * a)


def msp_run(cfg, spec):
    a = np.array(as_unitary(cfg.init))
    if a.shape[0] != spec.dim:
        raise InvalidArguments(f"init is {a.shape}, objective has dimension {spec.dim}")
    obj = objective(a, spec)
    trace = LearnTrace(objective=[obj])
    for t in range(cfg.max_iters):
        nxt = msp_step(a, gradient(a, spec))
        step = float(np.linalg.norm(nxt - a))
        new_obj = objective(nxt, spec)
        trace.objective.append(new_obj)
        trace.step_norm.append(step)
        a = nxt
        if step <= cfg.step_tol:
            trace.terminated_by = "fixed_point" if t == 0 else "step_tol"
            break
        if abs(new_obj - obj) <= cfg.obj_tol * max(1.0, abs(obj)):
            trace.terminated_by = "obj_tol"
            break
        obj = new_obj
    else:
        trace.terminated_by = "max_iters"
    return a, trace


# ---------------------------------------------------------------------------
# CA


class PairStep(NamedTuple):
    alpha: float
    beta_i: float
    beta_k: float
    gain: float


_THETA_GRID = 256


def _pair_gain(theta, m40, m04, m22, z2, z):
    # objective of the pair after G(alpha) and relative phase theta is
    #   S4 + (cos 4a - 1) A(theta) + sin 4a L(theta),
    # so the best alpha gives a gain of hypot(A, L) - A
    s4 = m40 + m04
    amp = s4 / 4.0 - m22 - np.real(z2 * np.exp(2j * theta)) / 2.0
    lin = np.real(z * np.exp(1j * theta))
    return np.hypot(amp, lin) - amp, amp, lin


def solve_pair(moments, tol=1e-10):
    """Best (alpha, relative phase) for one row pair given its moments.

    The objective depends on beta_i - beta_k only, so beta_k is fixed at 0.
    """
    grid = np.linspace(-np.pi, np.pi, _THETA_GRID, endpoint=False)
    g, _, _ = _pair_gain(grid, *moments)
    j = int(np.argmax(g))
    h = 2 * np.pi / _THETA_GRID
    res = minimize_scalar(
        lambda th: -_pair_gain(th, *moments)[0],
        bounds=(grid[j] - h, grid[j] + h),
        method="bounded",
        options={"xatol": 1e-13},
    )
    theta = float(res.x) if -res.fun >= g[j] else float(grid[j])
    gain, amp, lin = _pair_gain(theta, *moments)
    gain = float(gain)
    if gain <= tol:
        return PairStep(0.0, 0.0, 0.0, max(gain, 0.0))
    theta = (theta + np.pi) % (2 * np.pi) - np.pi
    return PairStep(float(np.arctan2(lin, amp)) / 4.0, theta, 0.0, gain)


def _pair_rows(xi, xk, step):
    c, s = np.cos(step.alpha), np.sin(step.alpha)
    ri = np.exp(1j * step.beta_i) * xi
    rk = np.exp(1j * step.beta_k) * xk
    return s * rk + c * ri, c * rk - s * ri


def ca_inner(a, i, k, spec, tol=1e-10):
    """Optimal Givens angle and phase shifts for rows ``i > k`` of ``a``."""
    if not i > k:
        raise InvalidArguments(f"need i > k, got i={i}, k={k}")
    y, w = spec.weighted_samples
    a = np.asarray(a, dtype=np.complex128)
    x = a[[i, k]] @ y
    return solve_pair(_kernels.pair_moments(x[0], x[1], w), tol)


def _weighted_l4(x, w):
    p = x.real**2 + x.imag**2
    return float(np.sum((p * p) @ w))


def sweep_pairs(n, order="lexicographic", rng=None):
    pairs = [(i, k) for k in range(n) for i in range(k + 1, n)]
    if order == "seeded-random":
        pairs = [pairs[j] for j in rng.permutation(len(pairs))]
    return pairs


def ca_run(cfg, spec):
    a = np.array(as_unitary(cfg.init))
    n = a.shape[0]
    if n != spec.dim:
        raise InvalidArguments(f"init is {a.shape}, objective has dimension {spec.dim}")
    y, w = spec.weighted_samples
    x = a @ y
    obj = _weighted_l4(x, w)
    trace = LearnTrace(objective=[obj])
    rng = np.random.default_rng(cfg.seed)
    for sweep in range(cfg.max_sweeps):
        start = obj
        for i, k in sweep_pairs(n, cfg.sweep_order, rng):
            step = solve_pair(_kernels.pair_moments(x[i], x[k], w), cfg.inner_tol)
            if step.gain <= cfg.inner_tol:
                continue
            xi, xk = _pair_rows(x[i], x[k], step)
            delta = _weighted_l4(xi, w) + _weighted_l4(xk, w) - _weighted_l4(x[i], w) - _weighted_l4(x[k], w)
            if delta <= 0.0:
                continue
            new = apply_update(a, GivensRotation(i, k, step.alpha), PhaseShift(i, step.beta_i), PhaseShift(k, step.beta_k))
            trace.step_norm.append(float(np.linalg.norm(new[[i, k]] - a[[i, k]])))
            a = new
            x[i], x[k] = xi, xk
            obj += delta
            trace.objective.append(obj)
        a = maybe_renormalize(a)
        x = a @ y
        exact = _weighted_l4(x, w)
        # keep the trace monotone: only replace the running value when the
        # exact recomputation does not undercut it by more than rounding
        obj = exact if exact >= obj - 1e-12 * max(1.0, abs(obj)) else obj
        gain = obj - start
        trace.sweep_gain.append(gain)
        if gain <= cfg.improvement_tol * max(1.0, abs(start)):
            trace.terminated_by = "fixed_point" if sweep == 0 else "obj_tol"
            break
    else:
        trace.terminated_by = "max_iters"
    return a, trace


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class FixedPointVerdict:
    """``residual_*`` are Frobenius norms of the part of ``grad A^H``
    (left) or ``A^H grad`` (right) that is not a non-negative real diagonal,
    divided by ``||grad||_F``."""

    is_fixed: bool
    residual_left: float
    residual_right: float
    tol: float


def _non_diagonal_residual(m):
    d = np.diagonal(m)
    off = m - np.diag(d)
    r2 = np.sum(np.abs(off) ** 2) + np.sum(d.imag**2) + np.sum(np.minimum(d.real, 0.0) ** 2)
    return float(np.sqrt(r2))


def check_msp_fixed_point(a, grad, tol=1e-8):
    """MSP leaves ``a`` unchanged when ``grad = D a`` or ``grad = a D`` with D
    a non-negative real diagonal matrix."""
    a = np.asarray(a, dtype=np.complex128)
    grad = np.asarray(grad, dtype=np.complex128)
    if a.shape != grad.shape:
        raise InvalidArguments(f"shape mismatch {a.shape} vs {grad.shape}")
    scale = float(np.linalg.norm(grad))
    if scale == 0.0:
        return FixedPointVerdict(False, float("inf"), float("inf"), tol)
    left = _non_diagonal_residual(grad @ a.conj().T) / scale
    right = _non_diagonal_residual(a.conj().T @ grad) / scale
    return FixedPointVerdict(min(left, right) <= tol, left, right, tol)


def check_ca_local_opt(a, spec, tol=1e-8):
    """Every pair has a vanishing first and a strictly negative second Givens
    derivative."""
    report = ca_derivatives(a, spec)
    if report.pairs and all(s == 0.0 for _, _, _, s in report.pairs):
        log.warning("all second derivatives vanish; degenerate data")
    verdict = bool(report.pairs) and report.max_abs_first <= tol and report.max_second < -tol
    return verdict, report
