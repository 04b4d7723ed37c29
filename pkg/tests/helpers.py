"""Shared test fixtures that need a little computation."""
import numpy as np
from scipy.optimize import brentq

from l4sparsify import matkit as mk


def perturbed_cp(n, dist_sq, rng):
    """A unitary matrix at squared distance ``dist_sq`` from its nearest
    complex permutation, found by a root search along a random geodesic
    leaving a random CP matrix."""
    p = mk.random_cp(n, rng)
    k = mk.random_tangent(p, rng)

    def gap(t):
        return mk.nearest_cp(mk.move_along(p, k, t)).distance_sq - dist_sq

    hi = 0.1
    while gap(hi) < 0:
        hi *= 1.5
    t = brentq(gap, 0.0, hi, xtol=1e-14)
    a = mk.move_along(p, k, t)
    return a, mk.nearest_cp(a)
