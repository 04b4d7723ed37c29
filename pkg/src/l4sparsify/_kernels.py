"""Inner loops, each with a numba and a numpy implementation.

The public wrappers at the bottom pick one according to
:func:`l4sparsify._accel.numba_enabled`. Both flavours follow the same
operation order where it matters for determinism (the Jacobi schedule), so the
two paths agree to rounding.
"""
import numpy as np

from ._accel import njit, numba_enabled


def round_robin(n):
    """Round-robin (circle method) pairing of ``n`` columns.

    Returns an int array of shape ``(rounds, n_pairs, 2)`` with ``p < q`` in
    every pair; pairs inside one round are disjoint. Odd ``n`` gets a dummy
    column that is dropped from the output.
    """
    m = n + (n % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for j in range(m // 2):
            p, q = idx[j], idx[m - 1 - j]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(pairs)
        idx = [idx[0]] + [idx[-1]] + idx[1:-1]
    if n < 2:
        return np.zeros((0, 0, 2), dtype=np.int64)
    width = max(len(r) for r in rounds)
    out = np.zeros((len(rounds), width, 2), dtype=np.int64)
    for r, pairs in enumerate(rounds):
        out[r, : len(pairs)] = pairs
        # (-1, -1) slots are skipped by the kernels
        for j in range(len(pairs), width):
            out[r, j] = (-1, -1)
    return out


# ---------------------------------------------------------------------------
# one-sided Jacobi


@njit(cache=True)
def _jacobi_nb(w, v, schedule, tol, max_sweeps):
    m, n = w.shape
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        rotated = False
        for r in range(schedule.shape[0]):
            for j in range(schedule.shape[1]):
                p = schedule[r, j, 0]
                q = schedule[r, j, 1]
                if p < 0:
                    continue
                alpha = 0.0
                beta = 0.0
                gamma = 0.0 + 0.0j
                for t in range(m):
                    a = w[t, p]
                    b = w[t, q]
                    alpha += a.real * a.real + a.imag * a.imag
                    beta += b.real * b.real + b.imag * b.imag
                    gamma += a.conjugate() * b
                mag = abs(gamma)
                if mag == 0.0 or mag <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                ph = (gamma / mag).conjugate()
                zeta = (beta - alpha) / (2.0 * mag)
                sgn = 1.0 if zeta >= 0.0 else -1.0
                tt = sgn / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + tt * tt)
                s = c * tt
                for t in range(m):
                    a = w[t, p]
                    b = w[t, q] * ph
                    w[t, p] = c * a - s * b
                    w[t, q] = s * a + c * b
                for t in range(n):
                    a = v[t, p]
                    b = v[t, q] * ph
                    v[t, p] = c * a - s * b
                    v[t, q] = s * a + c * b
        if not rotated:
            break
    return sweeps


def _jacobi_np(w, v, schedule, tol, max_sweeps):
    sweeps = 0
    rounds = []
    for r in range(schedule.shape[0]):
        keep = schedule[r, :, 0] >= 0
        rounds.append((schedule[r, keep, 0], schedule[r, keep, 1]))
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        rotated = False
        for p, q in rounds:
            ap = w[:, p]
            aq = w[:, q]
            alpha = np.sum(ap.real**2 + ap.imag**2, axis=0)
            beta = np.sum(aq.real**2 + aq.imag**2, axis=0)
            gamma = np.sum(ap.conj() * aq, axis=0)
            mag = np.abs(gamma)
            act = (mag > 0.0) & (mag > tol * np.sqrt(alpha * beta))
            if not act.any():
                continue
            rotated = True
            p, q = p[act], q[act]
            ap, aq = ap[:, act], aq[:, act]
            alpha, beta, gamma, mag = alpha[act], beta[act], gamma[act], mag[act]
            ph = (gamma / mag).conj()
            zeta = (beta - alpha) / (2.0 * mag)
            sgn = np.where(zeta >= 0.0, 1.0, -1.0)
            tt = sgn / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + tt * tt)
            s = c * tt
            b = aq * ph
            w[:, p] = c * ap - s * b
            w[:, q] = s * ap + c * b
            vp = v[:, p]
            vq = v[:, q] * ph
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        if not rotated:
            break
    return sweeps


# ---------------------------------------------------------------------------
# single-path closed-form objective: sum over p - q + r - n = 0


@njit(cache=True)
def _analytic_l1_nb(a):
    nrow, b = a.shape
    out = np.zeros(nrow, dtype=np.complex128)
    for i in range(nrow):
        acc = 0.0 + 0.0j
        for p in range(b):
            for q in range(b):
                apq = a[i, p] * a[i, q].conjugate()
                for n in range(b):
                    r = n - p + q
                    if r < 0 or r >= b:
                        continue
                    acc += apq * a[i, r] * a[i, n].conjugate()
        out[i] = acc
    return out


def _analytic_l1_np(a):
    nrow, b = a.shape
    p, q, n = np.meshgrid(np.arange(b), np.arange(b), np.arange(b), indexing="ij")
    r = n - p + q
    ok = (r >= 0) & (r < b)
    p, q, r, n = p[ok], q[ok], r[ok], n[ok]
    terms = a[:, p] * a[:, q].conj() * a[:, r] * a[:, n].conj()
    return terms.sum(axis=1)


# ---------------------------------------------------------------------------
# DCT-II first derivative, cosine-weighted quadruple sum


@njit(cache=True)
def _dct_quadsum_nb(b, i, k):
    ck = np.empty(b)
    ci = np.empty(b)
    for t in range(b):
        ck[t] = np.cos(np.pi / b * (t + 0.5) * k)
        ci[t] = np.cos(np.pi / b * (t + 0.5) * i)
    scale_k = 2.0 if k == 0 else 1.0
    acc = 0.0
    for p in range(b):
        for q in range(b):
            for r in range(b):
                inner = 0.0
                # delta[p-q+r-n] (weight 2) and delta[p-q-r+n] (weight 1)
                n1 = p - q + r
                if 0 <= n1 < b:
                    inner += 2.0 * (ci[r] * ci[n1] - ck[r] * ck[n1] / scale_k)
                n2 = q + r - p
                if 0 <= n2 < b:
                    inner += ci[r] * ci[n2] - ck[r] * ck[n2] / scale_k
                acc += ck[p] * ci[q] * inner
    return acc


def _dct_quadsum_np(b, i, k):
    t = np.arange(b) + 0.5
    ck = np.cos(np.pi / b * t * k)
    ci = np.cos(np.pi / b * t * i)
    scale_k = 2.0 if k == 0 else 1.0
    # p+r=q+n and p+n=q+r give the same convolution products here because
    # the two summed indices carry identical weights
    same = (
        np.dot(np.convolve(ck, ci), np.convolve(ci, ci))
        - np.dot(np.convolve(ck, ck), np.convolve(ci, ck)) / scale_k
    )
    return 3.0 * same


# ---------------------------------------------------------------------------
# per-pair moments for the coordinate-ascent subproblem


@njit(cache=True)
def _pair_moments_nb(xi, xk, w):
    m40 = 0.0
    m04 = 0.0
    m22 = 0.0
    z2 = 0.0 + 0.0j
    z = 0.0 + 0.0j
    for t in range(xi.shape[0]):
        a = xi[t]
        b = xk[t]
        pa = a.real * a.real + a.imag * a.imag
        pb = b.real * b.real + b.imag * b.imag
        c = a * b.conjugate()
        wt = w[t]
        m40 += wt * pa * pa
        m04 += wt * pb * pb
        m22 += wt * pa * pb
        z2 += wt * c * c
        z += wt * (pa - pb) * c
    return m40, m04, m22, z2, z


def _pair_moments_np(xi, xk, w):
    pa = xi.real**2 + xi.imag**2
    pb = xk.real**2 + xk.imag**2
    c = xi * xk.conj()
    return (
        float(np.dot(w, pa * pa)),
        float(np.dot(w, pb * pb)),
        float(np.dot(w, pa * pb)),
        complex(np.dot(w, c * c)),
        complex(np.dot(w, (pa - pb) * c)),
    )


# ---------------------------------------------------------------------------
# dispatch


def jacobi_orthogonalize(w, v, tol, max_sweeps, use_numba=None):
    """Rotate the columns of ``w`` (in place) until pairwise orthogonal.

    ``v`` accumulates the same column rotations. Returns the number of sweeps.
    """
    schedule = round_robin(w.shape[1])
    if use_numba is None:
        use_numba = numba_enabled()
    if schedule.size == 0:
        return 0
    if use_numba:
        return int(_jacobi_nb(w, v, schedule, float(tol), int(max_sweeps)))
    return _jacobi_np(w, v, schedule, tol, max_sweeps)


def analytic_l1_rows(a, use_numba=None):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if use_numba is None:
        use_numba = numba_enabled()
    return _analytic_l1_nb(a) if use_numba else _analytic_l1_np(a)


def dct_quadsum(b, i, k, use_numba=None):
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba:
        return float(_dct_quadsum_nb(int(b), int(i), int(k)))
    return float(_dct_quadsum_np(int(b), int(i), int(k)))


def pair_moments(xi, xk, w, use_numba=None):
    """Weighted moments (E|xi|^4, E|xk|^4, E|xi xk|^2, E(xi xk*)^2,
    E(|xi|^2 - |xk|^2) xi xk*)."""
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba:
        m40, m04, m22, z2, z = _pair_moments_nb(
            np.ascontiguousarray(xi, dtype=np.complex128),
            np.ascontiguousarray(xk, dtype=np.complex128),
            np.ascontiguousarray(w, dtype=np.float64),
        )
        return float(m40), float(m04), float(m22), complex(z2), complex(z)
    return _pair_moments_np(xi, xk, w)
