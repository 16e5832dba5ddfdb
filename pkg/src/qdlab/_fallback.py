"""Numpy fallback implementations of the compiled kernels.

Same signatures as qdlab._kernels.  These are the reference versions: the
Cython module is an optimization, not a semantic change.  Vectorization is
over whatever axis is wide (phases, grid rows, chunk indices); sequential
recurrences that cannot be vectorized fall back to plain Python loops.
"""

import math

import numpy as np


# ---------------------------------------------------------------------------
# orbit chunk generation
# ---------------------------------------------------------------------------

def shift_chunk(y0, alpha, n):
    """Rows k=0..n-1 of the orbit of the translation by alpha, starting at y0.

    y0, alpha: 1d arrays of equal length d.  Returns (n, d) float64.
    Within-chunk error is O(n * eps), so callers re-anchor periodically.
    """
    y0 = np.asarray(y0, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    k = np.arange(n, dtype=np.float64)[:, None]
    out = y0[None, :] + k * alpha[None, :]
    out -= np.floor(out)
    return out


def skew_chunk(y0, alpha, n):
    """Rows k=0..n-1 of the skew-shift orbit starting at y0.

    Step: (y1,...,yd) -> (y1+alpha, y2+y1, ..., yd+y_{d-1}).  Uses running
    sums of the already-reduced lower coordinate, which is exact mod 1 up to
    float rounding; callers keep chunks short and re-anchor exactly.
    """
    y0 = np.asarray(y0, dtype=np.float64)
    d = y0.shape[0]
    out = np.empty((n, d), dtype=np.float64)
    k = np.arange(n, dtype=np.float64)
    col = y0[0] + k * alpha
    col -= np.floor(col)
    out[:, 0] = col
    for i in range(1, d):
        sums = np.empty(n, dtype=np.float64)
        sums[0] = 0.0
        np.cumsum(out[:-1, i - 1], out=sums[1:])
        col = y0[i] + sums
        col -= np.floor(col)
        out[:, i] = col
    return out


# ---------------------------------------------------------------------------
# discrepancy scans
# ---------------------------------------------------------------------------

def exact_discrepancy_1d(xs_sorted):
    """Exact sup over half-open intervals of |count/N - length|.

    xs_sorted: sorted 1d float64 array in [0,1).  The supremum over all
    intervals is attained in the limit at critical endpoints given by the
    sample coordinates, which reduces to two prefix-max scans.
    """
    x = np.asarray(xs_sorted, dtype=np.float64)
    n = x.shape[0]
    fn = float(n)
    idx = np.arange(n, dtype=np.float64)
    # overfilled intervals: count (j - i + 1), length x_j - x_i, i <= j
    a = x - idx / fn                       # x_i - i/N
    prem = np.maximum.accumulate(a)
    dplus = np.max((idx + 1.0) / fn - x + prem)
    # underfilled intervals: open (x_i, x_j), sentinels at 0 and 1
    xs = np.concatenate(([0.0], x, [1.0]))
    ids = np.arange(n + 2, dtype=np.float64)
    b = ids / fn - xs                      # i/N - x_i
    premb = np.empty(n + 2, dtype=np.float64)
    premb[0] = -np.inf
    np.maximum.accumulate(b[:-1], out=premb[1:])
    dminus = np.max(xs - (ids - 1.0) / fn + premb)
    return float(max(dplus, dminus, 0.0))


def grid_discrepancy_2d(counts, n_points):
    """Sup over grid-aligned half-open boxes of |count/N - area|.

    counts: (G, G) array of per-cell point counts (axis 0 = x, axis 1 = y).
    Exact for the grid-restricted box family; the caller reports the 2d/G
    additive error of restricting to the grid.
    """
    counts = np.asarray(counts, dtype=np.float64)
    g = counts.shape[0]
    fn = float(n_points)
    # prefix over x: p[i, j] = sum of counts[:i, j]
    p = np.zeros((g + 1, g), dtype=np.float64)
    np.cumsum(counts, axis=0, out=p[1:])
    jgrid = np.arange(g + 1, dtype=np.float64) / g
    best = 0.0
    c = np.empty((g, g + 1), dtype=np.float64)
    for i1 in range(g):
        rows = g - i1
        band = p[i1 + 1:] - p[i1]                 # (rows, g)
        c[:rows, 0] = 0.0
        np.cumsum(band, axis=1, out=c[:rows, 1:])
        w = (np.arange(i1 + 1, g + 1, dtype=np.float64) - i1) / g
        gmat = c[:rows] / fn - w[:, None] * jgrid[None, :]
        run = np.maximum.accumulate(-gmat[:, :-1], axis=1)
        dplus = np.max(gmat[:, 1:] + run)
        run = np.maximum.accumulate(gmat[:, :-1], axis=1)
        dminus = np.max(-gmat[:, 1:] + run)
        best = max(best, dplus, dminus)
    return float(best)


# ---------------------------------------------------------------------------
# SL(2) cocycle products
# ---------------------------------------------------------------------------

# Check the carried Frobenius norm every few steps and rescale only when it
# exceeds the threshold.  Bounded (elliptic) products then never rescale, so
# their carried determinant stays well conditioned; growing products rescale
# long before double overflow (worst-case inter-check growth keeps the
# squared norm far below 1e308).
_RENORM_EVERY = 16
_RENORM_THRESHOLD = 1e50


def _spectral_lognorm(a, b, c, d, logs):
    q = (np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2)
    det2 = np.abs(a * d - b * c) ** 2
    disc = np.sqrt(np.maximum(q * q - 4.0 * det2, 0.0))
    smax2 = 0.5 * (q + disc)
    return 0.5 * np.log(smax2) + logs


def cocycle_batch(v, e, eta=0.0, inverse=False):
    """Final log spectral norm and determinant drift of transfer products.

    v: (P, n) potential samples along the orbit (row p = phase p).
    Forward: A_n = A(theta_{n-1}) ... A(theta_0) with A = [[z-v, -1],[1, 0]].
    Inverse: products of A^{-1} = [[0, 1],[-1, z-v]] in the given order.
    Returns (lognorm, detlog_err) of shape (P,): detlog_err is
    log|det| + 2*logscale, zero for an exact unimodular product.
    """
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    pcount, n = v.shape
    if pcount == 1 and n > 4096:
        ln, dl = _cocycle_scalar(v[0], e, eta, inverse)
        return np.array([ln]), np.array([dl])
    dtype = np.complex128 if eta != 0.0 else np.float64
    z = e + 1j * eta if eta != 0.0 else e
    a = np.ones(pcount, dtype=dtype)
    b = np.zeros(pcount, dtype=dtype)
    c = np.zeros(pcount, dtype=dtype)
    d = np.ones(pcount, dtype=dtype)
    logs = np.zeros(pcount, dtype=np.float64)
    for k in range(n):
        t = z - v[:, k]
        if inverse:
            a, b, c, d = c, d, -a + t * c, -b + t * d
        else:
            a, b, c, d = t * a - c, t * b - d, a, b
        if (k + 1) % _RENORM_EVERY == 0:
            q = (np.abs(a) ** 2 + np.abs(b) ** 2
                 + np.abs(c) ** 2 + np.abs(d) ** 2)
            s = np.where(q > _RENORM_THRESHOLD, np.sqrt(q), 1.0)
            a = a / s
            b = b / s
            c = c / s
            d = d / s
            logs += np.log(s)
    lognorm = _spectral_lognorm(a, b, c, d, logs)
    det = np.abs(a * d - b * c)
    with np.errstate(divide="ignore"):
        detlog = np.where(det > 0.0, np.log(det), -np.inf) + 2.0 * logs
    return np.asarray(lognorm, dtype=np.float64), detlog


def _cocycle_scalar(v, e, eta, inverse):
    # plain Python floats beat numpy scalar overhead for a single long orbit
    if eta != 0.0:
        z = complex(e, eta)
        a, b, c, d = complex(1), complex(0), complex(0), complex(1)
    else:
        z = e
        a, b, c, d = 1.0, 0.0, 0.0, 1.0
    logs = 0.0
    vl = v.tolist()
    k = 0
    for vk in vl:
        t = z - vk
        if inverse:
            a, b, c, d = c, d, -a + t * c, -b + t * d
        else:
            a, b, c, d = t * a - c, t * b - d, a, b
        k += 1
        if k % _RENORM_EVERY == 0:
            q = (abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2)
            if q > _RENORM_THRESHOLD:
                s = math.sqrt(q)
                a /= s
                b /= s
                c /= s
                d /= s
                logs += math.log(s)
    q = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    det2 = abs(a * d - b * c) ** 2
    disc = math.sqrt(max(q * q - 4.0 * det2, 0.0))
    lognorm = 0.5 * math.log(0.5 * (q + disc)) + logs
    detlog = (0.5 * math.log(det2) if det2 > 0.0 else -math.inf) + 2.0 * logs
    return lognorm, detlog


def cocycle_lognorms_all(v, e, eta=0.0, inverse=False):
    """log spectral norm of every prefix product A_1 ... A_n.

    v: (n,) potential samples.  Returns float64 (n,).
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    out = np.empty(n, dtype=np.float64)
    if eta != 0.0:
        z = complex(e, eta)
        a, b, c, d = complex(1), complex(0), complex(0), complex(1)
    else:
        z = float(e)
        a, b, c, d = 1.0, 0.0, 0.0, 1.0
    logs = 0.0
    for k in range(n):
        t = z - v[k]
        if inverse:
            a, b, c, d = c, d, -a + t * c, -b + t * d
        else:
            a, b, c, d = t * a - c, t * b - d, a, b
        q = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
        det2 = abs(a * d - b * c) ** 2
        disc = math.sqrt(max(q * q - 4.0 * det2, 0.0))
        out[k] = 0.5 * math.log(0.5 * (q + disc)) + logs
        if q > _RENORM_THRESHOLD:
            s = math.sqrt(q)
            a /= s
            b /= s
            c /= s
            d /= s
            logs += math.log(s)
    return out


# ---------------------------------------------------------------------------
# Chebyshev propagation
# ---------------------------------------------------------------------------

def cheb_apply(diag_scaled, off_scaled, coeffs, psi0):
    """Sum coeffs[k] * T_k(Hs) psi0 for the scaled tridiagonal Hs.

    diag_scaled: (M,) float64 diagonal of Hs; off_scaled: scalar off-diagonal
    coupling of Hs; coeffs: (K,) complex128; psi0: (M,) complex128.
    """
    diag = np.asarray(diag_scaled, dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    t0 = np.asarray(psi0, dtype=np.complex128).copy()
    m = t0.shape[0]

    def matvec(x):
        y = diag * x
        y[:-1] += off_scaled * x[1:]
        y[1:] += off_scaled * x[:-1]
        return y

    acc = coeffs[0] * t0
    if coeffs.shape[0] == 1:
        return acc
    t1 = matvec(t0)
    acc += coeffs[1] * t1
    for k in range(2, coeffs.shape[0]):
        t2 = 2.0 * matvec(t1) - t0
        acc += coeffs[k] * t2
        t0, t1 = t1, t2
    return acc
