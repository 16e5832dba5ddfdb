"""Bounded remainder sets on T^1 and T^2 with explicit transfer functions.

A set U is a bounded remainder set for the rotation by alpha when the
Birkhoff remainder A_N(U,x) - N|U| stays uniformly bounded; equivalently
chi_U(x) - |U| = g(x) - g(x - alpha) a.e. for a bounded transfer function g.
Two explicit constructions are implemented: an interval of length
|q alpha - p| and a parallelogram spanned by m(alpha1,alpha2) - (l1,l2) and
(q v1/v2 - p, 0).  Fourier coefficients of the constructed g come from exact
piecewise integration of the sawtooth building blocks, not from a sampled
grid (the integrands are discontinuous, a grid rule cannot certify 1e-6).
"""

import math
from dataclasses import dataclass, field

import numpy as np


def _frac(x):
    return x - np.floor(x)


TWO_PI_I = 2j * math.pi


def _geom_phase_sum(count, phase):
    """sum_{j=0}^{count-1} e^{-2 pi i j phase}, stable for small phases."""
    j = np.arange(count)
    return np.sum(np.exp(-TWO_PI_I * j * phase))


@dataclass
class TransferFunction:
    evaluator: callable          # vectorized x (N,) or (N,2) -> g values
    bound: float                 # certified sup-norm bound
    fourier: callable = None     # integer mode vector -> complex coefficient
    volume: float = None
    membership: callable = None  # vectorized indicator of the underlying set

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=np.float64))


# ---------------------------------------------------------------------------
# interval construction
# ---------------------------------------------------------------------------

def interval_transfer(alpha, q, p):
    """Transfer function of I = [0, q*alpha - p) with sup bound |q|.

    For q > 0: g(x) = -sum_{j=0}^{q-1} {x - j alpha}; the q < 0 case uses
    the mirrored telescoping g(x) = sum_{j=1}^{-q} {x + j alpha}.
    """
    alpha = float(alpha)
    kappa = q * alpha - p
    if not 0.0 < abs(kappa) < 1.0:
        raise ValueError("interval length |q alpha - p| must lie in (0,1)")
    if kappa < 0.0:
        q, p, kappa = -q, -p, -kappa

    if q > 0:
        def evaluator(x):
            x = np.asarray(x, dtype=np.float64)
            acc = np.zeros_like(x)
            for j in range(q):
                acc -= _frac(x - j * alpha)
            return acc

        def fourier(mode):
            m = int(mode)
            if m == 0:
                raise ValueError("mode 0 is not determined by the identity")
            return _geom_phase_sum(q, m * alpha) / (TWO_PI_I * m)
    else:
        def evaluator(x):
            x = np.asarray(x, dtype=np.float64)
            acc = np.zeros_like(x)
            for j in range(1, -q + 1):
                acc += _frac(x + j * alpha)
            return acc

        def fourier(mode):
            m = int(mode)
            if m == 0:
                raise ValueError("mode 0 is not determined by the identity")
            j = np.arange(1, -q + 1)
            return -np.sum(np.exp(TWO_PI_I * j * m * alpha)) / (TWO_PI_I * m)

    def membership(x):
        return _frac(np.asarray(x, dtype=np.float64)) < kappa

    return TransferFunction(evaluator, abs(q), fourier, kappa, membership)


def interval_indicator_fourier(kappa, mode):
    """Fourier coefficient of chi_[0,kappa) on the circle."""
    m = int(mode)
    if m == 0:
        return complex(kappa)
    return (1.0 - np.exp(-TWO_PI_I * m * kappa)) / (TWO_PI_I * m)


# ---------------------------------------------------------------------------
# parallelogram construction on T^2
# ---------------------------------------------------------------------------

@dataclass
class ParallelogramSet:
    alpha: tuple
    m: int
    l: tuple
    q: int
    p: int
    v: tuple = field(init=False)
    sigma_len: float = field(init=False)
    volume: float = field(init=False)

    def __post_init__(self):
        a1, a2 = self.alpha
        v = (self.m * a1 - self.l[0], self.m * a2 - self.l[1])
        if v[1] == 0.0:
            raise ValueError("degenerate spanning vector: v2 = 0")
        c = v[0] / v[1]
        sigma = self.q * c - self.p
        if not 0.0 < abs(sigma) < 1.0:
            raise ValueError("base interval q v1/v2 - p must have length in (0,1)")
        self.v = v
        self.sigma_len = sigma
        self.volume = abs(v[1]) * abs(sigma)


def parallelogram_transfer(alpha1, alpha2, m, l1, l2, q, p):
    """Transfer function of the sheared parallelogram on T^2.

    Builds g(x,y) = sum_{j<m} gt(x - j a1, y - j a2) with
    gt(x,y) = h(x - (v1/v2){y}) - |Sigma| {y}, h the interval transfer of
    Sigma = [0, q v1/v2 - p) with respect to the slope v1/v2.  Certified
    bound |m| (|q| + 1).
    """
    if m < 1:
        raise ValueError("m must be >= 1 (flip the signs of (m, l) instead)")
    para = ParallelogramSet((float(alpha1), float(alpha2)), m, (l1, l2), q, p)
    v1, v2 = para.v
    c = v1 / v2
    h = interval_transfer(c, q, p)
    sigma = h.volume          # normalized positive length of Sigma
    alpha = np.array([alpha1, alpha2], dtype=np.float64)

    def gt(x, y):
        fy = _frac(y)
        return h.evaluator(x - c * fy) - sigma * fy

    def evaluator(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        acc = np.zeros(pts.shape[0])
        for j in range(m):
            acc += gt(pts[:, 0] - j * alpha[0], pts[:, 1] - j * alpha[1])
        return acc

    def membership(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        x, y = pts[:, 0], pts[:, 1]
        if v2 > 0:
            t = _frac(y) / v2
        else:
            t = (_frac(y) - 1.0) / v2
        ok = t < 1.0
        s = _frac(x - t * v1)
        return ok & (s < sigma)

    def fourier(mode):
        m1, m2 = (int(mode[0]), int(mode[1]))
        if m1 == 0 and m2 == 0:
            raise ValueError("mode 0 is not determined by the identity")
        denom = TWO_PI_I * (m1 * c + m2)
        if abs(denom) < 1e-15:
            raise ValueError("resonant mode for the base slope")
        chi_sigma = interval_indicator_fourier(sigma, m1)
        gt_hat = chi_sigma / denom
        phase = m1 * alpha[0] + m2 * alpha[1]
        return gt_hat * _geom_phase_sum(m, phase)

    tf = TransferFunction(evaluator, abs(m) * (abs(q) + 1.0), fourier,
                          para.volume, membership)
    tf.parallelogram = para
    return tf


def parallelogram_indicator_fourier(tf, mode):
    """chi_U Fourier coefficient from the spanning-vector closed form."""
    para = tf.parallelogram
    v1, v2 = para.v
    sigma = tf.volume / abs(v2)
    m1, m2 = int(mode[0]), int(mode[1])

    def edge(nu):
        if abs(nu) < 1e-15:
            return 1.0 + 0.0j
        return (1.0 - np.exp(-TWO_PI_I * nu)) / (TWO_PI_I * nu)

    w2x = math.copysign(sigma, para.sigma_len)
    return (abs(v2) * sigma
            * edge(m1 * v1 + m2 * v2) * edge(m1 * w2x))


# ---------------------------------------------------------------------------
# remainder scan
# ---------------------------------------------------------------------------

def remainder_sup(membership, volume, alpha, x0, nmax, chunk=1 << 16):
    """sup over N <= nmax of |A_N - N vol| along the rotation orbit of x0.

    membership: vectorized indicator over points; alpha and x0 are scalars
    (d=1) or length-2 sequences (d=2).
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    d = alpha.shape[0]
    sup = 0.0
    running = 0.0
    for start in range(0, nmax, chunk):
        count = min(chunk, nmax - start)
        ns = np.arange(start, start + count, dtype=np.float64)
        pts = _frac(x0[None, :] + ns[:, None] * alpha[None, :])
        ind = membership(pts if d > 1 else pts[:, 0]).astype(np.float64)
        partial = running + np.cumsum(ind - volume)
        sup = max(sup, float(np.max(np.abs(partial))))
        running = partial[-1]
    return sup
