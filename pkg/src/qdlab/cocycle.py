"""Schrodinger cocycles over torus dynamics and Lyapunov-type estimators.

The one-step transfer matrix at phase theta and energy z is
[[z - phi(theta), -1], [1, 0]]; n-step products are carried as a unit-scale
2x2 matrix plus an accumulated log-scale, and their spectral norms come from
the closed-form singular values.  Bulk products (phase batches, per-step
norm traces) are delegated to the compiled/fallback kernels.
"""

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .torus import TorusPoint, step_array, inverse_step_array

# rescale once the Frobenius norm passes 1e25 (squared norm 1e50, matching
# the kernels): the closed-form spectral norm squares the squared Frobenius
# norm, so a later threshold would overflow the discriminant q^2 - 4 det^2
RENORM_NORM = 1e25


# ---------------------------------------------------------------------------
# sampling functions (potentials)
# ---------------------------------------------------------------------------

class CosinePotential:
    """phi(theta) = 2 lam cos(2 pi theta_1)."""

    def __init__(self, lam):
        self.lam = float(lam)
        self.sup_bound = 2.0 * abs(self.lam)
        self.holder = (1.0, 4.0 * math.pi * abs(self.lam))

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return 2.0 * self.lam * np.cos(2.0 * math.pi * pts[:, 0])


class PiecewiseHolderPotential:
    """Finite list of (box, callable) pieces partitioning the torus.

    Each piece is ((lo tuple, hi tuple), phi_j, gamma, holder constant); a
    point within 1e-12 of several boxes takes the first matching piece.
    """

    def __init__(self, pieces):
        if not pieces:
            raise ValueError("need at least one piece")
        self.pieces = list(pieces)
        self.holder = (min(p[2] for p in pieces),
                       sum(p[3] for p in pieces))
        self.sup_bound = None   # unknown until sampled

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        out = np.zeros(pts.shape[0])
        assigned = np.zeros(pts.shape[0], dtype=bool)
        for (lo, hi), func, _, _ in self.pieces:
            lo = np.asarray(lo)
            hi = np.asarray(hi)
            inside = np.all((pts >= lo - 1e-12) & (pts < hi + 1e-12), axis=1)
            take = inside & ~assigned
            if np.any(take):
                out[take] = func(pts[take])
                assigned |= take
        if not np.all(assigned):
            raise ValueError("pieces do not cover all evaluated points")
        return out


class TabulatedPotential:
    """Lookup table over the first coordinate, piecewise constant."""

    def __init__(self, table):
        self.table = np.asarray(table, dtype=np.float64)
        if self.table.ndim != 1 or self.table.size == 0:
            raise ValueError("table must be a nonempty 1-d array")
        self.sup_bound = float(np.max(np.abs(self.table)))
        self.holder = None

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        idx = np.minimum((pts[:, 0] * self.table.size).astype(np.int64),
                         self.table.size - 1)
        return self.table[idx]


class ZeroPotential:
    sup_bound = 0.0
    holder = (1.0, 0.0)

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return np.zeros(pts.shape[0])


def holder_certificate(phi, d, pairs, seed, scale=1e-3):
    """Max observed |phi(a)-phi(b)| / dist(a,b)^gamma over nearby pairs."""
    gamma, const = phi.holder
    rng = np.random.default_rng(seed)
    a = rng.random((pairs, d))
    b = a + rng.uniform(-scale, scale, size=(pairs, d))
    b -= np.floor(b)
    delta = np.abs(a - b)
    delta = np.minimum(delta, 1.0 - delta)
    dist = np.sqrt(np.einsum("ij,ij->i", delta, delta))
    good = dist > 0
    ratio = np.abs(phi(a[good]) - phi(b[good])) / dist[good] ** gamma
    return float(np.max(ratio)), const


# ---------------------------------------------------------------------------
# transfer matrices and products
# ---------------------------------------------------------------------------

def transfer_matrix(theta, z, phi):
    """One-step matrix [[z - phi(theta), -1], [1, 0]], determinant 1."""
    coords = np.atleast_2d(np.asarray(
        theta.coords if isinstance(theta, TorusPoint) else theta,
        dtype=np.float64))
    v = float(phi(coords)[0])
    dtype = np.complex128 if isinstance(z, complex) else np.float64
    return np.array([[z - v, -1.0], [1.0, 0.0]], dtype=dtype)


@dataclass
class TransferProduct:
    matrix: np.ndarray
    logscale: float
    n: int
    z: complex

    def log_norm(self):
        """log of the spectral norm of the full product."""
        return _spectral_log(self.matrix) + self.logscale

    def det_log(self):
        """log |det| of the full product (0 means unimodular)."""
        det = self.matrix[0, 0] * self.matrix[1, 1] \
            - self.matrix[0, 1] * self.matrix[1, 0]
        return math.log(abs(det)) + 2.0 * self.logscale


def _spectral_log(m):
    q = float(np.sum(np.abs(m) ** 2))
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = max(q * q - 4.0 * abs(det) ** 2, 0.0)
    return 0.5 * math.log(0.5 * (q + math.sqrt(disc)))


def potential_sequence(map_spec, theta, n, phi, forward=True):
    """(phi(theta), phi(f theta), ...) resp. (phi(f^-1 theta), ...)."""
    coords = np.asarray(
        theta.coords if isinstance(theta, TorusPoint) else theta,
        dtype=np.float64).reshape(1, -1)
    out = np.empty(n, dtype=np.float64)
    cur = coords
    for k in range(n):
        if not forward:
            cur = inverse_step_array(map_spec, cur)
        out[k] = phi(cur)[0]
        if forward:
            cur = step_array(map_spec, cur)
    return out


def cocycle_product(map_spec, theta, z, n, phi):
    """A_n(theta, z) as a scaled TransferProduct; n = 0 gives the identity."""
    if n < 0:
        raise ValueError("n must be >= 0")
    dtype = np.complex128 if isinstance(z, complex) else np.float64
    m = np.eye(2, dtype=dtype)
    logscale = 0.0
    if n:
        v = potential_sequence(map_spec, theta, n, phi)
        for k in range(n):
            t = z - v[k]
            m = np.array([[t * m[0, 0] - m[1, 0], t * m[0, 1] - m[1, 1]],
                          [m[0, 0], m[0, 1]]], dtype=dtype)
            norm = math.sqrt(float(np.sum(np.abs(m) ** 2)))
            if norm > RENORM_NORM:
                m /= norm
                logscale += math.log(norm)
    return TransferProduct(m, logscale, n, z)


def _batch_lognorms(map_spec, thetas, z, n, phi):
    """log ||A_n|| for a batch of phases, via the kernel product."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    pcount = thetas.shape[0]
    v = np.empty((pcount, n), dtype=np.float64)
    cur = thetas.copy()
    for k in range(n):
        v[:, k] = phi(cur)
        cur = step_array(map_spec, cur)
    e = z.real if isinstance(z, complex) else float(z)
    eta = z.imag if isinstance(z, complex) else 0.0
    lognorm, detlog = kernels.cocycle_batch(v, e, eta)
    return lognorm, detlog


@dataclass
class LyapunovEstimate:
    lhat: float
    stderr: float
    lhat_grid: float
    n: int
    phases: int


def lyapunov_estimate(map_spec, z, n, phases, seed, phi):
    """Finite-n Lyapunov estimate (1/n) E_theta log ||A_n||.

    Averages over a seeded uniform phase sample; a deterministic phase grid
    of the same size is reported alongside as a bias guard.
    """
    if n < 1 or phases < 1:
        raise ValueError("need n >= 1 and phases >= 1")
    d = map_spec.d
    rng = np.random.default_rng(seed)
    random_thetas = rng.random((phases, d))
    grid_thetas = np.zeros((phases, d))
    grid_thetas[:, 0] = (np.arange(phases) + 0.5) / phases
    vals, _ = _batch_lognorms(map_spec, random_thetas, z, n, phi)
    vals = vals / n
    grid_vals, _ = _batch_lognorms(map_spec, grid_thetas, z, n, phi)
    stderr = float(np.std(vals, ddof=1) / math.sqrt(phases)) if phases > 1 else 0.0
    return LyapunovEstimate(float(np.mean(vals)), stderr,
                            float(np.mean(grid_vals) / n), n, phases)


def uniform_upper_scan(map_spec, z, n, phase_grid, phi):
    """max over a deterministic phase grid of (1/n) log ||A_n(theta, z)||."""
    d = map_spec.d
    thetas = np.zeros((phase_grid, d))
    thetas[:, 0] = (np.arange(phase_grid) + 0.5) / phase_grid
    vals, _ = _batch_lognorms(map_spec, thetas, z, n, phi)
    return float(np.max(vals) / n)


def window_lower_bound(map_spec, theta, z, n, w, phi):
    """min over direction of max over |j| <= w of log ||A_n(f^j theta, z)||.

    The window slides the starting phase; the two directional maxima are
    computed from one two-sided potential sequence.
    """
    if w < 0 or n < 1:
        raise ValueError("need w >= 0 and n >= 1")
    back = potential_sequence(map_spec, theta, w, phi, forward=False)[::-1]
    fwd = potential_sequence(map_spec, theta, w + n, phi, forward=True)
    v = np.concatenate([back, fwd])        # indices -w .. w+n-1
    windows = np.lib.stride_tricks.sliding_window_view(v, n)
    e = z.real if isinstance(z, complex) else float(z)
    eta = z.imag if isinstance(z, complex) else 0.0
    lognorms, _ = kernels.cocycle_batch(np.ascontiguousarray(windows), e, eta)
    fwd_max = float(np.max(lognorms[w:]))      # j = 0 .. w
    bwd_max = float(np.max(lognorms[:w + 1]))  # j = -w .. 0
    return min(fwd_max, bwd_max)


def dt_integral(map_spec, theta, big_t, rho, e_count, k_bound, phi):
    """Trapezoid integral over [-K, K] of the damped-product criterion.

    Integrand at E: 1 / (min over direction of max over 1 <= n <= T^rho of
    ||A_n(theta, E + i/T)||^2); always <= 1 since the products are
    unimodular.
    """
    if k_bound < 4:
        raise ValueError("energy bound must be >= 4")
    nmax = max(1, int(math.floor(big_t ** rho)))
    eta = 1.0 / big_t
    v_fwd = potential_sequence(map_spec, theta, nmax, phi, forward=True)
    v_bwd = potential_sequence(map_spec, theta, nmax, phi, forward=False)
    es = np.linspace(-k_bound, k_bound, e_count)
    integrand = np.empty(e_count)
    for i, e in enumerate(es):
        fwd = kernels.cocycle_lognorms_all(v_fwd, float(e), eta)
        bwd = kernels.cocycle_lognorms_all(v_bwd, float(e), eta, inverse=True)
        best = min(float(np.max(fwd)), float(np.max(bwd)))
        integrand[i] = math.exp(-2.0 * max(best, 0.0))
    return float(np.trapezoid(integrand, es)), integrand


@dataclass
class TruncationLength:
    length: float
    achieved_norm: float
    satisfied: bool


def _truncated_norm_sq(cum, tail, length):
    """Fractionally interpolated truncated norm squared at a real length."""
    lo = int(math.floor(length))
    lo = min(lo, cum.shape[0])
    base = cum[lo - 1] if lo >= 1 else 0.0
    frac = length - math.floor(length)
    if frac > 0.0 and lo < cum.shape[0]:
        base += frac * tail[lo]
    return base


def kkl_truncation(map_spec, theta, z, eps, phi, max_window=4096):
    """Window lengths where the truncated norm of n -> A_n reaches 2||A||/eps.

    Solves the monotone equation in each direction by bisection on the
    fractionally interpolated truncated norm; an unsatisfiable direction is
    reported with the achieved norm and satisfied=False.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    a1 = transfer_matrix(theta, z, phi)
    target = (2.0 * math.exp(_spectral_log(a1)) / eps) ** 2
    e = z.real if isinstance(z, complex) else float(z)
    eta = z.imag if isinstance(z, complex) else 0.0
    out = []
    for forward in (False, True):
        v = potential_sequence(map_spec, theta, max_window, phi,
                               forward=forward)
        lognorms = kernels.cocycle_lognorms_all(v, e, eta,
                                                inverse=not forward)
        sq = np.exp(np.minimum(2.0 * lognorms, 700.0))
        cum = np.cumsum(sq)
        if cum[-1] < target:
            out.append(TruncationLength(float(max_window),
                                        math.sqrt(cum[-1]), False))
            continue
        lo, hi = 0.0, float(max_window)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if _truncated_norm_sq(cum, sq, mid) < target:
                lo = mid
            else:
                hi = mid
        out.append(TruncationLength(hi, math.sqrt(
            _truncated_norm_sq(cum, sq, hi)), True))
    return out[0], out[1]
