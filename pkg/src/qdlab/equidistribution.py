"""Box and isotropic discrepancy, ETK / Van der Corput oracles, rate fits.

Point sets are ordered sequences on [0,1)^d.  Box discrepancy is exact in
d=1 (prefix-max scan over critical endpoints), exact in d=2 for N <= 512
(critical-box band scan), and otherwise grid-restricted with a certified
additive error 2d/G.  Isotropic discrepancy is reported as a randomized
lower estimate only.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from qdlab.arithmetic import Frequency, parse_frequency
from qdlab.backend import kernels
from qdlab.torus import PointSet

GRID_RESOLUTION = 1024
EXACT_2D_LIMIT = 512
ORBIT_CHUNK = 16384


# ---------------------------------------------------------------------------
# high-accuracy orbit generation (exact 128-bit anchors + kernel chunk fill)
# ---------------------------------------------------------------------------

def _fixed_ints(values, bits):
    out = []
    for v in values:
        f = v if isinstance(v, Frequency) else Frequency(v, bits)
        out.append(f.fixed_int(bits))
    return out


def _skew_anchor(a_int, y_ints, n, modulus):
    d = len(y_ints)
    anchor = []
    for i in range(1, d + 1):
        acc = y_ints[i - 1]
        for j in range(1, i):
            acc += math.comb(n, j) * y_ints[i - 1 - j]
        acc += math.comb(n, i) * a_int
        anchor.append((acc % modulus) / modulus)
    return np.array(anchor, dtype=np.float64)


def orbit_chunks(kind, freqs, y0, n, bits=128, chunk=ORBIT_CHUNK):
    """Yields (start_index, (m, d) float64 array) chunks of the orbit.

    kind: 'shift' (freqs = one Frequency per coordinate) or 'skew'
    (freqs = single scalar Frequency, y0 gives the dimension).  Chunk
    anchors are computed in exact fixed-point integers, so error never
    accumulates beyond a single chunk (~1e-8 worst case for d=2).
    """
    modulus = 1 << bits
    y_ints = [int(round(float(c) * modulus)) % modulus for c in y0]
    d = len(y_ints)
    if kind == "shift":
        a_ints = _fixed_ints(freqs, bits)
        alpha = np.array([a / modulus for a in a_ints], dtype=np.float64)
        for start in range(0, n, chunk):
            m = min(chunk, n - start)
            anchor = np.array(
                [((y + start * a) % modulus) / modulus
                 for y, a in zip(y_ints, a_ints)], dtype=np.float64)
            yield start, kernels.shift_chunk(anchor, alpha, m)
    elif kind == "skew":
        a_int = _fixed_ints([freqs] if isinstance(freqs, (Frequency, str, float))
                            else list(freqs)[:1], bits)[0]
        alpha = a_int / modulus
        for start in range(0, n, chunk):
            m = min(chunk, n - start)
            anchor = _skew_anchor(a_int, y_ints, start, modulus)
            yield start, kernels.skew_chunk(anchor, alpha, m)
    else:
        raise ValueError(f"unknown orbit kind {kind!r}")


def orbit_point_set(kind, freqs, y0, n, bits=128):
    d = len(tuple(y0))
    pts = np.empty((n, d), dtype=np.float64)
    for start, block in orbit_chunks(kind, freqs, y0, n, bits=bits):
        pts[start:start + block.shape[0]] = block
    return PointSet(pts, provenance=f"{kind} orbit, n={n}")


def orbit_grid_counts(kind, freqs, y0, n, g, bits=128):
    """(g, g) int64 cell counts of a d=2 orbit, without materializing it."""
    counts = np.zeros(g * g, dtype=np.int64)
    for _, block in orbit_chunks(kind, freqs, y0, n, bits=bits):
        ix = np.minimum((block[:, 0] * g).astype(np.int64), g - 1)
        iy = np.minimum((block[:, 1] * g).astype(np.int64), g - 1)
        counts += np.bincount(ix * g + iy, minlength=g * g)
    return counts.reshape(g, g)


# ---------------------------------------------------------------------------
# counting and box discrepancy
# ---------------------------------------------------------------------------

def counting(region, point_set):
    """Number of points in the region.

    region: either a callable mapping an (N, d) array to a boolean mask, or
    a (beta, kappa) pair of arrays defining the half-open box [beta, kappa).
    """
    pts = point_set.points
    if callable(region):
        mask = np.asarray(region(pts), dtype=bool)
    else:
        beta, kappa = region
        beta = np.asarray(beta, dtype=np.float64)
        kappa = np.asarray(kappa, dtype=np.float64)
        mask = np.all((pts >= beta) & (pts < kappa), axis=1)
    return int(np.count_nonzero(mask))


@dataclass
class DiscrepancyReport:
    n: int
    d_n: float
    method: str
    error_bound: float = 0.0
    j_n_lower: float = None


def discrepancy_box(point_set, grid=GRID_RESOLUTION):
    """Sup over half-open axis boxes of |count/N - volume|."""
    pts = point_set.points
    n, d = pts.shape
    if n < 1:
        raise ValueError("empty point set")
    if d == 1:
        val = kernels.exact_discrepancy_1d(np.sort(pts[:, 0]))
        return DiscrepancyReport(n, float(val), "exact")
    if d == 2 and n <= EXACT_2D_LIMIT:
        return DiscrepancyReport(n, _exact_discrepancy_2d(pts), "exact")
    if d == 2:
        counts = np.zeros((grid, grid), dtype=np.int64)
        ix = np.minimum((pts[:, 0] * grid).astype(np.int64), grid - 1)
        iy = np.minimum((pts[:, 1] * grid).astype(np.int64), grid - 1)
        np.add.at(counts, (ix, iy), 1)
        val = kernels.grid_discrepancy_2d(counts, n)
        return DiscrepancyReport(n, float(val), f"grid({grid})", 2.0 * d / grid)
    # generic grid method for d >= 3
    g = max(4, int(round(grid ** (2.0 / d))))
    return _grid_discrepancy_nd(pts, g)


def discrepancy_from_grid_counts(counts, n):
    g = counts.shape[0]
    val = kernels.grid_discrepancy_2d(counts, n)
    return DiscrepancyReport(n, float(val), f"grid({g})", 4.0 / g)


def _exact_discrepancy_2d(pts):
    """Exact d=2 box discrepancy over critical boxes.

    For every pair of y-cuts drawn from the sample (plus sentinels), the x
    problem collapses to the 1d prefix-max scan; overfilled boxes use
    inclusive cuts at data values, underfilled ones exclusive cuts.
    """
    n = pts.shape[0]
    fn = float(n)
    order = np.argsort(pts[:, 0], kind="stable")
    x = pts[order, 0]
    y = pts[order, 1]
    yvals = np.unique(y)
    best = 0.0
    # overfilled: y-band [yl, yh] inclusive, minimal width/height
    for li in range(yvals.shape[0]):
        yl = yvals[li]
        for hi in range(li, yvals.shape[0]):
            yh = yvals[hi]
            h = yh - yl
            sel = (y >= yl) & (y <= yh)
            xs = x[sel]
            if xs.shape[0] == 0:
                continue
            idx = np.arange(xs.shape[0], dtype=np.float64)
            prem = np.maximum.accumulate(h * xs - idx / fn)
            cand = np.max((idx + 1.0) / fn - h * xs + prem)
            if cand > best:
                best = cand
    # underfilled: y-band (yl, yh) exclusive with sentinels 0, 1
    ycuts = np.concatenate(([0.0], yvals, [1.0]))
    for li in range(ycuts.shape[0]):
        yl = ycuts[li]
        for hi in range(li + 1, ycuts.shape[0]):
            yh = ycuts[hi]
            h = yh - yl
            if h <= 0.0:
                continue
            sel = (y > yl) & (y < yh)
            xs = np.concatenate(([0.0], x[sel], [1.0]))
            m = xs.shape[0]
            ids = np.arange(m, dtype=np.float64)
            b = ids / fn - h * xs
            premb = np.empty(m, dtype=np.float64)
            premb[0] = 0.0
            np.maximum.accumulate(b[:-1], out=premb[1:])
            cand = np.max(h * xs - (ids - 1.0) / fn + premb)
            if cand > best:
                best = cand
    return float(best)


def _grid_discrepancy_nd(pts, g):
    n, d = pts.shape
    idx = np.minimum((pts * g).astype(np.int64), g - 1)
    flat = np.zeros(g ** d, dtype=np.int64)
    lin = np.zeros(n, dtype=np.int64)
    for i in range(d):
        lin = lin * g + idx[:, i]
    flat += np.bincount(lin, minlength=g ** d)
    counts = flat.reshape((g,) * d)
    # anchored prefix sums, then scan all grid boxes (d <= 3 in practice)
    pref = counts.astype(np.float64)
    for ax in range(d):
        pref = np.cumsum(pref, axis=ax)
    pref = np.pad(pref, [(1, 0)] * d)
    # general-box scans are too costly for d >= 3: report the anchored-box
    # sup (a lower bound; the general value is at most 2^d times larger)
    best = 0.0
    vol_cell = 1.0 / g
    for corner in np.ndindex(*((g + 1,) * d)):
        c = pref[corner]
        vol = 1.0
        for ci in corner:
            vol *= ci * vol_cell
        dev = abs(c / n - vol)
        if dev > best:
            best = dev
    return DiscrepancyReport(n, float(best), f"grid-anchored({g})", 2.0 * d / g)


# ---------------------------------------------------------------------------
# isotropic discrepancy (randomized lower estimate)
# ---------------------------------------------------------------------------

def isotropic_discrepancy_lower(point_set, trials, seed):
    """Max deviation over random balls and ball-capped slabs (diameter<1/2)."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    pts = point_set.points
    n, d = pts.shape
    best = 0.0
    for _ in range(trials):
        center = rng.random(d)
        r = 0.05 + 0.20 * rng.random()
        rel = pts - center
        rel -= np.round(rel)
        dist2 = np.sum(rel * rel, axis=1)
        inside = dist2 < r * r
        if d == 1:
            vol = 2.0 * r
        elif d == 2:
            vol = math.pi * r * r
        else:
            vol = (math.pi ** (d / 2) / math.gamma(d / 2 + 1)) * r ** d
        dev = abs(np.count_nonzero(inside) / n - vol)
        best = max(best, dev)
        if d == 2:
            # slab through the ball: chord constraints a <= <u, x-c> < b
            phi = 2.0 * math.pi * rng.random()
            u = np.array([math.cos(phi), math.sin(phi)])
            a, b = np.sort(rng.uniform(-r, r, size=2))
            if b - a < 1e-9:
                continue
            t = rel @ u
            dev = abs(np.count_nonzero(inside & (t >= a) & (t < b)) / n
                      - _disk_band_area(r, a, b))
            best = max(best, dev)
    return float(best)


def _disk_band_area(r, a, b):
    """Area of {x in disk of radius r : a <= x_1 < b}."""
    def left_of(h):
        # area of the disk portion with first coordinate <= h
        h = max(-r, min(r, h))
        return r * r * math.acos(-h / r) + h * math.sqrt(max(r * r - h * h, 0.0))

    return left_of(b) - left_of(a)


def isotropic_upper_relation(d, d_n):
    """The comparison bound (4 d sqrt(d) + 1) * D_N^{1/d}."""
    return (4.0 * d * math.sqrt(d) + 1.0) * d_n ** (1.0 / d)


# ---------------------------------------------------------------------------
# ETK and Van der Corput inequalities
# ---------------------------------------------------------------------------

def default_etk_constant(d):
    return 2.0 * (1.5 ** d)


def exponential_sums(point_set, h0):
    """(1/N) sum_n e^{2 pi i <h, x_n>} for all 0 < |h|_sup <= h0.

    Returns (hs, sums): integer vectors (one per row, up to overall sign)
    and the complex averaged sums.
    """
    pts = point_set.points
    n, d = pts.shape
    z = np.exp(2j * math.pi * pts)
    if d == 1:
        hs = np.arange(1, h0 + 1)[:, None]
        sums = np.empty(h0, dtype=np.complex128)
        w = np.ones(n, dtype=np.complex128)
        for k in range(h0):
            w = w * z[:, 0]
            sums[k] = w.sum() / n
        return hs, sums
    if d == 2:
        hs_list, sums_list = [], []
        # rows h1 = 0..h0; for h1 = 0 only h2 > 0 (conjugate symmetry)
        pow2 = {}
        w2 = np.ones(n, dtype=np.complex128)
        pow2[0] = w2.copy()
        for k in range(1, h0 + 1):
            w2 = w2 * z[:, 1]
            pow2[k] = w2.copy()
        w1 = np.ones(n, dtype=np.complex128)
        for h1 in range(0, h0 + 1):
            lo = 1 if h1 == 0 else -h0
            for h2 in range(lo, h0 + 1):
                p2 = pow2[abs(h2)]
                term = p2 if h2 >= 0 else np.conj(p2)
                hs_list.append((h1, h2))
                sums_list.append((w1 * term).sum() / n)
            w1 = w1 * z[:, 0]
        return np.array(hs_list), np.array(sums_list)
    raise ValueError("exponential sums implemented for d <= 2")


def etk_bound(point_set, h0, c_d=None):
    """Right-hand side of the ETK discrepancy inequality."""
    if h0 < 1:
        raise ValueError("h0 must be >= 1")
    d = point_set.d
    if c_d is None:
        c_d = default_etk_constant(d)
    hs, sums = exponential_sums(point_set, h0)
    r = np.prod(np.maximum(np.abs(hs), 1), axis=1).astype(np.float64)
    # vectors are enumerated up to sign; |S(-h)| = |S(h)| doubles each term
    total = 2.0 * np.sum(np.abs(sums) / r)
    return float(c_d * (1.0 / h0 + total))


def vdc_inequality(u, h):
    """Both sides of the Van der Corput inequality for |u_n| = 1."""
    u = np.asarray(u, dtype=np.complex128)
    n = u.shape[0]
    if not 1 <= h <= n:
        raise ValueError("window must satisfy 1 <= H <= N")
    lhs = abs(u.sum() / n) ** 2
    rhs = (n + h - 1) / (n * n * h) * np.sum(np.abs(u) ** 2)
    for k in range(1, h):
        corr = np.sum(u[:n - k] * np.conj(u[k:]))
        rhs += (2.0 * (n + h - 1)) / (n * n * h * h) * (h - k) * corr.real
    return float(lhs), float(rhs)


# ---------------------------------------------------------------------------
# combinatorial identities
# ---------------------------------------------------------------------------

def comb_identity(s, r):
    """Alternating binomial sums over the cube {0,1}^s.

    Returns (value at order s-1, value at order s); exact integers.  The
    first must vanish and the second equals the product of the r_t.
    """
    r = list(r)
    if s < 1 or len(r) != s or any(rt < 1 for rt in r):
        raise ValueError("need s >= 1 positive integers")
    v1 = 0
    v2 = 0
    for mask in range(1 << s):
        tot = 0
        bits = 0
        for t in range(s):
            if mask >> t & 1:
                tot += r[t]
                bits += 1
        sign = -1 if (s - bits) % 2 else 1
        v1 += sign * math.comb(tot, s - 1)
        v2 += sign * math.comb(tot, s)
    return v1, v2


# ---------------------------------------------------------------------------
# decay-rate fits
# ---------------------------------------------------------------------------

@dataclass
class RateFit:
    pairs: list
    slope: float
    stderr: float
    window: tuple = field(default=None)

    @property
    def delta_hat(self):
        return -self.slope


def decay_rate_fit(samples):
    """Least-squares slope of log D against log N with its standard error."""
    samples = sorted(samples)
    if len(samples) < 5:
        raise ValueError("need at least 5 scales")
    ns = np.array([float(n) for n, _ in samples])
    ds = np.array([float(v) for _, v in samples])
    if np.any(np.diff(ns) <= 0):
        raise ValueError("sample sizes must be strictly increasing")
    if ns[-1] / ns[0] < 100.0:
        raise ValueError("scales must span at least two decades")
    x = np.log(ns)
    yv = np.log(ds)
    xm = x - x.mean()
    slope = float(np.dot(xm, yv) / np.dot(xm, xm))
    intercept = float(yv.mean() - slope * x.mean())
    res = yv - (slope * x + intercept)
    dof = max(len(x) - 2, 1)
    stderr = float(math.sqrt(np.dot(res, res) / dof / np.dot(xm, xm)))
    return RateFit(list(samples), slope, stderr, (ns[0], ns[-1]))
