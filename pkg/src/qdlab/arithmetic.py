"""Continued fractions, Diophantine classification, Liouville frequencies.

Frequencies are carried as exact fixed-point integers A/2^B with B >= 80
fractional bits (default 128).  All distance-to-nearest-integer computations
reduce to exact integer arithmetic on A, so height scans at 1e4..1e6 do not
lose precision near good rational approximations.
"""

import math
import re
from dataclasses import dataclass, field

from mpmath import mp

DEFAULT_BITS = 128
LIOUVILLE_PRECISION_CAP = 4096


class Frequency:
    """A scalar frequency in (0,1) at a fixed binary precision."""

    def __init__(self, value, bits=DEFAULT_BITS, label=None):
        self.bits = int(bits)
        with mp.workprec(self.bits + 16):
            x = mp.frac(mp.mpf(value))
            self.num = int(mp.floor(x * (1 << self.bits) + mp.mpf("0.5")))
        self.num %= (1 << self.bits)
        self.label = label

    @property
    def modulus(self):
        return 1 << self.bits

    def fixed_int(self, bits):
        if bits <= self.bits:
            return self.num >> (self.bits - bits)
        return self.num << (bits - self.bits)

    def __float__(self):
        return self.num / self.modulus

    def mpf(self):
        with mp.workprec(self.bits + 16):
            return mp.mpf(self.num) / self.modulus

    def __repr__(self):
        return f"Frequency({self.label or float(self)}, bits={self.bits})"


def _golden(bits):
    with mp.workprec(bits + 16):
        return Frequency((mp.sqrt(5) - 1) / 2, bits, "golden")


def _sqrt2m1(bits):
    with mp.workprec(bits + 16):
        return Frequency(mp.sqrt(2) - 1, bits, "sqrt2m1")


def _sqrt3m1(bits):
    with mp.workprec(bits + 16):
        return Frequency(mp.sqrt(3) - 1, bits, "sqrt3m1")


_LIOUVILLE_RE = re.compile(r"^liouville\(\s*([0-9.]+)\s*,\s*(\d+)\s*\)$")


def parse_frequency(text, bits=DEFAULT_BITS):
    """Accepts a decimal string or one of the symbolic tags
    {golden, sqrt2m1, sqrt3m1, liouville(gamma,K)}."""
    if isinstance(text, Frequency):
        return text
    if isinstance(text, (int, float)):
        return Frequency(text, bits)
    text = text.strip()
    if text == "golden":
        return _golden(bits)
    if text == "sqrt2m1":
        return _sqrt2m1(bits)
    if text == "sqrt3m1":
        return _sqrt3m1(bits)
    m = _LIOUVILLE_RE.match(text)
    if m:
        freq, _ = liouville_construct(float(m.group(1)), int(m.group(2)))
        return freq
    try:
        val = mp.mpf(text)
    except Exception as exc:
        raise ValueError(f"cannot parse frequency {text!r}") from exc
    if not 0 < val < 1:
        raise ValueError(f"frequency must lie in (0,1), got {text!r}")
    return Frequency(val, bits)


def dist_to_integers(freq, k):
    """Exact ||k * alpha|| computed on the fixed-point lattice."""
    s = (k * freq.num) % freq.modulus
    return min(s, freq.modulus - s) / freq.modulus


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------

@dataclass
class ContinuedFractionExpansion:
    partial_quotients: list
    convergents: list          # (p_k, q_k) pairs, k = 1..depth
    truncated: bool = False
    planted: list = field(default_factory=list)   # (q_n, q_{n+1}) growth pairs

    @property
    def depth(self):
        return len(self.partial_quotients)

    @property
    def denominators(self):
        return [q for _, q in self.convergents]


def continued_fraction(alpha, K):
    """First K partial quotients / convergents of alpha in (0,1).

    Runs Euclid on the exact fixed-point representation A/2^B and stops
    (flagging truncation) once the remaining precision cannot certify more
    quotients: convergents of the rational proxy agree with those of alpha
    while q_k * q_{k+1} stays well below 2^B.
    """
    if K < 1:
        raise ValueError("depth must be >= 1")
    freq = parse_frequency(alpha) if not isinstance(alpha, Frequency) else alpha
    a_num, modulus = freq.num, freq.modulus
    if a_num == 0:
        raise ValueError("frequency is zero to working precision")
    quotients = []
    convergents = []
    p_prev, q_prev = 1, 0
    p_cur, q_cur = 0, 1
    num, den = modulus, a_num      # expanding 1/alpha, so a_1 = floor(1/alpha)
    budget = modulus >> 4
    truncated = False
    while len(quotients) < K:
        if den == 0:
            truncated = True
            break
        a, rem = divmod(num, den)
        p_next = a * p_cur + p_prev
        q_next = a * q_cur + q_prev
        if q_next * q_cur >= budget:
            truncated = True
            break
        quotients.append(a)
        convergents.append((p_next, q_next))
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_next, q_next
        num, den = den, rem
    return ContinuedFractionExpansion(quotients, convergents, truncated)


# ---------------------------------------------------------------------------
# Diophantine scans
# ---------------------------------------------------------------------------

def _norm_linear_form(freqs, h, bits):
    modulus = 1 << bits
    s = 0
    for hi, f in zip(h, freqs):
        s += hi * f.fixed_int(bits)
    s %= modulus
    return min(s, modulus - s) / modulus


def diophantine_check(freqs, tau, H, conditions=("dc", "wdc", "pdc")):
    """Empirical Diophantine constants up to height H.

    For each requested condition, reports the minimal observed value of
    ||<h, alpha>|| * r(h)^tau (resp. the WDC / coprime variants) over
    admissible integer vectors, with the arg-min.  A report, not a boolean:
    membership is undecidable from finite data.
    """
    freqs = [parse_frequency(f) for f in freqs]
    d = len(freqs)
    bits = max(f.bits for f in freqs)
    report = {"tau": float(tau), "H": int(H)}

    if "dc" in conditions:
        best, argmin = math.inf, None
        for h in _height_vectors(d, H):
            r = 1
            for hi in h:
                r *= max(abs(hi), 1)
            val = _norm_linear_form(freqs, h, bits) * r ** tau
            if val < best:
                best, argmin = val, h
        report["dc"] = {"c": best, "h": argmin}

    if "wdc" in conditions:
        best, argmin = math.inf, None
        for h in range(1, H + 1):
            val = max(dist_to_integers(f, h) for f in freqs) * h ** tau
            if val < best:
                best, argmin = val, h
        report["wdc"] = {"c": best, "h": argmin}

    if "pdc" in conditions and d == 2:
        best, argmin = math.inf, None
        for h1 in range(0, H + 1):
            for h2 in range(-H, H + 1):
                if h1 == 0 and h2 <= 0:
                    continue
                if not (h1 * h2 == 0 or math.gcd(h1, abs(h2)) == 1):
                    continue
                sup = max(h1, abs(h2))
                val = _norm_linear_form(freqs, (h1, h2), bits) * sup ** tau
                if val < best:
                    best, argmin = val, (h1, h2)
        report["pdc"] = {"c": best, "h": argmin}

    return report


def _height_vectors(d, H):
    """Nonzero integer vectors with r(h) <= H, up to overall sign."""
    if d == 1:
        for h in range(1, H + 1):
            yield (h,)
        return
    if d == 2:
        for h1 in range(0, H + 1):
            r1 = max(h1, 1)
            for h2 in range(-(H // r1), H // r1 + 1):
                if h1 == 0 and h2 <= 0:
                    continue
                yield (h1, h2)
        return
    # small-d recursion, first nonzero entry positive
    def rec(prefix, rem):
        i = len(prefix)
        if i == d:
            if any(prefix):
                yield tuple(prefix)
            return
        lead_zero = not any(prefix)
        for hi in range(0 if lead_zero else -rem, rem + 1):
            yield from rec(prefix + [hi], rem // max(abs(hi), 1))
    yield from rec([], H)


# ---------------------------------------------------------------------------
# best simultaneous approximations
# ---------------------------------------------------------------------------

@dataclass
class SimultaneousApproximation:
    records: list      # (m, l_vector, err) with err strictly decreasing


def best_simultaneous_approximations(freqs, qmax):
    """Strict-improvement records of sum_j ||m alpha_j||^2 for m = 1..qmax."""
    if qmax < 2:
        raise ValueError("qmax must be >= 2")
    freqs = [parse_frequency(f) for f in freqs]
    bits = max(f.bits for f in freqs)
    modulus = 1 << bits
    nums = [f.fixed_int(bits) for f in freqs]
    state = [0] * len(nums)
    records = []
    best = None
    for m in range(1, qmax + 1):
        err2 = 0.0
        for j, a in enumerate(nums):
            state[j] = (state[j] + a) % modulus
            s = state[j]
            dist = min(s, modulus - s)
            err2 += (dist / modulus) ** 2
        if best is None or err2 < best:
            best = err2
            lvec = tuple((m * a + modulus // 2) // modulus for a in nums)
            records.append((m, lvec, math.sqrt(err2)))
    return SimultaneousApproximation(records)


def simultaneous_record_bound(d, m_next):
    """Upper bound on the record error in terms of the next denominator."""
    return 2.0 * math.gamma(d / 2 + 1) ** (1.0 / d) / (
        math.sqrt(math.pi) * m_next ** (1.0 / d))


# ---------------------------------------------------------------------------
# Liouville-type frequencies
# ---------------------------------------------------------------------------

def liouville_construct(gamma, K, initial_quotient=None):
    """Builds alpha whose denominators satisfy q_{k+1} > q_k^gamma K times.

    a_1 = 1; each planted quotient is the smallest a with
    q_{k+1} = a q_k + q_{k-1} > q_k^gamma (initial_quotient can enlarge the
    first planted one to place the scales where orbits stay computable).
    Precision is capped at 4096 bits; if the cap would be exceeded the
    construction stops early and reports the achieved scales.
    """
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    quotients = [1]
    p_prev, q_prev = 1, 0
    p_cur, q_cur = 0, 1
    # apply a_1 = 1
    p_cur, p_prev = 1 * p_cur + p_prev, p_cur
    q_cur, q_prev = 1 * q_cur + q_prev, q_cur
    planted = []
    for k in range(K):
        target = _pow_ceil(q_cur, gamma)
        a = (target - q_prev) // q_cur + 1
        if k == 0 and initial_quotient is not None:
            a = max(a, int(initial_quotient))
        q_next = a * q_cur + q_prev
        if q_next.bit_length() * 2 + 16 > LIOUVILLE_PRECISION_CAP:
            break
        quotients.append(a)
        p_next = a * p_cur + p_prev
        planted.append((q_cur, q_next))
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_next, q_next
    bits = LIOUVILLE_PRECISION_CAP
    # pad with quotient 1 until the precision budget is exhausted, so the
    # expansion stays infinite to working precision
    while (q_cur * (q_cur + q_prev)).bit_length() < bits - 8:
        quotients.append(1)
        p_cur, p_prev = p_cur + p_prev, p_cur
        q_cur, q_prev = q_cur + q_prev, q_cur
    with mp.workprec(bits + 16):
        freq = Frequency(mp.mpf(p_cur) / q_cur, bits,
                         f"liouville({gamma},{K})")
    cf = continued_fraction(freq, len(quotients))
    cf.planted = planted
    return freq, cf


def _pow_ceil(q, gamma):
    """Smallest integer >= q^gamma, exact for integer gamma."""
    if float(gamma).is_integer():
        return q ** int(gamma)
    with mp.workprec(max(64, q.bit_length() * 4)):
        return int(mp.ceil(mp.power(q, gamma)))
