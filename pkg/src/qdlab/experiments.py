"""Experiment configs, dispatch, and artifact output.

Configs are JSON documents; frequencies are strings (decimal or the
symbolic tags understood by parse_frequency) so precision survives the
round trip.  Identical config and seed give byte-identical CSV output: all
randomness flows through a seeded generator and floats are printed with 17
significant digits.
"""

import hashlib
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import cocycle as cc
from . import covering as cov
from . import equidistribution as eq
from . import remainder_sets as brs
from . import transport as tp
from .arithmetic import parse_frequency
from .torus import Shift, SkewShift, TorusPoint


class ConfigError(ValueError):
    """Invalid configuration, carrying the offending field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class ResultRecord:
    digest: str
    header: list
    rows: list
    summary: dict
    passed: bool
    wall_time: float
    output: str = None


def config_digest(config):
    """sha256 of the canonical (sorted-key) JSON; reorder-invariant."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _get(config, path, default=KeyError, kind=None):
    cur = config
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if default is KeyError:
                raise ConfigError(path, "missing required field")
            return default
        cur = cur[part]
    if kind is not None and not isinstance(cur, kind):
        raise ConfigError(path, f"expected {kind.__name__}")
    return cur


def _parse_map(config):
    kind = _get(config, "map.kind", kind=str)
    if kind == "shift":
        alpha = _get(config, "map.alpha")
        tags = alpha if isinstance(alpha, list) else [alpha]
        try:
            freqs = [parse_frequency(t) for t in tags]
        except ValueError as exc:
            raise ConfigError("map.alpha", str(exc)) from exc
        spec = Shift(TorusPoint(tuple(float(f) for f in freqs)))
        return {"kind": "shift", "freqs": freqs, "spec": spec, "d": len(freqs)}
    if kind == "skew":
        alpha = _get(config, "map.alpha")
        if isinstance(alpha, list):
            raise ConfigError("map.alpha", "skew map takes a scalar frequency")
        d = _get(config, "map.d", 2, kind=int)
        try:
            freq = parse_frequency(alpha)
        except ValueError as exc:
            raise ConfigError("map.alpha", str(exc)) from exc
        return {"kind": "skew", "freqs": freq,
                "spec": SkewShift(float(freq), d), "d": d}
    raise ConfigError("map.kind", f"unknown map kind {kind!r}")


def _parse_potential(config, default_zero=True):
    pot = config.get("potential")
    if pot is None:
        if default_zero:
            return cc.ZeroPotential()
        raise ConfigError("potential", "missing required field")
    kind = _get(config, "potential.kind", kind=str)
    if kind == "zero":
        return cc.ZeroPotential()
    if kind == "cosine":
        return cc.CosinePotential(_get(config, "potential.coupling"))
    if kind == "tabulated":
        return cc.TabulatedPotential(_get(config, "potential.values",
                                          kind=list))
    raise ConfigError("potential.kind", f"unknown potential kind {kind!r}")


def _require_seed(config):
    seed = config.get("seed")
    if not isinstance(seed, int):
        raise ConfigError("seed", "a seed is mandatory for randomized runs")
    return seed


def _orbit_discrepancy(mp, y0, n):
    """Discrepancy of the first n orbit points, exact where affordable."""
    if mp["d"] == 1:
        ps = eq.orbit_point_set(mp["kind"], mp["freqs"], y0, n)
        return eq.discrepancy_box(ps)
    if mp["d"] == 2 and n > eq.EXACT_2D_LIMIT:
        counts = eq.orbit_grid_counts(mp["kind"], mp["freqs"], y0, n,
                                      eq.GRID_RESOLUTION)
        return eq.discrepancy_from_grid_counts(counts, n)
    ps = eq.orbit_point_set(mp["kind"], mp["freqs"], y0, n)
    return eq.discrepancy_box(ps)


# ---------------------------------------------------------------------------
# runners (one per experiment kind)
# ---------------------------------------------------------------------------

def _run_identities(config):
    s_max = _get(config, "params.s_max", 4, kind=int)
    r_max = _get(config, "params.r_max", 5, kind=int)
    header = ["s", "r", "order_s_minus_1", "order_s", "product", "ok"]
    rows = []
    passed = True
    for s in range(1, s_max + 1):
        for r in _tuples(s, r_max):
            v1, v2 = eq.comb_identity(s, r)
            prod = math.prod(r)
            ok = (v1 == 0) and (v2 == prod)
            passed &= ok
            rows.append((s, ";".join(map(str, r)), v1, v2, prod, int(ok)))
    return header, rows, {"cases": len(rows)}, passed


def _tuples(s, r_max):
    if s == 0:
        yield ()
        return
    for rest in _tuples(s - 1, r_max):
        for r in range(1, r_max + 1):
            yield rest + (r,)


def _run_discrepancy_decay(config):
    mp = _parse_map(config)
    n_grid = [int(n) for n in _get(config, "params.n_grid", kind=list)]
    if not n_grid:
        raise ConfigError("params.n_grid", "grid must be nonempty")
    y0 = tuple(_get(config, "params.y0", [0.0] * mp["d"], kind=list))
    if len(y0) != mp["d"]:
        raise ConfigError("params.y0", "dimension mismatch with the map")
    header = ["n", "d_n", "method", "error_bound"]
    rows = []
    samples = []
    for n in sorted(n_grid):
        rep = _orbit_discrepancy(mp, y0, n)
        rows.append((n, rep.d_n, rep.method, rep.error_bound))
        samples.append((n, rep.d_n))
    summary = {}
    passed = True
    max_slope = _get(config, "params.max_slope", None)
    if len(samples) >= 5 and samples[-1][0] / samples[0][0] >= 100:
        fit = eq.decay_rate_fit(samples)
        summary = {"slope": fit.slope, "stderr": fit.stderr,
                   "delta_hat": fit.delta_hat}
        if max_slope is not None:
            passed = fit.slope <= float(max_slope)
            summary["max_slope"] = float(max_slope)
    elif max_slope is not None:
        raise ConfigError("params.n_grid",
                          "a slope threshold needs >= 5 scales over two decades")
    return header, rows, summary, passed


def _run_covering(config):
    mp = _parse_map(config)
    radii = [float(r) for r in _get(config, "params.radii", kind=list)]
    center = tuple(_get(config, "params.center", [0.0] * mp["d"], kind=list))
    mmax = _get(config, "params.mmax", 100000, kind=int)
    header = ["r", "m_cover", "grid", "certified"]
    rows = []
    passed = True
    results = []
    for r in radii:
        res = cov.covering_time(mp["spec"], r, center, mmax)
        rows.append((r, res.m_cover if res.covered else -1, res.grid,
                     "yes" if res.certified else "no"))
        passed &= res.covered
        results.append(res)
    summary = {}
    if passed and len(radii) >= 4 and radii[0] / radii[-1] >= 10.0:
        xs = np.log([1.0 / r for r in radii])
        ys = np.log([res.m_cover for res in results])
        summary["slope"] = float(np.polyfit(xs, ys, 1)[0])
    return header, rows, summary, passed


def _run_brs_remainder(config):
    variant = _get(config, "params.variant", kind=str)
    nmax = _get(config, "params.nmax", kind=int)
    x0 = config.get("params", {}).get("x0")
    if variant == "interval":
        alpha = parse_frequency(_get(config, "params.alpha"))
        tf = brs.interval_transfer(float(alpha),
                                   _get(config, "params.q", kind=int),
                                   _get(config, "params.p", kind=int))
        alpha_vec = [float(alpha)]
    elif variant == "parallelogram":
        a1 = parse_frequency(_get(config, "params.alpha1"))
        a2 = parse_frequency(_get(config, "params.alpha2"))
        tf = brs.parallelogram_transfer(
            float(a1), float(a2),
            _get(config, "params.m", kind=int),
            _get(config, "params.l1", kind=int),
            _get(config, "params.l2", kind=int),
            _get(config, "params.q", kind=int),
            _get(config, "params.p", kind=int))
        alpha_vec = [float(a1), float(a2)]
    else:
        raise ConfigError("params.variant", f"unknown variant {variant!r}")
    if x0 is None:
        rng = np.random.default_rng(_require_seed(config))
        x0 = rng.random(len(alpha_vec)).tolist()
    sup = brs.remainder_sup(tf.membership, tf.volume, alpha_vec,
                            np.asarray(x0, dtype=np.float64), nmax)
    bound = 2.0 * tf.bound
    passed = sup <= bound
    header = ["nmax", "remainder_sup", "bound", "ok"]
    rows = [(nmax, sup, bound, int(passed))]
    return header, rows, {"sup": sup, "bound": bound}, passed


def _run_lyapunov_scan(config):
    mp = _parse_map(config)
    phi = _parse_potential(config)
    seed = _require_seed(config)
    lo, hi, count = _get(config, "params.energies", kind=list)
    n = _get(config, "params.n", kind=int)
    phases = _get(config, "params.phases", kind=int)
    min_l = _get(config, "params.min_l", None)
    header = ["E", "lhat", "stderr", "lhat_grid", "n", "phases"]
    rows = []
    passed = True
    worst = math.inf
    for i, e in enumerate(np.linspace(float(lo), float(hi), int(count))):
        est = cc.lyapunov_estimate(mp["spec"], float(e), n, phases,
                                   seed + i, phi)
        rows.append((float(e), est.lhat, est.stderr, est.lhat_grid,
                     n, phases))
        worst = min(worst, est.lhat)
        if min_l is not None and est.lhat < float(min_l):
            passed = False
    return header, rows, {"min_lhat": worst}, passed


def _run_dt_integral(config):
    mp = _parse_map(config)
    phi = _parse_potential(config)
    t_list = [float(t) for t in _get(config, "params.t_list", kind=list)]
    rho = float(_get(config, "params.rho"))
    k_bound = float(_get(config, "params.k_bound"))
    e_count = _get(config, "params.e_count", 201, kind=int)
    theta = tuple(_get(config, "params.theta", [0.0] * mp["d"], kind=list))
    header = ["T", "integral", "rho", "k_bound"]
    rows = []
    values = []
    for t in t_list:
        val, _ = cc.dt_integral(mp["spec"], TorusPoint(theta), t, rho,
                                e_count, k_bound, phi)
        rows.append((t, val, rho, k_bound))
        values.append(val)
    summary = {}
    passed = True
    max_ratio = _get(config, "params.max_ratio", None)
    if len(values) >= 2:
        summary["ratio"] = values[-1] / values[0]
        if max_ratio is not None:
            passed = summary["ratio"] <= float(max_ratio)
    return header, rows, summary, passed


def _run_transport_beta(config):
    mp = _parse_map(config)
    phi = _parse_potential(config)
    p = float(_get(config, "params.p", 2.0))
    t_grid = [float(t) for t in _get(config, "params.t_grid", kind=list)]
    theta = tuple(_get(config, "params.theta", [0.0] * mp["d"], kind=list))
    l_box = _get(config, "params.l_box", None)
    est = tp.beta_estimate(mp["spec"], TorusPoint(theta), phi, p, t_grid,
                           l_box=l_box)
    header = ["beta_low", "beta_high", "p", "t_max"]
    rows = [(est.low, est.high, p, max(t_grid))]
    summary = {"beta_low": est.low, "beta_high": est.high}
    passed = True
    lo = _get(config, "params.require_low", None)
    hi = _get(config, "params.require_high", None)
    if lo is not None:
        passed &= est.low >= float(lo)
    if hi is not None:
        passed &= est.high <= float(hi)
    return header, rows, summary, passed


def _run_transport_xi(config):
    mp = _parse_map(config)
    phi = _parse_potential(config)
    taus = [float(t) for t in _get(config, "params.tau_levels", kind=list)]
    t_grid = [float(t) for t in _get(config, "params.t_grid", kind=list)]
    theta = tuple(_get(config, "params.theta", [0.0] * mp["d"], kind=list))
    l_box = _get(config, "params.l_box", None)
    est = tp.xi_estimate(mp["spec"], TorusPoint(theta), phi, taus, t_grid,
                         l_box=l_box)
    header = ["T", "front_l", "tau"]
    lead = sorted(taus)[0]
    rows = [(t, front, lead)
            for t, front in zip(sorted(t_grid), est.fronts[lead])]
    summary = {"xi_low": est.low, "xi_high": est.high}
    passed = True
    lo = _get(config, "params.require_low", None)
    hi = _get(config, "params.require_high", None)
    if lo is not None:
        passed &= est.low >= float(lo)
    if hi is not None:
        passed &= est.high <= float(hi)
    return header, rows, summary, passed


RUNNERS = {
    "identities": _run_identities,
    "discrepancy_decay": _run_discrepancy_decay,
    "covering": _run_covering,
    "brs_remainder": _run_brs_remainder,
    "lyapunov_scan": _run_lyapunov_scan,
    "dt_integral": _run_dt_integral,
    "transport_beta": _run_transport_beta,
    "transport_xi": _run_transport_xi,
}

EXPERIMENT_KINDS = {
    "identities": "exhaustive combinatorial identity checks",
    "discrepancy_decay": "orbit discrepancy versus N with a rate fit",
    "covering": "covering times over a radius list",
    "brs_remainder": "bounded remainder sup along a rotation orbit",
    "lyapunov_scan": "Lyapunov estimates over an energy grid",
    "dt_integral": "damped transfer-product integral versus T",
    "transport_beta": "moment growth exponent bracket",
    "transport_xi": "spreading front exponent bracket",
}


def run_experiment(config):
    """Validates and executes a config; returns a ResultRecord."""
    if not isinstance(config, dict):
        raise ConfigError("", "config must be a JSON object")
    kind = _get(config, "experiment", kind=str)
    if kind not in RUNNERS:
        raise ConfigError("experiment", f"unknown experiment {kind!r}")
    start = time.perf_counter()
    header, rows, summary, passed = RUNNERS[kind](config)
    wall = time.perf_counter() - start
    record = ResultRecord(config_digest(config), header, rows, summary,
                          passed, wall, config.get("output"))
    if record.output:
        write_csv(record.output, header, rows)
    return record


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
