"""Cocycle products: cocycle law, unimodularity, Lyapunov estimators."""

import math

import numpy as np
import pytest

import qdlab.cocycle as cc
from qdlab.arithmetic import parse_frequency
from qdlab.torus import Shift, SkewShift, TorusPoint, step

GOLDEN = float(parse_frequency("golden"))
SHIFT1 = Shift(TorusPoint((GOLDEN,)))


def full_matrix(prod):
    return prod.matrix * math.exp(prod.logscale)


def test_transfer_matrix_unimodular():
    phi = cc.CosinePotential(1.5)
    m = cc.transfer_matrix(TorusPoint((0.3,)), 2.0, phi)
    assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-14)
    assert m[0, 0] == pytest.approx(2.0 - 3.0 * math.cos(2 * math.pi * 0.3))


def test_cocycle_law():
    # A_{n+m}(theta) = A_n(f^m theta) A_m(theta)
    phi = cc.CosinePotential(1.0)
    theta = TorusPoint((0.1,))
    z = 0.7
    n, m = 6, 9
    whole = full_matrix(cc.cocycle_product(SHIFT1, theta, z, n + m, phi))
    tail_phase = theta
    for _ in range(m):
        tail_phase = step(SHIFT1, tail_phase)
    head = full_matrix(cc.cocycle_product(SHIFT1, theta, z, m, phi))
    tail = full_matrix(cc.cocycle_product(SHIFT1, tail_phase, z, n, phi))
    assert np.allclose(whole, tail @ head, rtol=1e-10)


def test_zero_steps_give_identity():
    phi = cc.ZeroPotential()
    prod = cc.cocycle_product(SHIFT1, TorusPoint((0.0,)), 1.0, 0, phi)
    assert np.array_equal(prod.matrix, np.eye(2))
    assert prod.log_norm() == pytest.approx(0.0)
    assert prod.det_log() == pytest.approx(0.0)


def test_determinant_drift_stays_tiny_in_elliptic_regime():
    phi = cc.ZeroPotential()
    prod = cc.cocycle_product(SHIFT1, TorusPoint((0.0,)), 0.5, 50000, phi)
    assert abs(prod.det_log()) < 1e-9
    assert prod.log_norm() < 2.0     # bounded, no growth at |E| < 2


def test_constant_potential_growth_rate():
    # zero potential at E = 3: the product is a constant hyperbolic matrix
    # power, Lyapunov exponent log((3 + sqrt 5)/2)
    phi = cc.ZeroPotential()
    n = 4000
    prod = cc.cocycle_product(SHIFT1, TorusPoint((0.0,)), 3.0, n, phi)
    target = math.log((3.0 + math.sqrt(5.0)) / 2.0)
    assert prod.log_norm() / n == pytest.approx(target, abs=1e-3)


def test_python_product_matches_kernel_batch():
    phi = cc.CosinePotential(2.0)
    theta = TorusPoint((0.123,))
    for z in (0.4, complex(0.4, 0.01)):
        prod = cc.cocycle_product(SHIFT1, theta, z, 300, phi)
        lognorm, _ = cc._batch_lognorms(SHIFT1, [theta.coords], z, 300, phi)
        assert prod.log_norm() == pytest.approx(float(lognorm[0]), abs=1e-9)


def test_potential_sequence_directions():
    phi = cc.CosinePotential(1.0)
    theta = TorusPoint((0.25,))
    fwd = cc.potential_sequence(SHIFT1, theta, 3, phi, forward=True)
    assert fwd[0] == pytest.approx(2.0 * math.cos(2 * math.pi * 0.25))
    back = cc.potential_sequence(SHIFT1, theta, 3, phi, forward=False)
    from qdlab.torus import inverse_step
    prev = inverse_step(SHIFT1, theta)
    assert back[0] == pytest.approx(
        2.0 * math.cos(2 * math.pi * prev.coords[0]), abs=1e-12)


def test_lyapunov_estimate_deterministic_and_above_herman():
    phi = cc.CosinePotential(3.0)
    a = cc.lyapunov_estimate(SHIFT1, 0.0, 2000, 16, seed=7, phi=phi)
    b = cc.lyapunov_estimate(SHIFT1, 0.0, 2000, 16, seed=7, phi=phi)
    assert a.lhat == b.lhat
    assert a.lhat >= math.log(3.0) - 0.05
    assert a.lhat_grid >= math.log(3.0) - 0.05
    c = cc.lyapunov_estimate(SHIFT1, 0.0, 2000, 16, seed=8, phi=phi)
    assert c.lhat != a.lhat


def test_finite_n_estimates_decrease_toward_the_limit():
    # (1/n) E log ||A_n|| is subadditive in n, so the estimate at a longer
    # window cannot sit above the shorter one by more than sampling noise
    phi = cc.CosinePotential(3.0)
    short = cc.lyapunov_estimate(SHIFT1, 0.5, 500, 32, seed=3, phi=phi)
    long = cc.lyapunov_estimate(SHIFT1, 0.5, 8000, 32, seed=3, phi=phi)
    assert long.lhat <= short.lhat + 3.0 * short.stderr + 1e-6


def test_uniform_upper_scan_dominates_the_mean():
    phi = cc.CosinePotential(3.0)
    est = cc.lyapunov_estimate(SHIFT1, 1.0, 1000, 32, seed=5, phi=phi)
    upper = cc.uniform_upper_scan(SHIFT1, 1.0, 1000, 64, phi)
    assert upper >= est.lhat_grid - 1e-9


def test_window_lower_bound_improves_with_window():
    phi = cc.CosinePotential(3.0)
    theta = TorusPoint((0.37,))
    base = cc.window_lower_bound(SHIFT1, theta, 0.2, 200, 0, phi)
    wide = cc.window_lower_bound(SHIFT1, theta, 0.2, 200, 8, phi)
    assert wide >= base - 1e-9


def test_dt_integrand_bounded_by_one():
    phi = cc.CosinePotential(3.0)
    val, integrand = cc.dt_integral(SHIFT1, TorusPoint((0.0,)), 100.0, 0.3,
                                    41, 9.0, phi)
    assert np.all(integrand <= 1.0 + 1e-12)
    assert 0.0 < val <= 18.0 + 1e-9
    with pytest.raises(ValueError):
        cc.dt_integral(SHIFT1, TorusPoint((0.0,)), 100.0, 0.3, 41, 2.0, phi)


def test_dt_integral_decays_for_localized_potential():
    phi = cc.CosinePotential(3.0)
    i1, _ = cc.dt_integral(SHIFT1, TorusPoint((0.0,)), 100.0, 0.3, 41, 9.0,
                           phi)
    i2, _ = cc.dt_integral(SHIFT1, TorusPoint((0.0,)), 1000.0, 0.3, 41, 9.0,
                           phi)
    assert i2 < i1


def test_kkl_truncation_monotone_in_eps():
    phi = cc.CosinePotential(3.0)
    theta = TorusPoint((0.2,))
    minus1, plus1 = cc.kkl_truncation(SHIFT1, theta, 0.5, 0.5, phi)
    minus2, plus2 = cc.kkl_truncation(SHIFT1, theta, 0.5, 0.05, phi)
    assert minus1.satisfied and plus1.satisfied
    assert minus2.length >= minus1.length
    assert plus2.length >= plus1.length


def test_kkl_truncation_unsatisfiable_direction_flagged():
    # elliptic zero potential: norms stay O(1), so a tiny eps cannot be
    # reached inside the window
    phi = cc.ZeroPotential()
    theta = TorusPoint((0.2,))
    minus, plus = cc.kkl_truncation(SHIFT1, theta, 0.5, 1e-6, phi,
                                    max_window=256)
    assert not minus.satisfied
    assert not plus.satisfied
    assert minus.length == 256.0


def test_kkl_truncation_validation():
    with pytest.raises(ValueError):
        cc.kkl_truncation(SHIFT1, TorusPoint((0.1,)), 0.5, 0.0,
                          cc.ZeroPotential())


def test_holder_certificate_respects_declared_constant():
    phi = cc.CosinePotential(2.0)
    observed, declared = cc.holder_certificate(phi, 1, 2000, seed=5)
    assert observed <= declared + 1e-9


def test_piecewise_and_tabulated_potentials():
    pieces = [(((0.0,), (0.5,)), lambda p: np.full(p.shape[0], 1.0),
               1.0, 0.0),
              (((0.5,), (1.0,)), lambda p: np.full(p.shape[0], -1.0),
               1.0, 0.0)]
    phi = cc.PiecewiseHolderPotential(pieces)
    vals = phi(np.array([[0.1], [0.7]]))
    assert list(vals) == [1.0, -1.0]

    tab = cc.TabulatedPotential([3.0, -2.0])
    assert tab.sup_bound == 3.0
    vals = tab(np.array([[0.1], [0.9]]))
    assert list(vals) == [3.0, -2.0]


def test_skew_shift_cocycle_runs():
    phi = cc.CosinePotential(3.0)
    skew = SkewShift(GOLDEN, 2)
    est = cc.lyapunov_estimate(skew, 0.0, 1000, 8, seed=2, phi=phi)
    assert est.lhat >= math.log(3.0) - 0.05
