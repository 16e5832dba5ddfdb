"""Compiled and fallback kernels must agree on shared workloads."""

import numpy as np
import pytest

from qdlab import _fallback
from qdlab.backend import BACKEND

compiled = pytest.importorskip(
    "qdlab._kernels", reason="compiled extension not built")


def test_backend_selection_reports_a_known_name():
    assert BACKEND in ("compiled", "fallback")


def test_shift_chunk_identical():
    y0 = np.array([0.125, 0.375])
    alpha = np.array([0.6180339887498949, 0.41421356237309503])
    a = compiled.shift_chunk(y0, alpha, 5000)
    b = _fallback.shift_chunk(y0, alpha, 5000)
    assert np.array_equal(a, b)


def test_skew_chunk_agrees_to_rounding():
    y0 = np.array([0.125, 0.375])
    a = compiled.skew_chunk(y0, 0.6180339887498949, 5000)
    b = _fallback.skew_chunk(y0, 0.6180339887498949, 5000)
    # summation order differs (cumsum vs sequential); production re-anchors
    # exactly every 16384 steps, so rounding-level agreement suffices
    delta = np.abs(a - b)
    delta = np.minimum(delta, 1.0 - delta)
    assert np.max(delta) < 1e-10


def test_discrepancy_scans_identical():
    rng = np.random.default_rng(59)
    xs = np.sort(rng.random(20000))
    assert compiled.exact_discrepancy_1d(xs) == \
        _fallback.exact_discrepancy_1d(xs)
    counts = rng.integers(0, 10, size=(128, 128)).astype(np.int64)
    n = int(counts.sum())
    assert compiled.grid_discrepancy_2d(counts, n) == \
        _fallback.grid_discrepancy_2d(counts, n)


def test_cocycle_batch_agrees():
    rng = np.random.default_rng(61)
    v = 3.0 * np.cos(2 * np.pi * rng.random((8, 3000)))
    for e, eta in ((0.5, 0.0), (0.5, 0.01)):
        ln_c, _ = compiled.cocycle_batch(v, e, eta)
        ln_f, _ = _fallback.cocycle_batch(v, e, eta)
        assert np.allclose(ln_c, ln_f, atol=1e-8)
    # the carried determinant is only meaningful for bounded products; in
    # the elliptic regime both backends must agree that it stays unimodular
    v0 = np.zeros((2, 3000))
    _, dl_c = compiled.cocycle_batch(v0, 0.5)
    _, dl_f = _fallback.cocycle_batch(v0, 0.5)
    assert np.max(np.abs(dl_c)) < 1e-10
    assert np.max(np.abs(dl_f)) < 1e-10


def test_cocycle_batch_inverse_inverts():
    rng = np.random.default_rng(67)
    v = rng.uniform(-1.0, 1.0, size=(1, 500))
    fwd, _ = compiled.cocycle_batch(v, 0.3)
    # the inverse product over the reversed sequence is the matrix inverse,
    # and a unimodular 2x2 matrix has the same spectral norm as its inverse
    inv, _ = compiled.cocycle_batch(v[:, ::-1].copy(), 0.3, inverse=True)
    assert fwd[0] == pytest.approx(inv[0], abs=1e-8)


def test_cocycle_lognorms_all_agrees_and_matches_batch():
    rng = np.random.default_rng(71)
    v = 3.0 * np.cos(2 * np.pi * rng.random(2000))
    a = compiled.cocycle_lognorms_all(v, 0.25)
    b = _fallback.cocycle_lognorms_all(v, 0.25)
    assert np.allclose(a, b, atol=1e-8)
    final, _ = compiled.cocycle_batch(v[None, :], 0.25)
    assert a[-1] == pytest.approx(float(final[0]), abs=1e-8)


def test_cheb_apply_agrees():
    rng = np.random.default_rng(73)
    diag = rng.standard_normal(512) / 8.0
    psi = np.zeros(512, dtype=np.complex128)
    psi[256] = 1.0
    coeffs = (rng.standard_normal(80) + 1j * rng.standard_normal(80)) / 80.0
    a = compiled.cheb_apply(diag, 0.25, coeffs, psi)
    b = _fallback.cheb_apply(diag, 0.25, coeffs, psi)
    assert np.max(np.abs(a - b)) < 1e-12
