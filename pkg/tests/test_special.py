import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp

from qelab.special import (
    BesselUnderflowWarning,
    BracketError,
    airy_zero,
    airy_zeros,
    bessel_j,
    bessel_jp,
    bessel_zero,
    bessel_zeros_nk,
    bessel_zeros_below,
    envelope_bound,
    z_of_zeta,
)


def series_j(n, x, terms=80):
    """Power series for J_n in extended precision (independent oracle)."""
    with mpmath.workdps(60):
        x = mpmath.mpf(x)
        s = mpmath.mpf(0)
        for m in range(terms):
            s += (-1) ** m / (mpmath.factorial(m) * mpmath.factorial(m + n)) * (x / 2) ** (2 * m + n)
        return s


def bisect(f, a, b, iters=200):
    fa = f(a)
    for _ in range(iters):
        m = (a + b) / 2
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return (a + b) / 2


def airy_series(x):
    """Maclaurin series of Ai in extended precision."""
    with mpmath.workdps(50):
        x = mpmath.mpf(x)
        c1 = 1 / (mpmath.power(3, mpmath.mpf(2) / 3) * mpmath.gamma(mpmath.mpf(2) / 3))
        c2 = 1 / (mpmath.power(3, mpmath.mpf(1) / 3) * mpmath.gamma(mpmath.mpf(1) / 3))
        f = g = mpmath.mpf(0)
        tf, tg = mpmath.mpf(1), x
        for k in range(200):
            f += tf
            g += tg
            tf *= x ** 3 / ((3 * k + 2) * (3 * k + 3))
            tg *= x ** 3 / ((3 * k + 3) * (3 * k + 4))
        return c1 * f - c2 * g


def test_j0_at_zero():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0


def test_j1_first_zero_by_series_bisection():
    root = bisect(lambda x: float(series_j(1, x)), 3.5, 4.0)
    assert root == pytest.approx(3.8317059702, abs=1e-9)
    assert abs(bessel_j(1, root)) < 1e-10


@given(st.integers(0, 60), st.floats(0.01, 30.0))
@settings(max_examples=60, deadline=None)
def test_matches_series(n, x):
    ref = float(series_j(n, x, terms=120))
    amp = max(abs(ref), 1e-3 * float(abs(series_j(n, max(x, n + 1), 120))) + 1e-300)
    if abs(ref) > 1e-280:
        assert abs(bessel_j(n, x) - ref) <= 1e-10 * max(abs(ref), 1e-6 * amp)


def test_relative_accuracy_against_scipy_grid():
    n = np.arange(0, 400, 7)
    x = np.linspace(0.1, 600, 301)
    N, X = np.meshgrid(n, x)
    ours = bessel_j(N, X)
    ref = sp.jv(N, X)
    # compare away from zeros, where relative error is meaningful
    envelope = np.sqrt(2 / (np.pi * np.maximum(X, 1.0)))
    mask = (np.abs(ref) > 1e-2 * envelope) | ((np.abs(ref) > 1e-280) & (X < N))
    rel = np.abs(ours - ref)[mask] / np.abs(ref)[mask]
    assert rel.max() < 1e-10
    # near zeros the value is ill-conditioned; compare on the amplitude scale
    assert np.max(np.abs(ours - ref)[~mask] / envelope[~mask]) < 1e-12


def test_large_argument_against_mpmath():
    for n, x in [(0, 1e4), (7, 5e4), (300, 1e5), (2000, 2100.0)]:
        ref = float(mpmath.besselj(n, x))
        assert abs(bessel_j(n, x) - ref) <= 1e-10 * abs(ref)
    # deep below the turning point at the top of the order range
    assert bessel_j(10000, 9000.0) == pytest.approx(sp.jv(10000, 9000.0), rel=1e-10)


def test_envelope_bound_example():
    x, n = 0.5, 50
    val = abs(bessel_j(n, n * x))
    assert val <= envelope_bound(n, x)
    assert val == pytest.approx(sp.jv(50, 25.0), rel=1e-10)


@given(st.integers(1, 400), st.floats(0.05, 0.999))
@settings(max_examples=80, deadline=None)
def test_envelope_bound_holds(n, x):
    assert abs(bessel_j(n, n * x)) <= envelope_bound(n, x) * (1 + 1e-9)


def test_underflow_is_signalled():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        v = bessel_j(1000, 1.0)
    assert v == 0.0
    assert any(issubclass(w.category, BesselUnderflowWarning) for w in rec)
    assert not np.isnan(bessel_j(np.array([5000]), np.array([10.0]))).any()


def test_derivative_matches_scipy():
    x = np.linspace(0.5, 80, 50)
    for n in (0, 1, 5, 40):
        assert np.allclose(bessel_jp(n, x), sp.jvp(n, x), atol=1e-13)


def test_airy_first_zero_by_series_bisection():
    root = bisect(lambda x: float(airy_series(x)), -2.5, -2.2)
    assert root == pytest.approx(-2.3381074105, abs=1e-9)
    assert airy_zero(1) == pytest.approx(root, abs=1e-12)


def test_airy_zero_asymptotics_and_residuals():
    z = airy_zeros(1000)
    assert np.all(np.diff(z) < 0)
    k = np.arange(1, 1001)
    assert np.all(np.abs(z + (3 * np.pi * k / 2) ** (2 / 3)) <= 0.5 * k ** (-1 / 3))
    assert np.max(np.abs(sp.airy(z)[0])) < 1e-10
    assert np.allclose(z, sp.ai_zeros(1000)[0], rtol=1e-11, atol=0)


def test_airy_a100_close_to_leading_term():
    # the correction term is about 0.468 k^{-1/3}, i.e. 0.1 at k = 100
    gap = airy_zero(100) + (300 * math.pi / 2) ** (2 / 3)
    assert 0 < gap < 0.5 * 100 ** (-1 / 3)


def test_z_of_zeta():
    assert z_of_zeta(0.0) == 1.0
    z = z_of_zeta(-1.0)
    assert abs(math.sqrt(z * z - 1) - math.acos(1 / z) - 2 / 3) < 1e-12
    zs = [z_of_zeta(-s) for s in np.linspace(0, 40, 200)]
    assert np.all(np.diff(zs) > 0)
    for zeta in (-1e-8, -1e-3, -0.5, -5.0, -300.0):
        z = z_of_zeta(zeta)
        c = (2 / 3) * (-zeta) ** 1.5
        assert abs(math.sqrt(z * z - 1) - math.acos(1 / z) - c) < 1e-12 * max(1.0, c)


def test_bessel_zero_examples():
    oracle0 = bisect(lambda x: float(series_j(0, x)), 2.0, 3.0)
    oracle5 = bisect(lambda x: float(series_j(5, x)), 8.5, 9.0)
    assert bessel_zero(0, 1).alpha == pytest.approx(oracle0, abs=1e-10)
    assert bessel_zero(0, 1).alpha == pytest.approx(2.4048255577, abs=1e-9)
    assert bessel_zero(5, 1).alpha == pytest.approx(oracle5, abs=1e-10)
    assert bessel_zero(5, 1).alpha == pytest.approx(8.7714838160, abs=1e-9)


def test_bessel_zero_grid_interlacing_and_accuracy():
    nn, kk = np.meshgrid(np.arange(52), np.arange(1, 52), indexing="ij")
    A = bessel_zeros_nk(nn, kk)
    assert A[7, 3] == bessel_zero(7, 4).alpha
    assert np.all(A[:-1, :-1] < A[1:, :-1])  # alpha_{n,k} < alpha_{n+1,k}
    assert np.all(A[1:, :-1] < A[:-1, 1:])  # alpha_{n+1,k} < alpha_{n,k+1}
    assert np.all(np.diff(A, axis=1) > 0)
    n = np.arange(52)[:, None]
    assert np.all(A > n)
    assert np.max(np.abs(bessel_j(np.broadcast_to(n, A.shape), A))) < 1e-10
    for m in (0, 3, 17, 50):
        assert np.allclose(A[m], sp.jn_zeros(m, 51), rtol=1e-12)


def test_zeros_below_counts():
    for n, X in [(0, 30.0), (10, 50.0), (150, 400.0), (399, 400.0), (401, 400.0)]:
        z = bessel_zeros_below(np.array([n]), np.array([X]))
        expected = sp.jn_zeros(n, 200) if n <= 399 else np.array([])
        expected = expected[expected < X]
        assert len(z[0]) == len(expected)
        assert np.allclose(z[0], expected, rtol=1e-12)


def test_bracket_error_type():
    assert issubclass(BracketError, RuntimeError)
