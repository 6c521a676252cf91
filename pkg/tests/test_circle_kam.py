import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qelab.circle_kam import (
    GOLDEN,
    CircleMap,
    DivisorUnderflowError,
    RationalInputError,
    contraction_exponent,
    diophantine_certificate,
    kam_iterate,
    kam_step,
    rotation_number,
    small_divisor_bound_check,
    solve_linearized,
)
from qelab.fourier import TorusFourier


def rotation(theta):
    return CircleMap(TorusFourier.zeros(1, 4), theta)


def random_eta(seed, K, amp):
    rng = np.random.default_rng(seed)
    modes = {n: amp * (rng.standard_normal() + 1j * rng.standard_normal()) * math.exp(-n) for n in range(1, K + 1)}
    return TorusFourier.from_modes(modes, 1, K)


def test_rotation_number_of_rotation():
    assert rotation_number(rotation(0.3), 1000) == pytest.approx(0.3, abs=1e-14)
    assert rotation_number(rotation(GOLDEN), 1000, refine=True) == pytest.approx(GOLDEN, abs=1e-14)


def test_rotation_number_independent_of_start():
    f = CircleMap.standard(GOLDEN, 1e-3)
    n = 100_000
    est = rotation_number(f, n, x0=np.linspace(0, 0.8, 5))
    assert np.ptp(est) < 1e-6
    assert np.ptp(est) < 10 / n
    # long-orbit average agrees with the smoothly weighted one
    assert est[0] == pytest.approx(rotation_number(f, 20_000, refine=True), abs=1e-5)


def test_certificate_golden_mean():
    cert = diophantine_certificate(GOLDEN, 0.2, 2.5, 10 ** 6)
    assert cert.valid
    qs = [q for _, q in cert.convergents]
    assert qs[:8] == [1, 1, 2, 3, 5, 8, 13, 21]


def test_certificate_rejects_rationals():
    with pytest.raises(RationalInputError):
        diophantine_certificate(1 / 3, 0.2, 2.5, 10 ** 6)
    with pytest.raises(ValueError):
        diophantine_certificate(GOLDEN, 0.2, 2.0, 100)


def test_certificate_liouville_like_number_fails():
    # in floating point the truncated sum is exactly 110001/10^6, so stay below that q
    theta = sum(10.0 ** -math.factorial(k) for k in range(1, 4))
    cert = diophantine_certificate(theta, 0.2, 2.5, 10 ** 5)
    assert not cert.valid
    bad = [q for p, q in cert.convergents if abs(theta - p / q) <= 0.2 / q ** 2.5]
    assert min(bad) <= 1000


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.3))
@settings(max_examples=60, deadline=None)
def test_certificate_agrees_with_brute_force(theta, kappa):
    rho, Q = 2.5, 300
    try:
        cert = diophantine_certificate(theta, kappa, rho, Q)
    except RationalInputError:
        return
    q = np.arange(1, Q + 1)
    p = np.round(theta * q)
    brute = bool(np.all(np.abs(theta - p / q) > kappa / q ** rho))
    # convergents are the best approximations, so they decide validity
    assert cert.valid == brute


def test_small_divisors():
    d1 = abs(np.exp(2j * np.pi * GOLDEN) - 1)
    assert d1 == pytest.approx(2 * math.sin(math.pi * GOLDEN), rel=1e-14)
    assert d1 == pytest.approx(1.86406, abs=1e-5)
    assert abs(np.exp(-2j * np.pi * GOLDEN) - 1) == pytest.approx(d1, rel=1e-15)
    assert small_divisor_bound_check(GOLDEN, 0.2, 2.5, 10 ** 4) >= 1


def test_solve_linearized_single_mode():
    eps = 1e-3
    eta = TorusFourier.from_modes({1: eps / 2}, 1, 4)  # eps cos(2 pi x)
    mu = solve_linearized(eta, GOLDEN)
    K = mu.K
    assert mu.coeffs[K + 1] == pytest.approx((eps / 2) / (np.exp(2j * np.pi * GOLDEN) - 1), rel=1e-14)
    assert mu.coeffs[K - 1] == pytest.approx((eps / 2) / (np.exp(-2j * np.pi * GOLDEN) - 1), rel=1e-14)
    others = np.delete(mu.coeffs, [K - 1, K + 1])
    assert np.all(others == 0)
    assert np.all(solve_linearized(TorusFourier.zeros(1, 4), GOLDEN).coeffs == 0)


@pytest.mark.parametrize("seed", range(5))
def test_solve_linearized_plug_back(seed):
    eta = random_eta(seed, 32, 1.0) + TorusFourier.from_modes({0: 0.3}, 1, 32)
    mu = solve_linearized(eta, GOLDEN)
    x = np.arange(256) / 256
    lhs = mu.evaluate(x + GOLDEN) - mu.evaluate(x)
    rhs = eta.evaluate(x) - 0.3
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    assert mu.mean() == 0


def test_divisor_underflow():
    with pytest.raises(DivisorUnderflowError):
        solve_linearized(random_eta(0, 4, 1.0), 0.5)


@given(st.integers(0, 10 ** 6), st.floats(0.02, 0.2))
@settings(max_examples=40, deadline=None)
def test_linearized_majorant_bound(seed, delta):
    kappa, rho, sigma = 0.2, 2.5, 0.3
    eta = random_eta(seed, 24, 1e-2)
    mu = solve_linearized(eta, GOLDEN)
    bound = math.gamma(rho) / (kappa * (2 * math.pi * delta) ** rho) * eta.majorant(sigma)
    assert mu.majorant(sigma - delta) <= bound


def test_kam_step_on_rotation():
    r = kam_step(rotation(GOLDEN))
    assert np.max(np.abs(r.f_next.eta.coeffs)) < 1e-15
    assert r.eta_norm_next < 1e-15


def test_kam_step_is_quadratic_and_preserves_rotation_number():
    consts = []
    for eps in (1e-3, 1e-4):
        f = CircleMap.standard(GOLDEN, eps)
        r = kam_step(f)
        consts.append(r.quadratic_constant)
        if eps == 1e-3:
            rho_f = rotation_number(f, 20_000, refine=True)
            rho_g = rotation_number(r.f_next, 20_000, refine=True)
            assert abs(rho_f - rho_g) < 1e-8
    assert np.all(np.isfinite(consts))
    assert 0.5 < consts[0] / consts[1] < 2


def test_kam_iterate_golden():
    f = CircleMap.standard(GOLDEN, 1e-3)
    res = kam_iterate(f, max_iter=6, target=1e-10)
    assert res.converged and res.iterations <= 6 and res.defect < 1e-10
    assert contraction_exponent(res.trace.eps) >= 1.4
    assert all(s > f.sigma / 2 for s in res.trace.sigma)
    # the conjugated map is the rotation, whose rotation number is theta
    g = CircleMap(f.eta, f.theta + res.lam, f.sigma)
    assert rotation_number(g, 20_000, refine=True) == pytest.approx(GOLDEN, abs=1e-8)


def test_kam_iterate_trivial_and_equivariant():
    assert kam_iterate(rotation(GOLDEN)).iterations == 0
    f = CircleMap.standard(GOLDEN, 1e-3)
    res = kam_iterate(f)
    x = np.linspace(0, 1, 97)
    assert np.max(np.abs(res.chi(x + 1) - res.chi(x) - 1)) < 1e-12


def test_orbit_pushforward():
    f = CircleMap.standard(GOLDEN, 1e-3)
    res = kam_iterate(f)
    g = CircleMap(f.eta, f.theta + res.lam, f.sigma)
    k = np.arange(10_000)
    images = res.chi(k * GOLDEN)
    y = float(res.chi(0.0))
    orbit = np.empty(k.size)
    for i in range(k.size):
        orbit[i] = y
        y = float(g(y))
    assert np.max(np.abs(orbit - images)) < 1e-6


def test_step_quadraticity_slope():
    f = CircleMap.standard(GOLDEN, 3e-3)
    res = kam_iterate(f, target=1e-14)
    e = np.array(res.trace.eps)
    keep = e[1:] > 1e-13
    slopes = np.log(e[1:][keep]) / np.log(e[:-1][keep])
    assert np.all(slopes > 1.4)


def test_literal_mode_stalls_at_rotation_mismatch():
    f = CircleMap.standard(GOLDEN, 1e-3)
    res = kam_iterate(f, mode="rotation", grid_max=256)
    assert not res.converged
    mismatch = rotation_number(f, 20_000, refine=True) - GOLDEN
    assert res.defect > 0.5 * abs(mismatch)


def test_inversion_failure_reported():
    from qelab.circle_kam import InversionError
    f = CircleMap.standard(0.01, 0.05)  # near-resonant: |mu'| large
    with pytest.raises(InversionError):
        kam_step(f)
