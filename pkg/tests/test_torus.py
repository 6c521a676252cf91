import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qelab.circle_kam import GOLDEN
from qelab.fourier import TorusFourier
from qelab.torus import (
    ActionLattice,
    Ball,
    FrequencyVector,
    apply_regularized,
    apply_transport,
    cauchy_check,
    diophantine_margin,
    diophantine_measure,
    fourier_decay_check,
    geometric_series,
    gevrey_bump,
    quasi_lattice,
    regularized_denominator,
    scaling_exponent,
    solve_homological,
    truncate_with_bound,
)

RHO = 2 - math.sqrt(3)
SIGMA_STAR = math.log(1 / RHO) / (2 * math.pi)


def random_zero_mean(seed, dim, K):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((2 * K + 1,) * dim) + 1j * rng.standard_normal((2 * K + 1,) * dim)
    c = 0.5 * (c + np.conj(c[(slice(None, None, -1),) * dim]))
    c[(K,) * dim] = 0
    return TorusFourier(c)


def test_fourier_roundtrip_and_hermitian():
    f = random_zero_mean(0, 2, 5)
    assert f.is_hermitian()
    g = TorusFourier.from_grid(f.to_grid(16), K=5)
    assert np.allclose(g.coeffs, f.coeffs, atol=1e-13)
    x = np.random.default_rng(1).uniform(0, 1, (20, 2))
    grid = f.to_grid(16)
    assert np.isclose(f.evaluate(np.array([[3 / 16, 5 / 16]]))[0], grid[3, 5], atol=1e-12)
    assert np.all(np.isfinite(f.evaluate(x)))


def test_gevrey_bump():
    k = 0.3
    assert gevrey_bump(0.0, k) == 1.0
    assert gevrey_bump(k, k) == 0.0
    assert 0 < gevrey_bump(3 * k / 8, k) < 1
    x = np.linspace(0, k, 1000)
    v = gevrey_bump(x, k)
    assert np.all(np.diff(v) <= 0)
    assert np.all(v[x <= k / 4] == 1) and np.all(v[x >= k / 2] == 0)


def test_denominator_branches():
    w = FrequencyVector(np.array([1.0, 1.0]), kappa=0.1, tau=1.5)
    k = np.array([1, -1])
    assert regularized_denominator(w, k) == pytest.approx(1j * 0.1 * 2 ** -1.5)
    w2 = FrequencyVector(np.array([1.0, GOLDEN]), kappa=0.1, tau=1.5)
    k = np.array([3, 1])
    assert regularized_denominator(w2, k) == 3 + GOLDEN
    with pytest.raises(ValueError):
        FrequencyVector(np.array([1.0, 2.0]), kappa=0.1, tau=0.5)


def test_denominator_lower_bound_sweep():
    rng = np.random.default_rng(7)
    worst = np.inf
    for _ in range(10_000):
        n = int(rng.integers(2, 4))
        w = FrequencyVector(rng.uniform(-2, 2, n), kappa=float(rng.uniform(0.01, 1)), tau=n - 1 + float(rng.uniform(0.1, 2)))
        k = rng.integers(-6, 7, n)
        if not k.any():
            continue
        # push some samples onto the resonance to exercise the psi = 1 branch
        if rng.uniform() < 0.3:
            w = FrequencyVector(w.omega - (w.omega @ k) * k / (k @ k), w.kappa, w.tau)
        g = regularized_denominator(w, k)
        worst = min(worst, abs(g) * np.abs(k).sum() ** w.tau / w.kappa)
    assert worst >= 0.25


def test_transport_examples():
    w = FrequencyVector(np.array([0.7, GOLDEN]), 0.01, 1.5)
    u = TorusFourier.from_modes({(1, 0): -0.5j}, 2, 2)  # sin(theta_1)
    Lu = apply_transport(u, w)
    x = np.random.default_rng(0).uniform(0, 1, (10, 2))
    assert np.allclose(Lu.evaluate(x), 0.7 * np.cos(2 * np.pi * x[:, 0]), atol=1e-14)
    c = TorusFourier.from_modes({(0, 0): 2.0}, 2, 2)
    assert np.all(apply_transport(c, w).coeffs == 0)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_transport_linear(seed):
    w = FrequencyVector(np.array([1.0, GOLDEN]), 0.01, 1.5)
    a, b = random_zero_mean(seed, 2, 4), random_zero_mean(seed + 1, 2, 4)
    lhs = apply_transport(a.scaled(2.0) + b, w).coeffs
    rhs = 2 * apply_transport(a, w).coeffs + apply_transport(b, w).coeffs
    assert np.max(np.abs(lhs - rhs)) <= 1e-14 * np.max(np.abs(rhs))


def test_homological_single_mode():
    w = FrequencyVector(np.array([1.0, GOLDEN]), 1e-3, 1.5)
    f = TorusFourier.from_modes({(1, 0): 0.5}, 2, 3)  # cos(theta_1)
    u = solve_homological(f, w)
    ref = TorusFourier.from_modes({(1, 0): -0.5j}, 2, 3)  # sin(theta_1)
    assert np.allclose(u.coeffs, ref.coeffs, atol=1e-15)
    assert np.all(solve_homological(TorusFourier.zeros(2, 3), w).coeffs == 0)
    with pytest.raises(ValueError):
        solve_homological(TorusFourier.from_modes({(0, 0): 1.0}, 2, 3), w)


@pytest.mark.parametrize("seed", range(5))
def test_homological_plug_back(seed):
    K, tau = 8, 1.5
    omega = np.array([1.0, GOLDEN])
    kappa = diophantine_margin(omega, K, tau)  # every |<omega,k>||k|^tau >= kappa > kappa/2
    w = FrequencyVector(omega, kappa, tau)
    f = random_zero_mean(seed, 2, K)
    u = solve_homological(f, w)
    assert u.is_hermitian()
    res = apply_transport(u, w) - f
    assert np.max(np.abs(res.to_grid(32))) <= 1e-12 * np.max(np.abs(f.to_grid(32)))
    assert np.max(np.abs((apply_regularized(u, w) - f).coeffs)) < 1e-13


def test_regularized_equation_when_resonant():
    w = FrequencyVector(np.array([1.0, 1.0]), 0.1, 1.5)  # resonant along k = (1, -1)
    f = TorusFourier.from_modes({(1, -1): 0.3, (2, 1): 0.2j}, 2, 3)
    u = solve_homological(f, w)
    assert np.all(np.isfinite(u.coeffs))
    assert np.max(np.abs((apply_regularized(u, w) - f).coeffs)) < 1e-14
    # the exact transport equation is not solved on the resonant mode
    assert np.max(np.abs((apply_transport(u, w) - f).coeffs)) > 0.1


def test_truncation_bound_geometric():
    f = geometric_series(RHO, 1, 80, sigma=0.9 * SIGMA_STAR)
    sig = f.decay[0]
    bounds = []
    for K in (10, 20, 40):
        r = truncate_with_bound(f, K, 0.9 * sig)
        exact = 2 * RHO ** (K + 1) / (1 - RHO)
        assert r.tail_sup == pytest.approx(exact, rel=1e-10)
        assert r.tail_sup <= r.tail_l1 * (1 + 1e-12) and r.tail_l1 <= r.bound
        bounds.append(r.bound)
    assert bounds[0] > bounds[1] > bounds[2]


def test_truncation_of_polynomial_is_exact():
    f = TorusFourier.from_modes({(1, 2): 0.3, (0, 1): 1.0}, 2, 6).with_decay(1.0, 0.0)
    r = truncate_with_bound(f, 3, 0.5)
    assert r.tail_sup == 0 and r.tail_l1 == 0


def test_truncation_two_dimensional():
    f = geometric_series(RHO, 2, 60, sigma=0.8 * SIGMA_STAR)
    for K in (10, 20):
        r = truncate_with_bound(f, K, 0.5 * f.decay[0])
        assert r.tail_l1 <= r.bound


def test_decay_check():
    f = geometric_series(RHO, 1, 60).scaled(1 / math.sqrt(3))  # 1/(2 - cos 2 pi x)
    x = np.linspace(0, 1, 50, endpoint=False)
    assert np.allclose(f.evaluate(x), 1 / (2 - np.cos(2 * np.pi * x)), atol=1e-13)
    assert fourier_decay_check(f, SIGMA_STAR - 1e-6)
    assert not fourier_decay_check(f, 1.2 * SIGMA_STAR)
    cos = TorusFourier.from_modes({1: 0.5}, 1, 4)
    for s in (0.1, 1.0, 3.0):
        assert fourier_decay_check(cos, s)


def test_cauchy_estimates():
    f = geometric_series(RHO, 1, 80)
    sigma = 0.9 * SIGMA_STAR
    rows = cauchy_check(f, sigma, r=0.5 * sigma, alpha_max=6)
    for alpha, lhs, rhs in rows:
        assert lhs <= rhs


def test_diophantine_measure():
    r = diophantine_measure([0.04, 0.02, 0.01], tau=1.5, n=2, K=20, samples=50_000, seed=3)
    bf = r.bad_fraction
    assert bf[0] > bf[1] > bf[2] > 0
    ratios = np.array(bf) / np.array([0.04, 0.02, 0.01])
    assert ratios.max() / ratios.min() < 2
    assert 0.8 < r.fit_slope < 1.2
    assert diophantine_measure([0.04], 1.5, 2, 0, 1000, 0).bad_fraction[0] == 0


def test_quasi_lattice_examples():
    m = quasi_lattice(ActionLattice(np.array([[0.5]]), h=0.1, L=1.0, maslov=np.zeros(1, int)))
    assert m.points.tolist() == [[5]]
    lat = ActionLattice(Ball(np.array([0.41, 0.73]), 0.3), h=1e-3, L=1.0, maslov=np.zeros(2, int))
    r = quasi_lattice(lat)
    target = (2 * math.pi) ** 2 * math.pi * 0.09
    assert abs(r.scaled_count - target) / target < 0.05


def test_quasi_lattice_shift_equivariance():
    h = 0.01
    base = ActionLattice(Ball(np.array([0.2, 0.3]), 0.05), h, 1.5, np.array([1, 0]))
    moved = ActionLattice(Ball(np.array([0.2 + 7 * h, 0.3 - 3 * h]), 0.05), h, 1.5, np.array([1, 0]))
    a = {tuple(p) for p in quasi_lattice(base).points}
    b = {tuple(p) for p in quasi_lattice(moved).points}
    assert {(p[0] + 7, p[1] - 3) for p in a} == b


def test_quasi_lattice_scaling():
    ball = Ball(np.array([0.5, 0.5]), 0.3)
    hs = [1e-2, 5e-3, 2.5e-3]
    counts = [quasi_lattice(ActionLattice(ball, h, 1.0, np.zeros(2, int))).count for h in hs]
    assert abs(scaling_exponent(hs, counts) - 2) / 2 < 0.02
