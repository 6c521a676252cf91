"""Fourier analysis on T^n: Diophantine frequencies, the regularized homological
equation, truncation and decay estimates, and the lattice of quasi-eigenvalue indices.

Conventions: functions are 1-periodic in x with angle theta = 2 pi x, so the
transport operator <omega, d/dtheta> acts on e^{i<k,theta>} as i<k,omega>.
The size |k| of an integer vector is always its l1 norm.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .fourier import TorusFourier
from .rng import shard_generators
from .smooth import smoothstep

SHARD = 2 ** 14


def knorm(k) -> np.ndarray:
    return np.sum(np.abs(k), axis=-1)


@dataclass(frozen=True)
class DiophantineParams:
    kappa: float
    tau: float


@dataclass(frozen=True)
class FrequencyVector:
    omega: np.ndarray
    kappa: float
    tau: float

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.omega, dtype=float))
        object.__setattr__(self, "omega", w)
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.tau > w.size - 1:
            raise ValueError(f"tau must exceed n - 1 = {w.size - 1}")

    @property
    def diop(self) -> DiophantineParams:
        return DiophantineParams(self.kappa, self.tau)

    @property
    def n(self) -> int:
        return self.omega.size


def gevrey_bump(x, kappa):
    """1 on [0, kappa/4], 0 beyond kappa/2, smooth and non-increasing between."""
    q = kappa / 4
    v = 1.0 - smoothstep((np.asarray(x, dtype=float) - q) / q)[0]
    return float(v) if np.ndim(v) == 0 else v


def _denominators(w: FrequencyVector, ks: np.ndarray):
    """<omega,k> and g_k for an array of integer vectors (rows); k = 0 rows get g = 1."""
    ks = np.asarray(ks)
    dot = ks @ w.omega
    size = knorm(ks).astype(float)
    zero = size == 0
    size[zero] = 1.0
    weight = w.kappa * size ** -w.tau
    psi = gevrey_bump(np.abs(dot) * size ** w.tau, w.kappa)
    g = dot + 1j * weight * psi
    g = np.where(zero, 1.0 + 0j, g)
    return dot, g


def regularized_denominator(w: FrequencyVector, k) -> complex:
    k = np.asarray(k)
    if not k.any():
        raise ValueError("k must be nonzero")
    return complex(_denominators(w, k[None, :])[1][0])


def _mode_table(f: TorusFourier) -> np.ndarray:
    return np.stack([k.ravel() for k in f.wavenumbers()], axis=1)


def apply_transport(u: TorusFourier, w: FrequencyVector) -> TorusFourier:
    dot = _mode_table(u) @ w.omega
    return TorusFourier((1j * dot).reshape(u.coeffs.shape) * u.coeffs)


def apply_regularized(u: TorusFourier, w: FrequencyVector) -> TorusFourier:
    """The operator the solver actually inverts: multiplication by i g_k (zero on k = 0)."""
    ks = _mode_table(u)
    _, g = _denominators(w, ks)
    g = np.where(knorm(ks) == 0, 0, g)
    return TorusFourier((1j * g).reshape(u.coeffs.shape) * u.coeffs)


def solve_homological(f: TorusFourier, w: FrequencyVector, mean_tol: float = 1e-14) -> TorusFourier:
    """u_k = f_k / (i g_k), u_0 = 0."""
    if f.dim != w.n:
        raise ValueError("dimension mismatch between f and omega")
    scale = max(1.0, float(np.abs(f.coeffs).max(initial=0.0)))
    if abs(f.mean()) > mean_tol * scale:
        raise ValueError(f"f must have zero mean (got {f.mean():.3e})")
    ks = _mode_table(f)
    _, g = _denominators(w, ks)
    u = f.coeffs.ravel() / (1j * g)
    u[knorm(ks) == 0] = 0
    return TorusFourier(u.reshape(f.coeffs.shape))


def diophantine_margin(omega, K: int, tau: float) -> float:
    """min |<omega,k>| |k|^tau over 0 < |k|_inf <= K."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    r = np.arange(-K, K + 1)
    ks = np.array(list(itertools.product(r, repeat=omega.size)))
    ks = ks[knorm(ks) > 0]
    return float(np.min(np.abs(ks @ omega) * knorm(ks) ** tau))


# ---------------------------------------------------------------- analytic estimates

def geometric_series(rho: float, dim: int, K: int, sigma: float | None = None) -> TorusFourier:
    """Coefficients rho^{|k|}; in one variable this is sqrt(3)/(2 - cos 2 pi x) for rho = 2 - sqrt(3)."""
    f = TorusFourier(rho ** TorusFourier.zeros(dim, K).l1().astype(float))
    if sigma is not None:
        if rho * math.exp(2 * math.pi * sigma) >= 1:
            raise ValueError("sigma beyond the strip of analyticity")
        f = f.with_decay(sigma, rho)
    return f


def _boundary_values(f: TorusFourier, s: float, N: int | None = None) -> np.ndarray:
    """|f| on the distinguished boundary Im x_i = +-s, sampled on an N^n grid."""
    if N is None:
        N = int(2 ** math.ceil(math.log2(4 * (2 * f.K + 1))))
    idx = np.arange(-f.K, f.K + 1) % N
    ks = f.wavenumbers()
    out = []
    for signs in itertools.product((-1, 1), repeat=f.dim):
        shift = sum(e * k for e, k in zip(signs, ks))
        with np.errstate(over="ignore", invalid="ignore"):
            c = f.coeffs * np.exp(-2 * np.pi * s * shift)
        F = np.zeros((N,) * f.dim, dtype=complex)
        F[np.ix_(*([idx] * f.dim))] = c
        out.append(np.abs(np.fft.ifftn(F) * N ** f.dim))
    return np.stack(out)


def strip_sup(f: TorusFourier, s: float) -> float:
    """Sampled sup of |f| over the closed polystrip |Im x_i| <= s (attained on the distinguished boundary)."""
    return float(_boundary_values(f, s).max())


@dataclass
class TruncationReport:
    K: int
    delta: float
    tail_sup: float  # sup over the real torus of the discarded part
    tail_l1: float  # sum of discarded |c_k|, an upper bound for tail_sup
    bound: float
    constant: float
    norm: float

    @property
    def tail_norm(self) -> float:
        return self.tail_sup

    @property
    def holds(self) -> bool:
        return self.tail_sup <= self.bound


def truncation_constant(n: int, delta: float) -> float:
    q = math.exp(-(2 * math.pi - 1) * delta)
    return ((1 + q) / (1 - q)) ** n


def truncate_with_bound(f: TorusFourier, K: int, delta: float) -> TruncationReport:
    """Drop modes with |k|_inf > K and compare with C(n, delta) K^n e^{-K delta} ||f||_sigma.

    ||f||_sigma is the weighted coefficient majorant at the claimed decay width.
    """
    if f.decay is None:
        raise ValueError("truncation bound needs decay metadata")
    sigma = f.decay[0]
    if not 0 < delta < sigma:
        raise ValueError("need 0 < delta < sigma")
    tail = f.coeffs.copy()
    kinf = np.max(np.abs(np.stack(f.wavenumbers())), axis=0)
    tail[kinf <= K] = 0
    t = TorusFourier(tail)
    N = int(2 ** math.ceil(math.log2(4 * (2 * f.K + 1))))
    tail_sup = float(np.abs(t.to_grid(N)).max()) if K < f.K else 0.0
    norm = f.majorant(sigma)
    C = truncation_constant(f.dim, delta)
    bound = C * K ** f.dim * math.exp(-K * delta) * norm
    return TruncationReport(K, delta, tail_sup, float(np.abs(tail).sum()), bound, C, norm)


def observed_rate(f: TorusFourier, floor: float = 1e-14) -> float:
    """Geometric rate from a fit of log max|c_k| over shells |k| = m; 0 for a trigonometric polynomial."""
    a = np.abs(f.coeffs)
    top = a.max(initial=0.0)
    if top == 0:
        return 0.0
    shells = f.l1()
    ms, logs = [], []
    for m in range(int(shells.max()) + 1):
        v = a[shells == m].max(initial=0.0)
        if v > floor * top:
            ms.append(m)
            logs.append(math.log(v))
    # too few significant shells to call the decay geometric: treat as entire
    if len(ms) < 3 or ms[-1] < 3:
        return 0.0
    slope = np.polyfit(ms, logs, 1)[0]
    return float(math.exp(slope))


def fourier_decay_check(f: TorusFourier, sigma: float) -> bool:
    """|c_m| <= e^{-2 pi sigma |m|} A, with A the sup of f on the strip of half-width sigma.

    A finite truncation is always bounded on every strip, so the check also
    asks that the observed coefficient rate be compatible with sigma.
    """
    rate = observed_rate(f)
    if rate * math.exp(2 * math.pi * sigma) >= 1:
        return False
    A = strip_sup(f, sigma)
    if not np.isfinite(A):
        return False
    lhs = np.abs(f.coeffs) * np.exp(2 * np.pi * sigma * f.l1())
    return bool(np.all(lhs <= A * (1 + 1e-10)))


def cauchy_check(f: TorusFourier, sigma: float, r: float, alpha_max: int = 6, axis: int = 0):
    """Rows (alpha, sup of d^alpha f on the strip sigma - r, A r^{-alpha} alpha!)."""
    if not 0 < r < sigma:
        raise ValueError("need 0 < r < sigma")
    A = strip_sup(f, sigma)
    rows = []
    g = f
    for alpha in range(alpha_max + 1):
        lhs = strip_sup(g, sigma - r)
        rows.append((alpha, lhs, A * r ** -alpha * math.factorial(alpha)))
        g = g.derivative(axis)
    return rows


# ---------------------------------------------------------------- Diophantine measure

@dataclass
class MeasureReport:
    kappas: list
    bad_fraction: list
    std_error: list
    fit_slope: float
    samples: int
    K: int
    tau: float


def diophantine_measure(kappas, tau: float, n: int, K: int, samples: int, seed: int) -> MeasureReport:
    """Monte Carlo fraction of omega in [0,1]^n with |<omega,k>| < kappa/|k|^tau for some 0 < |k| <= K.

    Every kappa is tested on the same samples, so the sweep is monotone.
    """
    if not tau > n - 1:
        raise ValueError("need tau > n - 1")
    kappas = [float(k) for k in np.atleast_1d(kappas)]
    r = np.arange(-K, K + 1)
    ks = np.array(list(itertools.product(r, repeat=n)), dtype=float).reshape(-1, n)
    ks = ks[(knorm(ks) > 0) & (knorm(ks) <= K)]
    # k and -k give the same condition
    first = np.array([next((x for x in k if x != 0), 0) > 0 for k in ks], dtype=bool)
    ks = ks[first]
    weight = knorm(ks) ** tau
    n_shards = max(1, -(-samples // SHARD))
    bad = np.zeros(len(kappas), dtype=np.int64)
    for i, g in enumerate(shard_generators(seed, n_shards)):
        m = min(SHARD, samples - i * SHARD)
        w = g.random((m, n))
        if len(ks):
            margin = np.min(np.abs(w @ ks.T) * weight, axis=1)
        else:
            margin = np.full(m, np.inf)
        for j, kap in enumerate(kappas):
            bad[j] += int(np.count_nonzero(margin < kap))
    frac = bad / samples
    se = np.sqrt(frac * (1 - frac) / samples)
    slope = float("nan")
    ok = frac > 0
    if ok.sum() >= 2:
        slope = float(np.polyfit(np.log(np.array(kappas)[ok]), np.log(frac[ok]), 1)[0])
    return MeasureReport(kappas, frac.tolist(), se.tolist(), slope, samples, K, tau)


# ---------------------------------------------------------------- quasi-eigenvalue lattice

@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    @property
    def volume(self) -> float:
        n = len(self.center)
        return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * self.radius ** n


@dataclass(frozen=True)
class ActionLattice:
    S: object  # Ball or (m, n) array of action points
    h: float
    L: float
    maslov: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")

    @property
    def dim(self) -> int:
        if isinstance(self.S, Ball):
            return len(self.S.center)
        return np.atleast_2d(self.S).shape[1]


@dataclass
class LatticeReport:
    points: np.ndarray
    count: int
    scaled_count: float  # (2 pi h)^n #M
    phase_volume: float | None  # (2 pi)^n vol(S) when S is a ball


def quasi_lattice(lat: ActionLattice) -> LatticeReport:
    """Integer m with dist(S, h(m + maslov/4)) < L h, Euclidean distance."""
    n = lat.dim
    off = np.asarray(lat.maslov, dtype=float) / 4
    tol = 1 - 1e-12
    if isinstance(lat.S, Ball):
        c = np.asarray(lat.S.center, dtype=float) / lat.h - off
        reach = lat.S.radius / lat.h + lat.L * tol
        pts = _ball_points(c, reach)
        vol = (2 * math.pi) ** n * lat.S.volume
    else:
        S = np.atleast_2d(np.asarray(lat.S, dtype=float)) / lat.h - off
        found = set()
        for s in S:
            found.update(map(tuple, _ball_points(s, lat.L * tol)))
        pts = np.array(sorted(found), dtype=np.int64).reshape(-1, n)
        vol = None
    return LatticeReport(pts, len(pts), (2 * math.pi * lat.h) ** n * len(pts), vol)


def _ball_points(c: np.ndarray, reach: float) -> np.ndarray:
    """Integer points strictly inside the Euclidean ball of radius reach about c."""
    lo = np.ceil(c - reach).astype(np.int64)
    hi = np.floor(c + reach).astype(np.int64)
    n = len(c)
    if n == 1:
        m = np.arange(lo[0], hi[0] + 1)
        return m[np.abs(m - c[0]) < reach].reshape(-1, 1)
    # scan the first n-1 coordinates, solve for the range of the last
    heads = np.array(list(itertools.product(*[range(a, b + 1) for a, b in zip(lo[:-1], hi[:-1])])),
                     dtype=np.int64).reshape(-1, n - 1)
    rem = reach ** 2 - np.sum((heads - c[:-1]) ** 2, axis=1)
    out = []
    for head, r2 in zip(heads, rem):
        if r2 <= 0:
            continue
        w = math.sqrt(r2)
        m = np.arange(math.ceil(c[-1] - w), math.floor(c[-1] + w) + 1)
        m = m[(m - c[-1]) ** 2 < r2]
        if m.size:
            block = np.empty((m.size, n), dtype=np.int64)
            block[:, :-1] = head
            block[:, -1] = m
            out.append(block)
    return np.concatenate(out) if out else np.empty((0, n), dtype=np.int64)


def scaling_exponent(hs, counts) -> float:
    """Slope of log #M against log(1/h)."""
    return float(np.polyfit(-np.log(np.asarray(hs, float)), np.log(np.asarray(counts, float)), 1)[0])
