"""Semidisk quasimodes chi(r) sin(n theta) J_n(alpha r / r2) and their counting.

A quasimode is built from the k-th zero alpha of J_n, so the uncut product
vanishes on the semicircle and on the diameter.  The radial cutoff kills it
near the stalk opening; everything the cutoff breaks lives in the annulus
r1 < r < r_outer, which is where residuals and overlaps are integrated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .billiard import MushroomParams
from .quadrature import gk15
from .smooth import smoothstep
from .special import BesselZero, _bessel_triplet, bessel_j, bessel_zero, bessel_zeros_below


@dataclass(frozen=True)
class SmoothCutoff:
    """chi = 0 for r <= r1, chi = 1 for r >= (r1+eps) sqrt(1-eps^2)."""

    r1: float
    eps: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.r_outer <= self.r1:
            raise ValueError("cutoff transition is empty: (r1+eps)sqrt(1-eps^2) <= r1")

    @property
    def r_outer(self) -> float:
        return (self.r1 + self.eps) * math.sqrt(1 - self.eps ** 2)

    def _s(self, r):
        return (np.asarray(r, dtype=float) - self.r1) / (self.r_outer - self.r1)

    def __call__(self, r):
        return smoothstep(self._s(r))[0]

    def d1(self, r):
        return smoothstep(self._s(r))[1] / (self.r_outer - self.r1)

    def d2(self, r):
        return smoothstep(self._s(r))[2] / (self.r_outer - self.r1) ** 2


@dataclass(frozen=True)
class QuasimodeSpec:
    zero: BesselZero
    r1: float
    r2: float
    eps: float
    cutoff: SmoothCutoff | None
    norm: float = field(default=float("nan"), compare=False)

    @property
    def n(self) -> int:
        return self.zero.n

    @property
    def alpha(self) -> float:
        return self.zero.alpha

    @property
    def quasi_eigenvalue(self) -> float:
        return self.alpha ** 2 / self.r2 ** 2

    @property
    def admissible(self) -> bool:
        return self.alpha < self.n * self.r2 / (self.r1 + self.eps)


def _radial(spec: QuasimodeSpec, r):
    return bessel_j(np.full(np.shape(r), spec.n), spec.alpha * np.asarray(r) / spec.r2)


def _deficit(spec_a: QuasimodeSpec, spec_b: QuasimodeSpec) -> float:
    """Integral of (1 - chi^2) J_a J_b r over [0, r_outer]."""
    chi = spec_a.cutoff
    if chi is None:
        return 0.0

    def f(r):
        return (1 - chi(r) ** 2) * _radial(spec_a, r) * _radial(spec_b, r) * r

    scale = spec_a.r2 ** 2 / (spec_a.alpha + 1)
    val, _ = gk15(f, 0.0, chi.r_outer, abs_tol=1e-15 * scale, rel_tol=1e-12, max_intervals=20000)
    return val


def _norm(spec: QuasimodeSpec) -> float:
    # full-disk radial integral at a zero: (r2^2/2) J_{n+1}(alpha)^2
    full = 0.5 * spec.r2 ** 2 * bessel_j(spec.n + 1, spec.alpha) ** 2
    return math.sqrt(0.5 * math.pi * (full - _deficit(spec, spec)))


def make_spec(n: int, k: int, r1: float, r2: float, eps: float, cutoff: bool = True) -> QuasimodeSpec:
    if n < 1:
        raise ValueError("angular order must be >= 1 (sin(0 theta) vanishes)")
    z = bessel_zero(n, k)
    chi = SmoothCutoff(r1, eps) if cutoff else None
    spec = QuasimodeSpec(z, r1, r2, eps, chi)
    return QuasimodeSpec(z, r1, r2, eps, chi, _norm(spec))


def quasimode_eval(spec: QuasimodeSpec, r, theta):
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    chi = 1.0 if spec.cutoff is None else spec.cutoff(r)
    return chi * np.sin(spec.n * theta) * _radial(spec, r) / spec.norm


def residual_density(spec: QuasimodeSpec, r):
    """Radial profile of (Delta + alpha^2/r2^2) v, i.e. the coefficient of sin(n theta)."""
    r = np.asarray(r, dtype=float)
    if spec.cutoff is None:
        return np.zeros_like(r)
    chi = spec.cutoff
    n = np.full(r.shape, spec.n)
    jm, j, jp = _bessel_triplet(n, spec.alpha * r / spec.r2)
    dj = 0.5 * (jm - jp) * spec.alpha / spec.r2
    c1, c2 = chi.d1(r), chi.d2(r)
    return (2 * c1 * dj + (c2 + c1 / r) * j) / spec.norm


@dataclass(frozen=True)
class ResidualReport:
    residual: float
    relative: float
    quasi_eigenvalue: float
    quad_error: float


def quasimode_residual(spec: QuasimodeSpec) -> ResidualReport:
    if spec.cutoff is None:
        return ResidualReport(0.0, 0.0, spec.quasi_eigenvalue, 0.0)
    chi = spec.cutoff
    # values span hundreds of orders of magnitude: pure relative tolerance
    val, err = gk15(lambda r: residual_density(spec, r) ** 2 * r, chi.r1, chi.r_outer,
                    abs_tol=0.0, rel_tol=1e-10, max_intervals=20000)
    res = math.sqrt(0.5 * math.pi * val)
    return ResidualReport(res, res / spec.quasi_eigenvalue, spec.quasi_eigenvalue,
                          math.sqrt(0.5 * math.pi * err))


def quasimode_overlap(a: QuasimodeSpec, b: QuasimodeSpec) -> float:
    if (a.r1, a.r2, a.eps, a.cutoff is None) != (b.r1, b.r2, b.eps, b.cutoff is None):
        raise ValueError("overlaps need a common (r1, r2, eps, cutoff)")
    if a.n != b.n:
        return 0.0  # sines of different orders are orthogonal on [0, pi]
    if a.zero.k == b.zero.k:
        full = 0.5 * a.r2 ** 2 * bessel_j(a.n + 1, a.alpha) ** 2
    else:
        full = 0.0  # distinct zeros of the same J_n: orthogonal on the full disk
    return 0.5 * math.pi * (full - _deficit(a, b)) / (a.norm * b.norm)


def gram_matrix(specs: list[QuasimodeSpec]) -> np.ndarray:
    m = len(specs)
    G = np.eye(m)
    for i in range(m):
        for j in range(i, m):
            G[i, j] = G[j, i] = quasimode_overlap(specs[i], specs[j])
    return G


def closed_form_constant(params: MushroomParams) -> float:
    C = params.C
    return params.r2 ** 2 / 8 * (1 - 2 / (math.pi * C * C) * math.sqrt(C * C - 1)
                                 - 2 / math.pi * math.asin(1 / C))


@dataclass(frozen=True)
class CountingReport:
    lam: float
    eps: float
    count: int
    coefficient: float
    closed_form: float


def quasi_eigen_family(params: MushroomParams, lam: float, eps: float):
    """All admissible (n, k, alpha) with alpha < lam r2, sorted by alpha."""
    if lam <= 0 or not 0 < eps < 1:
        raise ValueError("need lam > 0 and eps in (0, 1)")
    r1, r2 = params.r1, params.r2
    nmax = int(math.floor(lam * r2))
    if nmax < 1:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros(0)
    n = np.arange(1, nmax + 1)
    X = np.minimum(lam * r2, n * r2 / (r1 + eps))
    zs = bessel_zeros_below(n, X)
    ns = np.concatenate([np.full(len(z), m) for m, z in zip(n, zs)]).astype(int)
    ks = np.concatenate([np.arange(1, len(z) + 1) for z in zs]).astype(int)
    al = np.concatenate(zs) if zs else np.zeros(0)
    order = np.argsort(al, kind="stable")
    return ns[order], ks[order], al[order]


def count_quasi_eigenvalues(params: MushroomParams, lam: float, eps: float) -> CountingReport:
    _, _, al = quasi_eigen_family(params, lam, eps)
    c = int(len(al))
    return CountingReport(lam, eps, c, c / lam ** 2, closed_form_constant(params))
