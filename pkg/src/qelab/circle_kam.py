"""Conjugating analytic circle maps x + theta + eta(x) to the rotation by theta.

The linearised equation mu(x + theta) - mu(x) = eta(x) - mean(eta) is solved
mode by mode; the conjugated map chi^{-1} o f o chi is formed on a grid with
a per-point Newton inversion of chi.  Iterating gives the quadratic scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fourier import TorusFourier

GOLDEN = (math.sqrt(5) - 1) / 2


class RationalInputError(ValueError):
    pass


class DivisorUnderflowError(ArithmeticError):
    pass


class InversionError(RuntimeError):
    pass


@dataclass(frozen=True)
class CircleMap:
    """Lift f(x) = x + theta + eta(x) with eta 1-periodic."""

    eta: TorusFourier
    theta: float
    sigma: float = 0.1

    def __post_init__(self):
        if self.eta.dim != 1:
            raise ValueError("circle maps need a one-dimensional series")
        if not self.eta.is_hermitian():
            raise ValueError("eta must be real on the real line")
        x = np.arange(512) / 512
        if np.min(1 + self.eta.derivative().evaluate(x)) <= 0:
            raise ValueError("map is not orientation preserving")

    @classmethod
    def standard(cls, theta: float, eps: float, K: int = 8, sigma: float = 0.1) -> "CircleMap":
        """x + theta + eps sin(2 pi x)."""
        return cls(TorusFourier.from_modes({1: -0.5j * eps}, 1, K), theta, sigma)

    def __call__(self, x):
        return x + self.theta + self.eta.evaluate(x)


def rotation_number(f: CircleMap, iterations: int = 100_000, refine: bool = False, x0=0.0):
    """(f^n(x) - x)/n, or with refine=True a smoothly weighted average of the
    one-step displacements (weights exp(-1/(s(1-s))), s = k/n), which converges
    faster than any power of n when f is smoothly conjugate to a rotation."""
    x = np.array(x0, dtype=float, ndmin=1)
    # f(x + 1) = f(x) + 1: iterate on [0, 1) so displacements keep full precision
    x = x - np.floor(x)
    disp = np.empty((iterations, x.size))
    for k in range(iterations):
        y = f(x)
        disp[k] = y - x
        x = y - np.floor(y)
    if refine:
        s = (np.arange(iterations) + 0.5) / iterations
        w = np.exp(-1.0 / (s * (1 - s)))
        out = (w / w.sum()) @ disp
    else:
        out = np.sum(disp, axis=0) / iterations
    return float(out[0]) if np.ndim(x0) == 0 else out


# Diophantine certificates ---------------------------------------------------

def convergents(theta: float, q_max: int):
    """Continued-fraction convergents p/q of the exact binary value of theta, q <= q_max."""
    x = Fraction(theta)
    p0, q0, p1, q1 = 0, 1, 1, 0
    out = []
    while True:
        a = x.numerator // x.denominator
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > q_max:
            break
        out.append((p1, q1))
        frac = x - a
        if frac == 0:
            break
        x = 1 / frac
    return out


@dataclass(frozen=True)
class DiophantineCertificate:
    theta: float
    kappa: float
    rho: float
    Q_max: int
    convergents: list
    valid: bool
    worst_ratio: float  # min over convergents of |theta - p/q| q^rho / kappa


def diophantine_certificate(theta: float, kappa: float, rho: float, Q_max: int) -> DiophantineCertificate:
    if rho <= 2:
        raise ValueError("rho must exceed 2")
    conv = convergents(theta, Q_max)
    tol = 4 * np.finfo(float).eps * max(1.0, abs(theta))
    ratios = []
    for p, q in conv:
        gap = abs(theta - p / q)
        if gap <= tol:
            raise RationalInputError(f"theta is {p}/{q} to machine precision")
        ratios.append(gap * q ** rho / kappa)
    worst = min(ratios) if ratios else math.inf
    return DiophantineCertificate(theta, kappa, rho, Q_max, conv, worst > 1, worst)


def small_divisor_bound_check(theta: float, kappa: float, rho: float, N: int) -> float:
    """min over 0 < |n| <= N of |e^{2 pi i n theta} - 1| |n|^{rho-1} / (4 kappa)."""
    n = np.arange(1, N + 1)
    d = np.abs(np.exp(2j * np.pi * n * theta) - 1)  # same for -n
    return float(np.min(d * n ** (rho - 1) / (4 * kappa)))


def divisors(theta: float, K: int) -> np.ndarray:
    n = np.arange(-K, K + 1)
    return np.exp(2j * np.pi * n * theta) - 1


def solve_linearized(eta: TorusFourier, theta: float) -> TorusFourier:
    """mu with mu(x + theta) - mu(x) = eta(x) - mean(eta) and mean(mu) = 0."""
    d = divisors(theta, eta.K)
    c = eta.coeffs.copy()
    c[eta.K] = 0
    if np.any(np.abs(np.delete(d, eta.K)) < 1e-14):
        raise DivisorUnderflowError("|e^{2 pi i n theta} - 1| < 1e-14 within the truncation")
    d[eta.K] = 1.0
    return TorusFourier(c / d)


# conjugation on a grid ------------------------------------------------------

def invert_near_identity(M: TorusFourier, z, tol: float = 1e-13, max_iter: int = 60):
    """Solve w + M(w) = z per point by safeguarded Newton."""
    dM = M.derivative()
    z = np.asarray(z, dtype=float)
    w = z - M.evaluate(z)
    for _ in range(max_iter):
        slope = 1 + dM.evaluate(w)
        if np.any(slope <= 0):
            raise InversionError("|mu'| >= 1: chi is not invertible")
        r = w + M.evaluate(w) - z
        step = r / slope
        # the map is monotone with slope in (0, 2); halve steps that overshoot
        w = w - np.clip(step, -0.5, 0.5)
        if np.max(np.abs(r)) < tol:
            return w
    raise InversionError("Newton inversion did not reach tolerance")


def _conjugated_eta(M: TorusFourier, f: CircleMap, lam: float, N: int):
    """Grid values of chi^{-1}(f(chi(x)) + lam) - x - theta with chi = id + M,
    and the preimage points chi^{-1}(...) themselves."""
    x = np.arange(N) / N
    y = x + M.evaluate(x)
    g = invert_near_identity(M, f(y) + lam)
    return g - x - f.theta, g


def _defect(M: TorusFourier, f: CircleMap, lam: float, N: int) -> float:
    x = np.arange(N) / N
    chi = lambda u: u + M.evaluate(u)
    return float(np.max(np.abs(chi(x + f.theta) - (f(chi(x)) + lam))))


def _grid_for(series: TorusFourier, N: int, N_max: int, scale: float) -> int:
    """Double the grid while the top half of the resolved band carries more than
    1e-14 of the problem scale (the initial perturbation), so that rounding noise
    in an already converged eta_n does not trigger refinement."""
    while N < N_max and series.tail_mass(N // 4) > 1e-14 * scale:
        N *= 2
    return N


@dataclass
class StepRecord:
    chi: TorusFourier  # mu, with chi = id + mu
    f_next: CircleMap
    eta_norm: float
    eta_norm_next: float
    quadratic_constant: float  # eta_norm_next / eta_norm^2
    mean_eta: float


def kam_step(f: CircleMap, theta: float | None = None, grid_size: int = 64) -> StepRecord:
    theta = f.theta if theta is None else theta
    if theta != f.theta:
        f = CircleMap(f.eta, theta, f.sigma)
    mu = solve_linearized(f.eta, theta)
    N = max(grid_size, 2 * f.eta.K + 2)
    if np.max(np.abs(mu.derivative().to_grid(N))) >= 1:
        raise InversionError("|mu'| >= 1 on the grid")
    vals, _ = _conjugated_eta(mu, f, 0.0, N)
    eta_next = TorusFourier.from_grid(vals)
    norm = float(np.max(np.abs(f.eta.to_grid(N))))
    norm_next = float(np.max(np.abs(vals)))
    q = norm_next / norm ** 2 if norm > 0 else 0.0
    return StepRecord(mu, CircleMap(eta_next, theta, f.sigma), norm, norm_next, q,
                      float(f.eta.mean().real))


@dataclass
class KamTrace:
    eps: list = field(default_factory=list)  # sup of eta_n on the grid
    majorant: list = field(default_factory=list)  # majorant of eta_n at sigma_n
    sigma: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    defect: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    grid: list = field(default_factory=list)


@dataclass
class KamResult:
    chi_total: TorusFourier  # M with chi_total = id + M
    lam: float  # translation added to f (0 in "rotation" mode)
    iterations: int
    defect: float
    converged: bool
    trace: KamTrace
    reason: str = ""

    def chi(self, x):
        return np.asarray(x) + self.chi_total.evaluate(x)


def kam_iterate(f: CircleMap, theta: float | None = None, max_iter: int = 12, target: float = 1e-10,
                mode: str = "offset", grid_size: int = 64, grid_max: int = 4096,
                eps0: float = 0.05) -> KamResult:
    """Quadratic iteration chi_{n+1} = chi_n o (id + mu_n).

    mode="offset" also solves for a translation lam so that f + lam has rotation
    number theta, which a generic f does not; mode="rotation" keeps lam = 0 and
    only converges when theta already is the rotation number of f.
    """
    if mode not in ("offset", "rotation"):
        raise ValueError("mode must be 'offset' or 'rotation'")
    theta = f.theta if theta is None else theta
    f = CircleMap(f.eta, theta, f.sigma)
    N = max(grid_size, 2 * f.eta.K + 2)
    if np.max(np.abs(f.eta.to_grid(N))) > eps0:
        raise ValueError(f"initial perturbation exceeds eps0 = {eps0}")
    M = TorusFourier.zeros(1, N // 2 - 1)
    lam = 0.0
    trace = KamTrace()
    sigma_n = f.sigma
    stalled = 0
    scale = f.eta.majorant(0.0)
    for n in range(max_iter + 1):
        vals, g = _conjugated_eta(M, f, lam, N)
        eta_n = TorusFourier.from_grid(vals)
        N2 = _grid_for(eta_n, N, grid_max, scale)
        if N2 != N:
            N = N2
            M = M.resized(N // 2 - 1)
            vals, g = _conjugated_eta(M, f, lam, N)
            eta_n = TorusFourier.from_grid(vals)
        eps_n = float(np.max(np.abs(vals)))
        defect = _defect(M, f, lam, N)
        delta_n = f.sigma / (36 * (1 + n * n))
        trace.eps.append(eps_n)
        with np.errstate(over="ignore"):
            trace.majorant.append(eta_n.majorant(sigma_n))
        trace.sigma.append(sigma_n)
        trace.delta.append(delta_n)
        trace.defect.append(defect)
        trace.lam.append(lam)
        trace.grid.append(N)
        if defect <= target:
            return KamResult(M, lam, n, defect, True, trace)
        if n == max_iter:
            break
        if n > 0 and eps_n >= trace.eps[-2]:
            stalled += 1
            if stalled >= 3:
                return KamResult(M, lam, n, defect, False, trace, "eps_n failed to contract for 3 steps")
        else:
            stalled = 0
        sigma_n -= 6 * delta_n
        if mode == "offset":
            # Newton in (lam, mu) jointly: a shift dlam moves eta_n by dlam * dg/dlam
            dg = 1 / (1 + M.derivative().evaluate(g))
            dlam = -float(np.mean(vals)) / float(np.mean(dg))
            lam += dlam
            eta_n = TorusFourier.from_grid(vals + dlam * dg)
        mu = solve_linearized(eta_n, theta)
        x = np.arange(N) / N
        M = TorusFourier.from_grid(mu.evaluate(x) + M.evaluate(x + mu.evaluate(x)))
    return KamResult(M, lam, max_iter, trace.defect[-1], False, trace, "iteration cap reached")


def contraction_exponent(eps, floor: float = 1e-13) -> float:
    """Least-squares slope of log eps_{n+1} against log eps_n above the rounding floor."""
    e = np.asarray(eps, dtype=float)
    pairs = [(a, b) for a, b in zip(e[:-1], e[1:]) if b > floor and a > 0]
    if len(pairs) < 2:
        return math.nan
    a, b = np.log(np.array(pairs)).T
    A = np.column_stack([a, np.ones_like(a)])
    return float(np.linalg.lstsq(A, b, rcond=None)[0][0])
