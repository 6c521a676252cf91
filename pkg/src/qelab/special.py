"""Integer-order Bessel functions, Airy zeros and Bessel zeros.

J_n is evaluated by Miller's downward recurrence normalised with the
identity J_0^2 + 2 sum J_k^2 = 1 (magnitude) and J_0 + 2 sum J_2k = 1 (sign).
Below the turning point the envelope bound
    |J_n(n s)| <= (s e^{sqrt(1-s^2)} / (1 + sqrt(1-s^2)))^n
decides whether the value is representable at all.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

_BIG = 2.0 ** 332  # ~1e100, rescaling threshold
_SMALL = 2.0 ** -332
_LOG_UNDERFLOW = -300 * math.log(10)


class BesselUnderflowWarning(RuntimeWarning):
    pass


class BracketError(RuntimeError):
    """Zero refinement left the bracket that isolates the requested zero."""


def log_envelope(n, s):
    """log of (s e^{w} / (1 + w))^n with w = sqrt(1 - s^2), for 0 < s <= 1."""
    s = np.asarray(s, dtype=float)
    w = np.sqrt(np.maximum(1 - s * s, 0.0))
    with np.errstate(divide="ignore"):
        return n * (np.log(s) + w - np.log1p(w))


def envelope_bound(n, s):
    return np.exp(log_envelope(n, s))


def _miller(n: np.ndarray, x: np.ndarray):
    """J_{n-1}, J_n, J_{n+1} for positive x by normalised downward recurrence."""
    top = int(np.max(np.maximum(n + 1, np.ceil(x))))
    M = top + 30 + int(math.sqrt(60.0 * max(top, 1)))
    M += M % 2
    a = np.zeros_like(x)  # b_{k+1}
    b = np.full_like(x, _SMALL)  # b_k, starting at k = M
    s_sq = np.zeros_like(x)
    s_lin = np.zeros_like(x)
    cap_m = np.zeros_like(x)
    cap_0 = np.zeros_like(x)
    cap_p = np.zeros_like(x)
    two_over_x = 2.0 / x
    for k in range(M, 0, -1):
        # b currently holds index k
        if k <= top + 1:
            sel = n + 1 == k
            if sel.any():
                cap_p = np.where(sel, b, cap_p)
            sel = n == k
            if sel.any():
                cap_0 = np.where(sel, b, cap_0)
            sel = n - 1 == k
            if sel.any():
                cap_m = np.where(sel, b, cap_m)
        s_sq += 2 * b * b
        if k % 2 == 0:
            s_lin += 2 * b
        nb = k * two_over_x * b - a
        a, b = b, nb
        big = np.abs(b) > _BIG
        if big.any():
            f = np.where(big, _SMALL, 1.0)
            a = a * f
            b = b * f
            s_sq = s_sq * f * f
            s_lin = s_lin * f
            cap_m = cap_m * f
            cap_0 = cap_0 * f
            cap_p = cap_p * f
    # b now holds index 0
    s_sq += b * b
    s_lin += b
    cap_0 = np.where(n == 0, b, cap_0)
    cap_m = np.where(n - 1 == 0, b, cap_m)
    # J_{-1} = -J_1: when n == 0 the index -1 value is minus the index-1 value
    cap_m = np.where(n == 0, -a, cap_m)
    scale = np.sign(s_lin) / np.sqrt(s_sq)
    return cap_m * scale, cap_0 * scale, cap_p * scale


def _bessel_triplet(n, x):
    n = np.asarray(n)
    x = np.asarray(x, dtype=float)
    n, x = np.broadcast_arrays(n, x)
    if np.any(n < 0) or np.any(x < 0):
        raise ValueError("need n >= 0 and x >= 0")
    n = n.astype(np.int64)
    out = [np.zeros(n.shape), np.zeros(n.shape), np.zeros(n.shape)]
    zero = x == 0
    if zero.any():
        out[1][zero & (n == 0)] = 1.0
        out[0][zero & (n == 1)] = 1.0  # J_0(0) as the n-1 neighbour
    live = ~zero
    if live.any():
        nl, xl = n[live], x[live]
        # envelope regime check below the turning point
        below = xl < nl
        logenv = np.full(xl.shape, 0.0)
        logenv[below] = log_envelope(nl[below], xl[below] / nl[below])
        under = logenv < _LOG_UNDERFLOW
        if under.any():
            warnings.warn(f"{int(under.sum())} value(s) of J_n below 1e-300 set to 0",
                          BesselUnderflowWarning, stacklevel=3)
        ok = ~under
        vals = [np.zeros(xl.shape) for _ in range(3)]
        if ok.any():
            jm, j0, jp = _miller(nl[ok], xl[ok])
            vals[0][ok], vals[1][ok], vals[2][ok] = jm, j0, jp
        for i in range(3):
            out[i][live] = vals[i]
    for o in out:
        if not np.all(np.isfinite(o)):
            raise FloatingPointError("non-finite Bessel value")
    return out


def bessel_j(n, x):
    """J_n(x) for integer n >= 0 and real x >= 0 (broadcasting)."""
    _, j, _ = _bessel_triplet(n, x)
    return j if j.ndim else float(j)


def bessel_jp(n, x):
    """Derivative J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2."""
    jm, _, jp = _bessel_triplet(n, x)
    d = 0.5 * (jm - jp)
    return d if d.ndim else float(d)


# --- Airy zeros -------------------------------------------------------------

def _airy_guess(k):
    t = 3 * np.pi * (4 * np.asarray(k, dtype=float) - 1) / 8
    t2 = t ** -2
    return -t ** (2 / 3) * (1 + t2 * (5 / 48 + t2 * (-5 / 36 + t2 * (77125 / 82944))))


def airy_zeros(kmax: int) -> np.ndarray:
    """First kmax negative zeros of Ai, Newton-refined from their asymptotic series."""
    k = np.arange(1, int(kmax) + 1)
    a = _airy_guess(k)
    for _ in range(20):
        ai, aip, _, _ = _sp.airy(a)
        step = ai / aip
        a = a - step
        if np.max(np.abs(step) / np.abs(a)) < 1e-15:
            break
    if np.max(np.abs(_sp.airy(a)[0])) >= 1e-10:
        raise RuntimeError("Airy zero refinement did not converge")
    return a


def airy_zero(k: int) -> float:
    if k < 1:
        raise ValueError("k >= 1")
    return float(airy_zeros(k)[-1])


# --- z(zeta) ----------------------------------------------------------------

def _s_minus_atan(s):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = s - np.arctan(s)
    small = s < 0.1
    if small.any():
        ss = s[small]
        s2 = ss * ss
        # alternating series s^3/3 - s^5/5 + ...
        term = ss ** 3
        total = np.zeros_like(ss)
        for j in range(1, 13):
            total += (-1) ** (j + 1) * term / (2 * j + 1)
            term = term * s2
        out[small] = total
    return out


def z_of_zeta(zeta):
    """Solve (2/3)(-zeta)^{3/2} = sqrt(z^2-1) - arcsec z for z >= 1.

    Works in s = sqrt(z^2-1), where the equation reads s - atan s = c and is
    monotone; Newton is safeguarded by the bracket [(3c)^{1/3}, c + pi/2].
    """
    scalar = np.ndim(zeta) == 0
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    if np.any(zeta > 0):
        raise ValueError("zeta must be <= 0")
    c = (2.0 / 3.0) * (-zeta) ** 1.5
    lo = np.cbrt(3 * c)
    hi = c + np.pi / 2
    lo = np.minimum(lo, hi)
    s = np.where(c < 1, lo, np.maximum(lo, c + np.pi / 2 - 1 / np.maximum(c, 1e-300)))
    s = np.clip(s, lo, hi)
    for _ in range(100):
        g = _s_minus_atan(s) - c
        lo = np.where(g < 0, s, lo)
        hi = np.where(g > 0, s, hi)
        dg = s * s / (1 + s * s)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dg > 0, g / dg, 0.0)
        sn = s - step
        bad = ~((sn > lo) & (sn < hi))
        sn = np.where(bad, 0.5 * (lo + hi), sn)
        done = np.abs(sn - s) <= 1e-16 * np.maximum(s, 1e-300)
        s = sn
        if np.all(done | (c == 0)):
            break
    z = np.sqrt(1 + s * s)
    z = np.where(c == 0, 1.0, z)
    return float(z[0]) if scalar else z


# --- Bessel zeros -----------------------------------------------------------

@dataclass(frozen=True)
class BesselZero:
    n: int
    k: int
    alpha: float


def _mcmahon(n, k):
    mu = 4.0 * np.asarray(n, dtype=float) ** 2
    beta = (np.asarray(k, dtype=float) + 0.5 * np.asarray(n, dtype=float) - 0.25) * np.pi
    e = 8 * beta
    return (beta - (mu - 1) / e - 4 * (mu - 1) * (7 * mu - 31) / (3 * e ** 3)
            - 32 * (mu - 1) * (83 * mu * mu - 982 * mu + 3779) / (15 * e ** 5))


def zero_guess(n, k, airy=None):
    """Initial guesses: uniform asymptotics n z(n^{-2/3} a_k), McMahon when n = 0 or k >> n."""
    n = np.asarray(n, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    n, k = np.broadcast_arrays(n, k)
    if airy is None:
        airy = airy_zeros(int(k.max()))
    a = airy[k - 1]
    nn = np.maximum(n, 1).astype(float)
    uni = nn * np.asarray(z_of_zeta(a * nn ** (-2 / 3)))
    mc = _mcmahon(n, k)
    use_mc = (n == 0) | (k > 8 * np.maximum(n, 1) ** 2)
    return np.where(use_mc, mc, uni)


def _refine(n, k, guess, lo, hi):
    x = guess.copy()
    for _ in range(40):
        jm, j, jp = _bessel_triplet(n, x)
        d = 0.5 * (jm - jp)
        step = j / d
        xn = x - step
        x = xn
        if np.all(np.abs(step) <= 4e-16 * x):
            break
    escaped = ~((x > lo) & (x < hi)) | ~np.isfinite(x)
    if escaped.any():
        idx = np.flatnonzero(escaped)
        for i in idx:
            x[i] = _bisect_zero(int(n[i]), float(lo[i]), float(hi[i]), int(k[i]))
    resid = np.abs(bessel_j(n, x))
    if np.any(resid >= 1e-10):
        raise BracketError("zero refinement did not reach |J_n| < 1e-10")
    return x


def _bisect_zero(n, a, b, k):
    fa, fb = bessel_j(n, a), bessel_j(n, b)
    if fa * fb > 0:
        raise BracketError(f"no sign change isolating zero k={k} of J_{n} in [{a}, {b}]")
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = bessel_j(n, m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
        if b - a <= 2e-16 * b:
            break
    return 0.5 * (a + b)


def _brackets(n, k, airy):
    g = zero_guess(n, k, airy)
    gprev = np.where(k > 1, zero_guess(n, np.maximum(k - 1, 1), airy), np.maximum(n, 0))
    gnext = zero_guess(n, k + 1, airy)
    lo = np.where(k > 1, 0.5 * (gprev + g), np.maximum(n, 1e-300) * (n > 0))
    hi = 0.5 * (g + gnext)
    return g, lo, hi


def bessel_zeros_nk(n, k) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    n, k = np.broadcast_arrays(n, k)
    if np.any(n < 0) or np.any(k < 1):
        raise ValueError("need n >= 0, k >= 1")
    airy = airy_zeros(int(k.max()) + 1)
    g, lo, hi = _brackets(n.ravel(), k.ravel(), airy)
    return _refine(n.ravel(), k.ravel(), g, lo, hi).reshape(n.shape)


def bessel_zero(n: int, k: int) -> BesselZero:
    alpha = float(bessel_zeros_nk(np.array([n]), np.array([k]))[0])
    return BesselZero(int(n), int(k), alpha)


def zero_count_estimate(n, X):
    """Asymptotic number of zeros of J_n below X (phase of the Debye expansion)."""
    n = np.asarray(n, dtype=float)
    X = np.asarray(X, dtype=float)
    ratio = np.clip(np.where(X > 0, n / np.maximum(X, 1e-300), np.inf), 0, 1)
    ph = np.where(X > n, np.sqrt(np.maximum(X * X - n * n, 0)) - n * np.arccos(ratio), 0.0)
    return ph / np.pi + 0.25


def bessel_zeros_below(n, X) -> list[np.ndarray]:
    """All zeros of J_{n_i} strictly below X_i, one array per entry."""
    n = np.asarray(n, dtype=np.int64).ravel()
    X = np.asarray(X, dtype=float).ravel()
    kmax = np.floor(zero_count_estimate(n, X)).astype(np.int64) + 2
    kmax = np.maximum(kmax, 1)
    rows = np.repeat(np.arange(len(n)), kmax)
    ks = np.concatenate([np.arange(1, m + 1) for m in kmax])
    zs = bessel_zeros_nk(n[rows], ks)
    out = []
    start = 0
    for i, m in enumerate(kmax):
        z = zs[start:start + m]
        start += m
        if z[-1] < X[i]:
            # estimate was short; extend until a zero exceeds X
            k0 = m
            while z[-1] < X[i]:
                extra = bessel_zeros_nk(np.full(4, n[i]), np.arange(k0 + 1, k0 + 5))
                z = np.concatenate([z, extra])
                k0 += 4
        out.append(z[z < X[i]])
    return out
