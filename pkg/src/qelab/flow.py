"""Synthetic eigenvalue flow against slowly drifting quasi-eigenvalue windows.

Eigenlines are piecewise linear in t.  A fast line travels at its own speed in
[Q_minus, Q_plus] but sticks to any window it meets, riding it at the window's
slope (at most B), until the floor E(t1) + Q_minus (t - t1) catches up and pushes
it out through the top edge.  This is the worst case allowed by the two speed
constraints, so the measured occupancy is an honest test of the bound

    (Q_plus - B) * time_in_windows <= (Q_plus - Q_minus) * T + 2 w * #intervals.

Slow lines (a fraction eps_frac) have floor slope 0 and any free speed up to M_cap.
Lines are tracked as trajectories; they are not re-sorted when they cross.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import generator
from .spectral import c_clusters

EDGE_TOL = 1e-12


@dataclass(frozen=True)
class WindowConfig:
    width: float
    band: tuple | None  # (a, b); None means no clipping

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("window width must be positive")
        if self.band is not None and not self.band[0] < self.band[1]:
            raise ValueError("band must be a non-degenerate interval")


@dataclass(frozen=True)
class FlowConfig:
    n_lines: int = 1000
    density: float = 100.0  # eigenlines per unit energy at t1 (the Weyl rate)
    d: float = 0.3  # quasi-lines per eigenline
    B: float = 0.2
    Q_minus: float = 1.0
    Q_plus: float = 1.1
    M_cap: float = 2.0
    eps_frac: float = 0.02
    width: float = 1e-3
    t1: float = 0.0
    t2: float = 1.0
    degenerate: bool = False  # allow B == Q_minus (all lines parallel)

    def __post_init__(self):
        if self.degenerate:
            if not self.B <= self.Q_minus:
                raise ValueError("need B <= Q_minus")
        elif not self.B < self.Q_minus:
            raise ValueError(f"slow ordering violated: B = {self.B} must be < Q_minus = {self.Q_minus}")
        if not self.Q_minus <= self.Q_plus <= self.M_cap:
            raise ValueError("need Q_minus <= Q_plus <= M_cap")
        if not 0 <= self.eps_frac < 1 or not 0 < self.d or self.n_lines < 1 or not self.t1 < self.t2:
            raise ValueError("invalid flow parameters")
        if self.B < 0:
            raise ValueError("B must be non-negative")

    @property
    def initial_range(self) -> tuple:
        return (0.0, self.n_lines / self.density)

    @property
    def band(self) -> tuple:
        # below M_cap * T every line that can reach the band has been seeded
        lo, hi = self.initial_range
        return (lo + self.M_cap * (self.t2 - self.t1), hi)

    def window_config(self) -> WindowConfig:
        return WindowConfig(self.width, self.band)


@dataclass
class EigenLine:
    times: np.ndarray
    values: np.ndarray
    cohort: str = "fast"

    def __call__(self, t):
        return np.interp(t, self.times, self.values)


@dataclass
class FlowModel:
    lines: list
    quasi_mu0: np.ndarray  # quasi-line positions at t1
    quasi_slope: np.ndarray
    t1: float
    t2: float
    config: FlowConfig | None = None
    seed: int | None = None

    def quasi_at(self, t) -> np.ndarray:
        return self.quasi_mu0 + self.quasi_slope * (t - self.t1)

    def values_at(self, t) -> np.ndarray:
        return np.array([ln(t) for ln in self.lines])

    def values_on(self, t_grid) -> np.ndarray:
        """Array (n_lines, len(t_grid)) of E_j(t)."""
        t_grid = np.asarray(t_grid, dtype=float)
        return np.array([ln(t_grid) for ln in self.lines]).reshape(len(self.lines), t_grid.size)

    @property
    def fast(self) -> np.ndarray:
        return np.array([ln.cohort == "fast" for ln in self.lines], dtype=bool)


# ---------------------------------------------------------------- synthesis

def _simulate_line(e0, v, floor_slope, mu0, slope, w, t1, t2):
    t, E = t1, e0
    ts, es = [t1], [e0]
    skip = -1
    while t < t2:
        y = E - (mu0 + slope * (t - t1))
        rel = v - slope
        enter = np.full(y.shape, np.inf)
        enter[np.abs(y) < w] = 0.0
        up = (y <= -w) & (rel > 0)
        enter[up] = (-w - y[up]) / rel[up]
        down = (y >= w) & (rel < 0)
        enter[down] = (y[down] - w) / -rel[down]
        if skip >= 0:
            enter[skip] = np.inf
        m = int(np.argmin(enter)) if enter.size else -1
        if m < 0 or t + enter[m] >= t2:
            ts.append(t2)
            es.append(E + v * (t2 - t))
            break
        if enter[m] > 0:
            t += enter[m]
            E += v * enter[m]
            ts.append(t)
            es.append(E)
        b = slope[m]
        yc = min(max(E - (mu0[m] + b * (t - t1)), -w), w)
        if floor_slope <= b:
            release = math.inf
        else:
            release = max(t, (mu0[m] + yc - e0 + b * (-t1) + floor_slope * t1) / (floor_slope - b))
        if release >= t2:
            ts.append(t2)
            es.append(mu0[m] + b * (t2 - t1) + yc)
            break
        if release > t:
            ts.append(release)
            es.append(mu0[m] + b * (release - t1) + yc)
        # pushed by the floor through the top edge
        exit_t = release + (w - yc) / (floor_slope - b)
        floor = lambda s: e0 + floor_slope * (s - t1)  # noqa: E731
        if exit_t >= t2:
            ts.append(t2)
            es.append(floor(t2))
            break
        ts.append(exit_t)
        es.append(floor(exit_t))
        t, E, skip = exit_t, floor(exit_t), m
    # drop events that coincide up to rounding
    tol = 1e-12 * max(1.0, abs(t2))
    kt, ke = [ts[0]], [es[0]]
    for t, e in zip(ts[1:], es[1:]):
        if t - kt[-1] > tol:
            kt.append(t)
            ke.append(e)
    kt[-1], ke[-1] = ts[-1], es[-1]
    return EigenLine(np.array(kt), np.array(ke))


def _near(mu0, drift, lo, hi, w) -> np.ndarray:
    """Indices of quasi-lines whose path over the run can come within w of [lo, hi]."""
    return np.flatnonzero((mu0 + max(drift, 0.0) >= lo - 2 * w) & (mu0 + min(drift, 0.0) <= hi + 2 * w))


def synth_flow(config: FlowConfig, seed: int) -> FlowModel:
    rng = generator(seed)
    n = config.n_lines
    lo, hi = config.initial_range
    e0 = lo + (np.arange(n) + rng.random(n)) / config.density
    n_slow = int(round(config.eps_frac * n))
    slow = np.zeros(n, dtype=bool)
    slow[rng.permutation(n)[:n_slow]] = True
    speed = rng.uniform(config.Q_minus, config.Q_plus, n)
    speed[slow] = rng.uniform(0.0, config.M_cap, n_slow)
    n_q = int(round(config.d * config.density * (hi - lo)))
    qd = n_q / (hi - lo)
    mu0 = lo + (np.arange(n_q) + rng.random(n_q)) / qd
    qslope = np.full(n_q, config.B) if config.degenerate else rng.uniform(0.0, config.B, n_q)
    lines = []
    T = config.t2 - config.t1
    for j in range(n):
        fs = 0.0 if slow[j] else config.Q_minus
        # only windows the line can meet
        near = _near(mu0, config.B * T, e0[j], e0[j] + config.M_cap * T, config.width)
        ln = _simulate_line(e0[j], speed[j], fs, mu0[near], qslope[near], config.width, config.t1, config.t2)
        ln.cohort = "slow" if slow[j] else "fast"
        lines.append(ln)
    return FlowModel(lines, mu0, qslope, config.t1, config.t2, config, seed)


# ---------------------------------------------------------------- windows and occupancy

def windows(model: FlowModel, cfg: WindowConfig, t: float) -> list:
    """W(t) as sorted disjoint closed intervals, clipped to the band."""
    if not model.t1 <= t <= model.t2:
        raise ValueError("t outside the model's time range")
    cl = c_clusters(model.quasi_at(t), cfg.width)
    out = []
    for lo, hi in cl.windows:
        if cfg.band is not None:
            lo, hi = max(lo, cfg.band[0]), min(hi, cfg.band[1])
            if lo > hi:
                continue
        out.append((lo, hi))
    return out


def _in_union(values, intervals) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if not intervals:
        return np.zeros(v.shape, dtype=bool)
    w = np.asarray(intervals, dtype=float)
    slack = EDGE_TOL * max(1.0, float(np.abs(w).max()))
    i = np.searchsorted(w[:, 0] - slack, v, side="right") - 1
    ok = i >= 0
    res = np.zeros(v.shape, dtype=bool)
    res[ok] = v[ok] <= w[i[ok], 1] + slack
    return res


def _linear_window(y0, rate, w, length):
    """Sub-interval of [0, length] where |y0 + rate s| <= w; arrays in, (lo, hi) arrays out."""
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (-w - y0) / rate
        b = (w - y0) / rate
    lo = np.where(rate > 0, a, np.where(rate < 0, b, np.where(np.abs(y0) <= w, -np.inf, np.inf)))
    hi = np.where(rate > 0, b, np.where(rate < 0, a, np.where(np.abs(y0) <= w, np.inf, -np.inf)))
    return np.maximum(lo, 0.0), np.minimum(hi, length)


def _window_intervals(line: EigenLine, model: FlowModel, cfg: WindowConfig):
    """All (start, end, window id) with the line inside that window and inside the band."""
    ta, tb = line.times[:-1], line.times[1:]
    L = tb - ta
    ok = L > 0
    ta, L = ta[ok], L[ok]
    ea = line.values[:-1][ok]
    s = (line.values[1:][ok] - ea) / L
    lo, hi = np.zeros_like(L), L.copy()
    if cfg.band is not None:
        a, b = cfg.band
        blo, bhi = _linear_window(ea - (a + b) / 2, s, (b - a) / 2, L)
        lo, hi = np.maximum(lo, blo), np.minimum(hi, bhi)
    T = model.t2 - model.t1
    lo_q = model.quasi_mu0 + np.minimum(model.quasi_slope, 0) * T
    hi_q = model.quasi_mu0 + np.maximum(model.quasi_slope, 0) * T
    near = np.flatnonzero((hi_q >= line.values.min() - 2 * cfg.width) & (lo_q <= line.values.max() + 2 * cfg.width))
    y0 = ea[:, None] - (model.quasi_mu0[near] + model.quasi_slope[near] * (ta[:, None] - model.t1))
    # lines captured at an edge ride it exactly; allow for rounding
    slack = EDGE_TOL * max(1.0, float(np.abs(line.values).max()))
    wl, wh = _linear_window(y0, s[:, None] - model.quasi_slope[near][None, :], cfg.width + slack, L[:, None])
    wl, wh = np.maximum(wl, lo[:, None]), np.minimum(wh, hi[:, None])
    A, Bv = ta[:, None] + wl, ta[:, None] + wh
    seg, win = np.nonzero(A < Bv)
    return A[seg, win], Bv[seg, win], near[win]


def _union_measure(lo, hi) -> float:
    if lo.size == 0:
        return 0.0
    order = np.argsort(lo, kind="stable")
    total, cur_lo, cur_hi = 0.0, lo[order[0]], hi[order[0]]
    for i in order[1:]:
        if lo[i] > cur_hi:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo[i], hi[i]
        else:
            cur_hi = max(cur_hi, hi[i])
    return total + (cur_hi - cur_lo)


def interval_cover(line: EigenLine, model: FlowModel, cfg: WindowConfig) -> list:
    """Inductive cover of {t : E(t) in W(t)} by [s_j, s_j'] with window ids m_j.

    s_j is the first time after s_{j-1}' the line is in W; m_j a window holding it
    just after s_j (the one it stays in longest); s_j' the last time it is in m_j.
    """
    lo, hi, ids = _window_intervals(line, model, cfg)
    return _cover(lo, hi, ids)


def reentered_windows(line: EigenLine, model: FlowModel, cfg: WindowConfig) -> set:
    """Windows the line leaves and later enters again; only these make the cover overshoot."""
    lo, hi, ids = _window_intervals(line, model, cfg)
    out = set()
    for m in np.unique(ids):
        sel = ids == m
        order = np.argsort(lo[sel])
        a, b = lo[sel][order], hi[sel][order]
        if np.any(a[1:] > np.maximum.accumulate(b)[:-1] + 1e-12):
            out.add(int(m))
    return out


def _cover(lo, hi, ids) -> list:
    if lo.size == 0:
        return []
    last = {}
    for m, h in zip(ids.tolist(), hi.tolist()):
        last[m] = max(last.get(m, -np.inf), h)
    pieces = sorted(zip(lo.tolist(), hi.tolist(), ids.tolist()))
    cover = []
    prev = -np.inf
    used = set()
    while True:
        live = [(max(a, prev), b, m) for a, b, m in pieces if b > prev and m not in used]
        if not live:
            break
        s = min(p[0] for p in live)
        cand = {m for a, b, m in live if a <= s < b}
        m = max(cand, key=lambda c: (last[c], -c))
        cover.append((float(s), float(last[m]), int(m)))
        used.add(m)
        prev = last[m]
    return cover


@dataclass
class OccupancyReport:
    q: np.ndarray
    time_in_windows: np.ndarray
    fast: np.ndarray
    n_intervals: np.ndarray  # windows visited, an upper bound for the cover length
    line_bounds: np.ndarray  # per-line occupancy bound from the two speed constraints
    mean_fast: float
    sup_fast: float
    mechanism_bound: float
    mechanism_holds: bool
    d_target: float | None
    t_grid: np.ndarray
    counts: np.ndarray  # N(t)
    quasi_counts: np.ndarray
    ratios: np.ndarray
    mean_ratio: float
    min_ratio: float
    t_star: float | None


def count_in_windows(model: FlowModel, cfg: WindowConfig, t: float, E=None):
    """(N(t), number of quasi-lines in the band at t)."""
    W = windows(model, cfg, t)
    if E is None:
        E = model.values_at(t)
    if cfg.band is not None:
        E = E[(E >= cfg.band[0]) & (E <= cfg.band[1])]
    mu = model.quasi_at(t)
    if cfg.band is not None:
        mu = mu[(mu >= cfg.band[0]) & (mu <= cfg.band[1])]
    return int(_in_union(E, W).sum()), int(mu.size)


def occupancy(model: FlowModel, cfg: WindowConfig, t_grid=None) -> OccupancyReport:
    T = model.t2 - model.t1
    n = len(model.lines)
    occ = np.zeros(n)
    nint = np.zeros(n, dtype=int)
    for j, ln in enumerate(model.lines):
        lo, hi, ids = _window_intervals(ln, model, cfg)
        occ[j] = _union_measure(lo, hi)
        # the cover uses each window at most once
        nint[j] = np.unique(ids).size
    q = np.clip(occ / T, 0.0, 1.0)
    fast = model.fast
    c = model.config
    if c is not None and c.Q_plus > c.B:
        bounds = ((c.Q_plus - c.Q_minus) + 2 * cfg.width * nint / T) / (c.Q_plus - c.B)
    else:
        bounds = np.ones(n)
    if t_grid is None:
        t_grid = np.linspace(model.t1, model.t2, 201)
    t_grid = np.asarray(t_grid, dtype=float)
    counts = np.zeros(t_grid.size, dtype=int)
    nq = np.zeros(t_grid.size, dtype=int)
    vals = model.values_on(t_grid)
    for i, t in enumerate(t_grid):
        counts[i], nq[i] = count_in_windows(model, cfg, t, vals[:, i])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(nq > 0, counts / np.maximum(nq, 1), np.nan)
    ok = np.isfinite(ratios)
    min_ratio = float(np.nanmin(ratios)) if ok.any() else math.nan
    t_star = None
    if ok.any() and min_ratio < 0.5:
        t_star = float(t_grid[ok][np.argmin(ratios[ok])])
    qf = q[fast]
    return OccupancyReport(
        q=q, time_in_windows=occ, fast=fast, n_intervals=nint, line_bounds=bounds,
        mean_fast=float(qf.mean()) if qf.size else 0.0,
        sup_fast=float(qf.max()) if qf.size else 0.0,
        mechanism_bound=float(bounds[fast].max()) if fast.any() else 1.0,
        mechanism_holds=bool(np.all(q[fast] <= bounds[fast] + 1e-12)),
        d_target=c.d if c is not None else None,
        t_grid=t_grid, counts=counts, quasi_counts=nq, ratios=ratios,
        mean_ratio=float(np.nanmean(ratios)) if ok.any() else math.nan,
        min_ratio=min_ratio, t_star=t_star,
    )


# ---------------------------------------------------------------- good times

@dataclass
class GoodTimeReport:
    t_grid: np.ndarray
    ratio: np.ndarray  # min over the count grid of #eigen in first n windows / n
    good: np.ndarray
    counts: np.ndarray
    count_grid: list
    epsilon: float


def good_time_detect(model: FlowModel, cfg: WindowConfig, t_grid, epsilon: float, count_grid=None) -> GoodTimeReport:
    """Flag t where the eigenvalue-to-quasi-eigenvalue ratio over the first n windows stays below 1 + eps^2.

    The liminf over n is replaced by a min over count_grid (default: the upper
    half of the available quasi-lines).
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    ratio = np.zeros(t_grid.size)
    counts = np.zeros(t_grid.size, dtype=int)
    used_grid = []
    vals = model.values_on(t_grid)
    for i, t in enumerate(t_grid):
        mu = np.sort(model.quasi_at(t))
        E = vals[:, i]
        if cfg.band is not None:
            mu = mu[(mu >= cfg.band[0]) & (mu <= cfg.band[1])]
            E = E[(E >= cfg.band[0]) & (E <= cfg.band[1])]
        counts[i] = int(_in_union(E, windows(model, cfg, t)).sum())
        nq = mu.size
        if nq == 0:
            ratio[i] = 0.0
            continue
        grid = count_grid if count_grid is not None else range(max(1, (nq + 1) // 2), nq + 1)
        best = math.inf
        for n in grid:
            if n > nq:
                continue
            W = c_clusters(mu[:n], cfg.width).windows
            best = min(best, _in_union(E, W).sum() / n)
        ratio[i] = best
        used_grid = list(grid)
    return GoodTimeReport(t_grid, ratio, ratio < 1 + epsilon ** 2, counts, used_grid, epsilon)


# ---------------------------------------------------------------- density lemma

@dataclass
class DensityReport:
    members: np.ndarray  # membership of 1..N_max
    N: list  # cutover indices N_j that fall inside the horizon
    achieved_density: float  # min of d_n(S) over the upper half of the horizon
    density_holds: bool
    limit_holds: bool
    hypotheses_hold: bool
    max_g_after: list
    horizon: int
    d: float


def full_density_subsequence(g, S_family, eps, eps_prime, d: float, slack: float | None = None) -> DensityReport:
    """Build S = complement of the union over j of {g >= 2 eps'_j} beyond N_j.

    N_j is the first index past N_{j-1} from which the running density of
    {g >= 2 eps'_j} stays below 1 - d + 2 eps_j up to the horizon.
    """
    g = np.asarray(g, dtype=float)
    N_max = g.size
    n = np.arange(1, N_max + 1)
    tail = n >= max(1, N_max // 2)
    hyp = True
    for S_j, e in zip(S_family, eps):
        mask = np.asarray(S_j(n), dtype=bool)
        dn = np.cumsum(mask) / n
        if dn[tail].min() <= d - e:
            hyp = False
    for S_j, ep in zip(S_family, eps_prime):
        mask = np.asarray(S_j(n), dtype=bool) & tail
        if mask.any() and g[mask].max() >= ep:
            hyp = False
    bad = np.zeros(N_max, dtype=bool)
    Ns = []
    active_eps = np.full(N_max, np.nan)
    prev = 0
    for e, ep in zip(eps, eps_prime):
        Bj = g >= 2 * ep
        dn = np.cumsum(Bj) / n
        viol = np.flatnonzero(dn[prev:] >= 1 - d + 2 * e)
        Nj = max(prev + 1, prev + int(viol[-1]) + 2 if viol.size else prev + 1)
        if Nj > N_max:
            break
        Ns.append(Nj)
        bad |= Bj & (n >= Nj)
        active_eps[Nj - 1:] = e
        prev = Nj
    members = ~bad
    dS = np.cumsum(members) / n
    achieved = float(dS[tail].min())
    ok_range = ~np.isnan(active_eps)
    density_holds = bool(np.all(dS[ok_range] >= d - 2 * active_eps[ok_range] - 1e-15))
    if slack is not None:
        density_holds = density_holds and achieved >= d - slack
    max_after = []
    limit_holds = True
    for Nj, ep in zip(Ns, eps_prime):
        sel = members & (n >= Nj)
        mg = float(g[sel].max()) if sel.any() else 0.0
        max_after.append(mg)
        if mg >= 2 * ep:
            limit_holds = False
    return DensityReport(members, Ns, achieved, density_holds, limit_holds, hyp, max_after, N_max, d)


def density_scenario(N_max: int, seed: int = 0, bad_density: float = 0.2, d: float = 0.78, levels: int = 12) -> DensityReport:
    """g = 1 on a random set of the given density, U_n / sqrt(n) elsewhere."""
    u = generator(seed).random((N_max, 2))
    bad = u[:, 0] < bad_density
    n = np.arange(1, N_max + 1)
    g = np.where(bad, 1.0, u[:, 1] / np.sqrt(n))
    good = ~bad
    eps = [0.02 * 2.0 ** -j for j in range(levels)]
    eps_prime = [0.5 * 2.0 ** -j for j in range(levels)]
    family = [lambda k, good=good: good[k - 1]] * levels
    return full_density_subsequence(g, family, eps, eps_prime, d)
