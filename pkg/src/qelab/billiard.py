"""Mushroom billiard: geometry, specular flow and phase-space fractions.

The mushroom M_t is the upper half-disk of radius r2 glued to the stalk
[-r1, r1] x [-t, 0].  Phase points carry a position and a unit direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rng import RNG_NAME, shard_generators

TOL = 1e-9

WALLS = ("semicircle", "hat_bottom_left", "hat_bottom_right", "stalk_left", "stalk_right", "stalk_floor")


class DegenerateError(ValueError):
    """Tangential incidence or corner hit: the flow is not continued."""


class RegionLabel(Enum):
    INTEGRABLE = 0
    ERGODIC = 1
    DEGENERATE = 2


@dataclass(frozen=True)
class MushroomParams:
    r1: float = 1.0
    r2: float = 2.0
    t: float = 1.0

    def __post_init__(self):
        if not (0 < self.r1 < self.r2):
            raise ValueError(f"need 0 < r1 < r2, got r1={self.r1}, r2={self.r2}")
        if not (0 < self.t <= 2):
            raise ValueError(f"need 0 < t <= 2, got t={self.t}")

    @property
    def C(self) -> float:
        return self.r2 / self.r1

    def corners(self) -> np.ndarray:
        r1, r2, t = self.r1, self.r2, self.t
        return np.array([[-r2, 0.0], [-r1, 0.0], [r1, 0.0], [r2, 0.0], [-r1, -t], [r1, -t]])


@dataclass(frozen=True)
class PhasePoint:
    x: tuple[float, float]
    v: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "x", (float(self.x[0]), float(self.x[1])))
        object.__setattr__(self, "v", (float(self.v[0]), float(self.v[1])))
        if abs(math.hypot(*self.v) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")


@dataclass(frozen=True)
class Collision:
    point: PhasePoint  # position on the wall, direction after reflection
    flight_time: float
    wall_id: str


@dataclass(frozen=True)
class LiouvilleFractions:
    mu_total: float
    mu_integrable: float
    d: float


@dataclass(frozen=True)
class MonteCarloResult:
    d_hat: float
    stderr: float
    n_samples: int
    n_redrawn: int
    seed: int
    rng: str


def area(params: MushroomParams) -> float:
    return math.pi * params.r2 ** 2 / 2 + 2 * params.r1 * params.t


def liouville_fractions(params: MushroomParams) -> LiouvilleFractions:
    """Liouville volume of the whole unit sphere bundle and of the integrable part."""
    C = params.C
    if C <= 1:
        raise ValueError("need r2 > r1")
    r1, r2 = params.r1, params.r2
    mu_int = (math.pi ** 2 * r2 ** 2 - 2 * math.pi * r1 ** 2 * math.sqrt(C * C - 1)
              - 2 * math.pi * r2 ** 2 * math.asin(1 / C))
    mu_tot = 2 * math.pi * area(params)
    return LiouvilleFractions(mu_tot, mu_int, mu_int / mu_tot)


def reflect(p: PhasePoint, normal, tol: float = TOL) -> PhasePoint:
    n = np.asarray(normal, dtype=float)
    v = np.asarray(p.v)
    dot = float(v @ n)
    if abs(dot) <= tol:
        raise DegenerateError(f"tangential incidence, <v,n>={dot:.3e}")
    w = v - 2 * dot * n
    return PhasePoint(p.x, (w[0], w[1]))


def wall_normals(x: np.ndarray, wall: np.ndarray, params: MushroomParams) -> np.ndarray:
    """Outward unit normals at boundary points x (shape (N,2)) with wall codes."""
    n = np.zeros_like(x)
    circ = wall == 0
    n[circ] = x[circ] / params.r2
    n[(wall == 1) | (wall == 2) | (wall == 5), 1] = -1.0
    n[wall == 3, 0] = -1.0
    n[wall == 4, 0] = 1.0
    return n


def _flight(x: np.ndarray, v: np.ndarray, params: MushroomParams):
    """First boundary hit for each row; returns (tau, wall code, degenerate flag)."""
    r1, r2, t = params.r1, params.r2, params.t
    px, py = x[:, 0], x[:, 1]
    vx, vy = v[:, 0], v[:, 1]
    tmin = 1e-12 * r2
    big = np.inf
    cand = np.full((len(x), 6), big)
    slack = 1e-12 * r2

    with np.errstate(divide="ignore", invalid="ignore"):
        b = px * vx + py * vy
        c = px * px + py * py - r2 * r2
        disc = np.maximum(b * b - c, 0.0)
        tau = -b + np.sqrt(disc)
        ok = (tau > tmin) & (py + tau * vy >= -slack)
        cand[:, 0] = np.where(ok, tau, big)

        tau = -py / vy
        hx = px + tau * vx
        ok = (tau > tmin) & (np.abs(hx) >= r1 - slack) & (np.abs(hx) <= r2 + slack)
        cand[:, 1] = np.where(ok & (hx < 0), tau, big)
        cand[:, 2] = np.where(ok & (hx > 0), tau, big)

        for col, wx in ((3, -r1), (4, r1)):
            tau = (wx - px) / vx
            hy = py + tau * vy
            ok = (tau > tmin) & (hy >= -t - slack) & (hy <= slack)
            cand[:, col] = np.where(ok, tau, big)

        tau = (-t - py) / vy
        hx = px + tau * vx
        ok = (tau > tmin) & (np.abs(hx) <= r1 + slack)
        cand[:, 5] = np.where(ok, tau, big)

    wall = np.argmin(cand, axis=1)
    tau = cand[np.arange(len(x)), wall]
    hit = x + tau[:, None] * v
    corners = params.corners()
    dist = np.min(np.linalg.norm(hit[:, None, :] - corners[None, :, :], axis=2), axis=1)
    degenerate = ~np.isfinite(tau) | (dist <= TOL * r2)
    normals = wall_normals(hit, wall, params)
    degenerate |= np.abs(np.sum(normals * v, axis=1)) <= TOL
    return tau, wall, degenerate


def _reflect_rows(v: np.ndarray, normals: np.ndarray) -> np.ndarray:
    dot = np.sum(v * normals, axis=1)
    return v - 2 * dot[:, None] * normals


def _project_to_wall(hit: np.ndarray, wall: np.ndarray, params: MushroomParams) -> np.ndarray:
    """Remove rounding drift so hit points lie exactly on their wall."""
    out = hit.copy()
    circ = wall == 0
    out[circ] *= params.r2 / np.linalg.norm(out[circ], axis=1)[:, None]
    out[(wall == 1) | (wall == 2), 1] = 0.0
    out[wall == 3, 0] = -params.r1
    out[wall == 4, 0] = params.r1
    out[wall == 5, 1] = -params.t
    return out


def next_collision(p: PhasePoint, params: MushroomParams) -> Collision:
    x = np.array([p.x])
    v = np.array([p.v])
    tau, wall, degen = _flight(x, v, params)
    if degen[0]:
        raise DegenerateError("corner hit or tangential incidence")
    hit = _project_to_wall(x + tau[:, None] * v, wall, params)
    vn = _reflect_rows(v, wall_normals(hit, wall, params))
    return Collision(PhasePoint(hit[0], vn[0]), float(tau[0]), WALLS[int(wall[0])])


def on_boundary_distance(x: np.ndarray, params: MushroomParams) -> np.ndarray:
    """Distance from each point to the nearest boundary piece."""
    r1, r2, t = params.r1, params.r2, params.t
    px, py = x[:, 0], x[:, 1]
    d = []
    ang = np.arctan2(np.maximum(py, 0), px)
    d.append(np.hypot(px - r2 * np.cos(ang), py - r2 * np.sin(ang)))
    cx = np.clip(np.abs(px), r1, r2)
    d.append(np.hypot(np.abs(px) - cx, py))
    cy = np.clip(py, -t, 0)
    d.append(np.hypot(np.abs(px) - r1, py - cy))
    cx = np.clip(px, -r1, r1)
    d.append(np.hypot(px - cx, py + t))
    return np.min(np.array(d), axis=0)


def chord_invariant(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    return x[..., 0] * v[..., 1] - x[..., 1] * v[..., 0]


def classify_batch(x: np.ndarray, v: np.ndarray, params: MushroomParams, tol: float = TOL) -> np.ndarray:
    """Label codes 0 integrable, 1 ergodic, 2 degenerate for rows of (x, v)."""
    x = np.atleast_2d(x)
    v = np.atleast_2d(v)
    r = np.hypot(x[:, 0], x[:, 1])
    annulus = (r > params.r1) & (r < params.r2) & (x[:, 1] > 0)
    L = np.abs(chord_invariant(x, v))
    labels = np.ones(len(x), dtype=np.int8)
    labels[annulus & (L >= params.r1)] = 0
    labels[annulus & (np.abs(L - params.r1) <= tol * params.r1)] = 2
    return labels


def classify_initial_condition(p: PhasePoint, params: MushroomParams) -> RegionLabel:
    code = classify_batch(np.array([p.x]), np.array([p.v]), params)[0]
    return RegionLabel(int(code))


@dataclass
class Trajectory:
    x: np.ndarray  # (bounces, N, 2) collision points
    v: np.ndarray  # directions after each reflection
    tau: np.ndarray  # (bounces, N) flight times
    wall: np.ndarray
    degenerate: np.ndarray  # (N,) true once a degenerate hit occurred


def simulate_orbits(x0: np.ndarray, v0: np.ndarray, params: MushroomParams, n_bounces: int) -> Trajectory:
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    N = len(x)
    xs = np.empty((n_bounces, N, 2))
    vs = np.empty((n_bounces, N, 2))
    taus = np.empty((n_bounces, N))
    walls = np.empty((n_bounces, N), dtype=np.int8)
    bad = np.zeros(N, dtype=bool)
    for i in range(n_bounces):
        tau, wall, degen = _flight(x, v, params)
        bad |= degen
        tau = np.where(bad, 0.0, tau)
        hit = _project_to_wall(x + tau[:, None] * v, wall, params)
        v = np.where(bad[:, None], v, _reflect_rows(v, wall_normals(hit, wall, params)))
        x = np.where(bad[:, None], x, hit)
        xs[i], vs[i], taus[i], walls[i] = x, v, tau, wall
    return Trajectory(xs, vs, taus, walls, bad)


def simulate_entry(x0: np.ndarray, v0: np.ndarray, params: MushroomParams, n_bounces: int):
    """Does each orbit reach the stalk or the inner disk within n_bounces flights?

    Returns (entered, degenerate) boolean arrays; an orbit stops being followed
    as soon as either happens.
    """
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    N = len(x)
    entered = np.zeros(N, dtype=bool)
    degenerate = np.zeros(N, dtype=bool)
    r1 = params.r1
    inside = (np.hypot(x[:, 0], x[:, 1]) < r1) | (x[:, 1] < 0)
    entered |= inside
    active = np.flatnonzero(~entered)
    for _ in range(n_bounces):
        if active.size == 0:
            break
        xa, va = x[active], v[active]
        tau, wall, degen = _flight(xa, va, params)
        # closest approach to the origin along the segment
        s = np.clip(-(xa[:, 0] * va[:, 0] + xa[:, 1] * va[:, 1]), 0.0, np.where(degen, 0.0, tau))
        near = xa + s[:, None] * va
        hit_inner = np.hypot(near[:, 0], near[:, 1]) < r1
        hit = _project_to_wall(xa + np.where(degen, 0.0, tau)[:, None] * va, wall, params)
        below = hit[:, 1] < 0
        e = (hit_inner | below) & ~degen
        entered[active[e]] = True
        degenerate[active[degen & ~hit_inner]] = True
        entered[active[degen & hit_inner]] = True
        x[active] = hit
        v[active] = _reflect_rows(va, wall_normals(hit, wall, params))
        keep = ~(e | degen)
        active = active[keep]
    return entered, degenerate


def _sample_domain(rng: np.random.Generator, n: int, params: MushroomParams):
    r1, r2, t = params.r1, params.r2, params.t
    out = np.empty((0, 2))
    while len(out) < n:
        m = int((n - len(out)) * 1.6) + 64
        px = rng.uniform(-r2, r2, m)
        py = rng.uniform(-t, r2, m)
        ok = np.where(py >= 0, px * px + py * py < r2 * r2, np.abs(px) < r1)
        out = np.vstack([out, np.column_stack([px[ok], py[ok]])])
    return out[:n]


def monte_carlo_fractions(params: MushroomParams, n_samples: int, seed: int,
                          shard_size: int = 1 << 18) -> MonteCarloResult:
    """Liouville-uniform estimate of the integrable fraction d."""
    n_samples = int(n_samples)
    if n_samples < 1000:
        raise ValueError("need at least 1e3 samples")
    n_shards = -(-n_samples // shard_size)
    gens = shard_generators(seed, n_shards)
    hits = 0
    redrawn = 0
    for i, g in enumerate(gens):
        m = min(shard_size, n_samples - i * shard_size)
        labels = np.empty(0, dtype=np.int8)
        while len(labels) < m:
            k = m - len(labels)
            x = _sample_domain(g, k, params)
            a = g.uniform(0, 2 * np.pi, k)
            v = np.column_stack([np.cos(a), np.sin(a)])
            lab = classify_batch(x, v, params)
            redrawn += int(np.sum(lab == 2))
            labels = np.concatenate([labels, lab[lab != 2]])
        hits += int(np.sum(labels == 0))
    d_hat = hits / n_samples
    stderr = math.sqrt(max(d_hat * (1 - d_hat), 1e-300) / n_samples)
    return MonteCarloResult(d_hat, stderr, n_samples, redrawn, int(seed), RNG_NAME)
