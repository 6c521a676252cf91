"""Five-point Dirichlet Laplacian on rasterised planar domains.

Boundary nodes are dropped (homogeneous Dirichlet), so the staircase boundary
costs O(h) in the spectrum; interior truncation is O(h^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .billiard import MushroomParams, area
from .quasimodes import quasi_eigen_family
from .spectral import c_clusters

SOLVER = "ARPACK implicitly restarted Lanczos (scipy eigsh), shift-invert at 0 with sparse LU"


class ResolutionError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class RasterDomain:
    h_grid: float
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray  # mask[i, j] <-> (xs[i], ys[j]) strictly inside
    params: MushroomParams | None = None

    @property
    def n_unknowns(self) -> int:
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        """Each interior node owns one h x h cell."""
        return self.n_unknowns * self.h_grid ** 2

    def coordinates(self):
        i, j = np.nonzero(self.mask)
        return self.xs[i], self.ys[j]


def rasterize_region(inside, bbox, h_grid: float, params=None) -> RasterDomain:
    """Mask of the nodes x0 + i h, y0 + j h for which inside(x, y) holds."""
    x0, x1, y0, y1 = bbox
    xs = x0 + h_grid * np.arange(int(round((x1 - x0) / h_grid)) + 1)
    ys = y0 + h_grid * np.arange(int(round((y1 - y0) / h_grid)) + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    mask = np.asarray(inside(X, Y), dtype=bool)
    mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = False
    return RasterDomain(h_grid, xs, ys, mask, params)


def rasterize(params: MushroomParams, h_grid: float) -> RasterDomain:
    """Mushroom mask on a grid whose node lines contain the stalk walls x = +-r1, y = -t."""
    r1, r2, t = params.r1, params.r2, params.t
    if h_grid > r1 / 10:
        raise ResolutionError(f"h_grid = {h_grid} exceeds r1/10 = {r1 / 10}")
    left = int(math.ceil((r2 - r1) / h_grid)) + 1
    right = int(math.ceil((r2 + r1) / h_grid)) + 1
    up = int(math.ceil((t + r2) / h_grid)) + 1
    xs = -r1 + h_grid * np.arange(-left, right + 1)
    ys = -t + h_grid * np.arange(0, up + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    e = 1e-9 * h_grid
    mask = np.where(Y > e, X * X + Y * Y < (r2 - e) ** 2, (np.abs(X) < r1 - e) & (Y > -t + e))
    mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = False
    if not mask.any():
        raise ResolutionError("empty raster")
    return RasterDomain(h_grid, xs, ys, mask, params)


def laplacian(domain: RasterDomain) -> sps.csc_matrix:
    """-Delta_h restricted to the mask (positive definite)."""
    m = domain.mask
    h2 = domain.h_grid ** 2
    idx = -np.ones(m.shape, dtype=np.int64)
    n = domain.n_unknowns
    idx[m] = np.arange(n)
    I, J = np.nonzero(m)
    me = idx[I, J]
    rows, cols, vals = [me], [me], [np.full(n, 4 / h2)]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        k = idx[I + di, J + dj]  # border is masked out, so no wraparound
        ok = k >= 0
        rows.append(me[ok])
        cols.append(k[ok])
        vals.append(np.full(int(ok.sum()), -1 / h2))
    return sps.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


@dataclass(frozen=True)
class SpectrumSlice:
    eigenvalues: np.ndarray
    n_computed: int
    residual_bounds: np.ndarray  # ||A u - E u|| / ||u|| per pair
    h_grid: float
    n_unknowns: int
    solver: str = SOLVER


def lowest_eigenvalues(domain: RasterDomain, N: int, seed: int = 0, maxiter: int | None = None) -> SpectrumSlice:
    n = domain.n_unknowns
    if N < 1 or N > n / 10:
        raise ValueError(f"N = {N} must lie in [1, dim/10] with dim = {n}")
    A = laplacian(domain)
    v0 = np.random.default_rng(seed).uniform(0.5, 1.5, n)
    try:
        w, V = eigsh(A, k=N, sigma=0.0, which="LM", v0=v0, tol=0, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        raise ConvergenceError(f"eigensolver stopped after its iteration cap: {exc}") from exc
    order = np.argsort(w)
    w, V = w[order], V[:, order]
    res = np.linalg.norm(A @ V - V * w, axis=0) / np.linalg.norm(V, axis=0)
    return SpectrumSlice(w, N, res, domain.h_grid, n)


@dataclass(frozen=True)
class WeylRecord:
    lam: float
    N_count: int
    weyl_main: float
    relative_gap: float


def weyl_deficit(slice_: SpectrumSlice, params: MushroomParams, lam: float) -> WeylRecord:
    if lam * slice_.h_grid >= 0.3:
        raise ValueError(f"lambda h = {lam * slice_.h_grid:.3g} is outside the trusted range (< 0.3)")
    E = slice_.eigenvalues
    if E[-1] <= lam * lam:
        raise ValueError("not enough eigenvalues computed to count up to lambda^2")
    count = int(np.searchsorted(E, lam * lam, side="right"))
    main = lam * lam * area(params) / (4 * math.pi)
    return WeylRecord(lam, count, main, (count - main) / main)


@dataclass
class BranchTable:
    ts: np.ndarray
    areas: np.ndarray
    eigenvalues: np.ndarray  # (len(ts), N), sorted in each row
    slopes: np.ndarray  # (len(ts)-1, N) forward differences in t
    speed_constants: np.ndarray  # (len(ts)-1,) slope >= -C E from rescaling
    monotone: np.ndarray  # per branch
    tolerance: float


def eigenvalue_branches(params_list, N: int, h_grid: float = 0.01, seed: int = 0,
                        tolerance: float = 1e-6) -> BranchTable:
    """Sorted spectra over an increasing t-grid.

    M_{t'} sits inside the dilation of M_t by t'/t, which gives the lower speed
    bound; node sets are nested when the t-steps are multiples of h_grid.
    """
    ps = list(params_list)
    if len({(p.r1, p.r2) for p in ps}) != 1:
        raise ValueError("all parameter sets must share (r1, r2)")
    ts = np.array([p.t for p in ps])
    if np.any(np.diff(ts) <= 0):
        raise ValueError("t-grid must be increasing")
    E = np.array([lowest_eigenvalues(rasterize(p, h_grid), N, seed=seed).eigenvalues for p in ps])
    dt = np.diff(ts)
    slopes = np.diff(E, axis=0) / dt[:, None]
    C = (1 - (ts[:-1] / ts[1:]) ** 2) / dt
    mono = np.all(np.diff(E, axis=0) <= tolerance * np.maximum(1.0, E[:-1]), axis=0)
    return BranchTable(ts, np.array([area(p) for p in ps]), E, slopes, C, mono, tolerance)


@dataclass(frozen=True)
class ClusterStat:
    fraction: float
    n_eigenvalues: int
    n_quasi: int
    n_clusters: int


def cluster_fraction(slice_: SpectrumSlice, params: MushroomParams, eps: float, c: float) -> ClusterStat:
    """Share of computed eigenvalues inside c-clusters of the semidisk quasi-eigenvalues."""
    E = slice_.eigenvalues
    lam = math.sqrt(E[-1] + c) + 1e-9
    _, _, al = quasi_eigen_family(params, lam, eps)
    q = al ** 2 / params.r2 ** 2
    if q.size == 0:
        return ClusterStat(0.0, E.size, 0, 0)
    cs = c_clusters(q, c)
    w = np.asarray(cs.windows)
    pos = np.searchsorted(w[:, 0], E, side="right") - 1
    hit = (pos >= 0) & (E <= w[np.maximum(pos, 0), 1])
    return ClusterStat(float(hit.mean()), int(E.size), int(q.size), len(cs.windows))
