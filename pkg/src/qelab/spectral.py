"""Matching eigenvectors of a finite self-adjoint system by near-orthogonal quasimodes.

Given quasimodes v_i with residuals below eps1 and mutual overlaps below eps2,
and few eigenvalues inside the c-windows around the quasi-eigenvalues, most of
the eigenvectors in those windows lie close to span{v_i}.  Everything here is
finite dimensional; norms of matrices are Frobenius (Hilbert-Schmidt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class PreconditionError(ValueError):
    pass


class RankDeficiencyError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteSpectralSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        U = np.asarray(self.eigenvectors, dtype=float)
        if U.ndim != 2 or U.shape[1] != lam.size:
            raise ValueError("need one eigenvector column per eigenvalue")
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be non-decreasing")
        if np.max(np.abs(U.T @ U - np.eye(lam.size))) > 1e-10:
            raise ValueError("eigenvectors are not orthonormal")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", U)

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    def apply(self, v):
        U = self.eigenvectors
        return U @ (self.eigenvalues[:, None] * (U.T @ v)) if v.ndim == 2 else U @ (self.eigenvalues * (U.T @ v))


@dataclass(frozen=True)
class QuasimodeBatch:
    vectors: np.ndarray  # columns, unit norm
    quasi_eigenvalues: np.ndarray
    eps1: float
    eps2: float

    def __post_init__(self):
        V = np.asarray(self.vectors, dtype=float)
        if np.max(np.abs(np.linalg.norm(V, axis=0) - 1)) > 1e-10:
            raise ValueError("quasimodes must be normalised")
        object.__setattr__(self, "vectors", V)
        object.__setattr__(self, "quasi_eigenvalues", np.asarray(self.quasi_eigenvalues, dtype=float))

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def residuals(self, system: FiniteSpectralSystem) -> np.ndarray:
        R = system.apply(self.vectors) - self.vectors * self.quasi_eigenvalues
        return np.linalg.norm(R, axis=0)

    def max_overlap(self) -> float:
        G = self.vectors.T @ self.vectors
        np.fill_diagonal(G, 0.0)
        return float(np.max(np.abs(G))) if self.n > 1 else 0.0


@dataclass(frozen=True)
class ClusterSet:
    windows: list  # (lo, hi) sorted, disjoint
    membership: np.ndarray  # cluster index of each input value, input order

    def count_in(self, values) -> np.ndarray:
        """Number of values falling in each window (closed intervals)."""
        v = np.sort(np.asarray(values, dtype=float))
        w = np.asarray(self.windows, dtype=float).reshape(-1, 2)
        return np.searchsorted(v, w[:, 1], side="right") - np.searchsorted(v, w[:, 0], side="left")


def c_clusters(quasi_eigenvalues, c: float) -> ClusterSet:
    """Connected components of the union of [a - c, a + c].

    Intervals that only touch at a point, up to rounding, stay separate.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    a = np.asarray(quasi_eigenvalues, dtype=float)
    if a.size == 0:
        return ClusterSet([], np.zeros(0, dtype=int))
    order = np.argsort(a, kind="stable")
    s = a[order]
    slack = 1e-12 * max(1.0, float(np.max(np.abs(s))))
    breaks = np.diff(s) >= 2 * c - slack
    label_sorted = np.concatenate([[0], np.cumsum(breaks)])
    starts = np.flatnonzero(np.concatenate([[True], breaks]))
    ends = np.concatenate([starts[1:] - 1, [s.size - 1]])
    windows = [(float(s[i] - c), float(s[j] + c)) for i, j in zip(starts, ends)]
    membership = np.empty(a.size, dtype=int)
    membership[order] = label_sorted
    return ClusterSet(windows, membership)


def inv_sqrt_near_identity(M, tol: float = 1e-13) -> np.ndarray:
    """M^{-1/2} from the binomial series in E = M - I; needs ||E||_HS < 1/2."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    E = M - np.eye(n)
    e = np.linalg.norm(E)
    if e >= 0.5:
        raise PreconditionError(f"||M - I||_HS = {e:.3g} >= 1/2")
    A = np.eye(n)
    P = np.eye(n)
    coef = 1.0
    k = 0
    while True:
        k += 1
        coef *= -(2 * k - 1) / (2 * k)  # (-1)^k C(2k,k) 4^-k
        P = P @ E
        term = coef * P
        A = A + term
        if np.linalg.norm(term) < tol or k > 10_000:
            break
    A = 0.5 * (A + A.T)
    defect = np.linalg.norm(A @ M @ A.T - np.eye(n))
    if defect >= 10 * tol + 1e-14:
        raise PreconditionError(f"series did not reach tolerance: ||AMA^T - I|| = {defect:.3g}")
    return A


def _orthonormal_basis(basis) -> np.ndarray:
    B = np.asarray(basis, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[1] == 0:
        return B
    Q, R = np.linalg.qr(B)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-12 * max(d.max(), 1e-300):
        raise RankDeficiencyError("basis is numerically rank deficient")
    return Q


def projection_defect(u, basis) -> float:
    """||u - pi_V u|| with V spanned by the columns of basis."""
    Q = _orthonormal_basis(basis)
    u = np.asarray(u, dtype=float)
    return float(np.linalg.norm(u - Q @ (Q.T @ u)))


@dataclass
class ProofRoute:
    """Quantities along the constructive argument u ~ pi_W u = B w = B A pi_U v ~ B A v."""

    min_projected_norm_sq: float
    max_projected_overlap: float
    E_norm: float
    A_minus_I: float
    route_agreement: float  # max ||B w - pi_W u|| over the window eigenvectors
    route_defects: np.ndarray  # ||u_i - (B A v)_i||
    intermediate_bounds: np.ndarray  # ||u_i - pi_W u_i|| + ||B_i|| ||A||_op ||pi_U v - v||


@dataclass
class MatchReport:
    n: int
    m: int
    c: float
    eps: float
    delta: float
    hypotheses_hold: bool
    violations: list
    defects: np.ndarray  # ||u_j - pi_V u_j|| for the m window eigenvectors
    bound: float
    count: int
    target: int
    conclusion_holds: bool
    norm: str = "Hilbert-Schmidt"
    proof: ProofRoute | None = field(default=None, repr=False)


def match_eigenvectors(system: FiniteSpectralSystem, batch: QuasimodeBatch, c: float,
                       eps: float, delta: float) -> MatchReport:
    n = batch.n
    lam = system.eigenvalues
    in_window = np.zeros(lam.size, dtype=bool)
    for e in batch.quasi_eigenvalues:
        in_window |= np.abs(lam - e) <= c
    m = int(in_window.sum())

    violations = []
    if not (0 < eps < 0.5 and 0 < delta < 0.5):
        violations.append("0 < eps, delta < 1/2")
    if not m < n * (1 + eps):
        violations.append(f"m < n(1+eps): m={m}, n(1+eps)={n * (1 + eps):.6g}")
    lhs = batch.eps1 ** 2 / c ** 2 + batch.eps2
    if not lhs < delta / n:
        violations.append(f"eps1^2/c^2 + eps2 < delta/n: {lhs:.3e} >= {delta / n:.3e}")
    res = batch.residuals(system)
    if not np.all(res < batch.eps1):
        violations.append(f"measured residual {res.max():.3e} exceeds eps1 {batch.eps1:.3e}")
    ov = batch.max_overlap()
    if not ov < batch.eps2:
        violations.append(f"measured overlap {ov:.3e} exceeds eps2 {batch.eps2:.3e}")

    U = system.eigenvectors[:, in_window]
    V = batch.vectors
    QV = _orthonormal_basis(V)
    defects = np.linalg.norm(U - QV @ (QV.T @ U), axis=0)
    bound = eps ** 0.25 + 2 * delta ** 1.5
    count = int(np.sum(defects < bound))
    target = math.ceil(n * (1 - math.sqrt(eps)))

    proof = None
    PU = U @ (U.T @ V)  # pi_U v_i as columns
    Mg = PU.T @ PU
    try:
        A = inv_sqrt_near_identity(Mg)
    except PreconditionError:
        A = None
    if A is not None:
        Wb = PU @ A  # w = A pi_U v; A symmetric
        B = U.T @ Wb  # B_ij = <u_i, w_j>
        QW = _orthonormal_basis(PU)
        direct = QW @ (QW.T @ U)
        agreement = float(np.max(np.linalg.norm(Wb @ B.T - direct, axis=0)))
        BAv = V @ (A @ B.T)
        route = np.linalg.norm(U - BAv, axis=0)
        tail = math.sqrt(float(np.sum((PU - V) ** 2)))
        bounds = (np.linalg.norm(U - direct, axis=0)
                  + np.linalg.norm(B, axis=1) * np.linalg.norm(A, 2) * tail)
        off = Mg - np.diag(np.diag(Mg))
        proof = ProofRoute(
            min_projected_norm_sq=float(np.min(np.diag(Mg))),
            max_projected_overlap=float(np.max(np.abs(off))) if n > 1 else 0.0,
            E_norm=float(np.linalg.norm(Mg - np.eye(n))),
            A_minus_I=float(np.linalg.norm(A - np.eye(n))),
            route_agreement=agreement,
            route_defects=route,
            intermediate_bounds=bounds,
        )
    return MatchReport(n, m, c, eps, delta, not violations, violations, defects, bound,
                       count, target, count >= target, proof=proof)


def synthetic_instance(seed: int, dim: int = 200, n: int = 50, perturbation: float = 1e-6,
                       n_extra: int | None = None, c: float = 1e-2):
    """Random diagonalisable system with perturbed eigenvectors as quasimodes.

    Eigenvalue gaps are at least 0.03 > 2c, so each window holds exactly its own
    eigenvalue except for n_extra intruders placed within c/2 of a quasi-eigenvalue.
    """
    rng = np.random.default_rng(seed)
    gaps = 0.03 + rng.exponential(0.07, dim)
    lam = np.cumsum(gaps)
    idx = np.sort(rng.choice(dim, size=n, replace=False))
    if n_extra is None:
        n_extra = int(rng.integers(0, 2))
    rest = np.setdiff1d(np.arange(dim), idx)
    movers = rng.choice(rest, size=n_extra, replace=False)
    hosts = rng.choice(idx, size=n_extra, replace=False)
    lam[movers] = lam[hosts] + rng.uniform(-c / 2, c / 2, n_extra)
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    Q = Q * np.sign(np.diag(R))
    order = np.argsort(lam, kind="stable")
    system = FiniteSpectralSystem(lam[order], Q[:, order])
    where = order.argsort()  # original index -> sorted position
    U = system.eigenvectors[:, where[idx]]
    G = rng.standard_normal((dim, n))
    G /= np.linalg.norm(G, axis=0)
    V = U + perturbation * G
    V /= np.linalg.norm(V, axis=0)
    E = np.einsum("ij,ij->j", V, system.apply(V))  # Rayleigh quotients
    res = np.linalg.norm(system.apply(V) - V * E, axis=0)
    Gm = V.T @ V
    np.fill_diagonal(Gm, 0.0)
    batch = QuasimodeBatch(V, E, eps1=float(res.max()) * 1.01, eps2=float(np.abs(Gm).max()) * 1.01 + 1e-300)
    return system, batch
