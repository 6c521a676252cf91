"""Truncated Fourier series on the torus R^n / Z^n.

f(x) = sum_k c_k exp(2 pi i <k, x>) with |k|_inf <= K.  Angle variables are
theta = 2 pi x, so e^{i<k,theta>} and the coefficient layout are the same.
Coefficients live in a dense array of shape (2K+1,)*n with c_k at k + K.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class TorusFourier:
    coeffs: np.ndarray
    decay: tuple | None = None  # (sigma, observed geometric rate)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if len(set(c.shape)) != 1 or c.shape[0] % 2 != 1:
            raise ValueError("coefficient array must be a cube of odd side 2K+1")
        object.__setattr__(self, "coeffs", c)
        if self.decay is not None:
            total = np.abs(c).sum()
            if total > 0 and self.tail_mass(self.K / 2) > 1e-12 * total:
                raise ValueError("decay metadata claimed but the tail beyond K/2 is not negligible")

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    @property
    def K(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, dim: int, K: int) -> "TorusFourier":
        return cls(np.zeros((2 * K + 1,) * dim, dtype=complex))

    @classmethod
    def from_modes(cls, modes: dict, dim: int, K: int) -> "TorusFourier":
        """Modes {k: c}; the conjugate partner c_{-k} = conj(c) is filled in."""
        a = np.zeros((2 * K + 1,) * dim, dtype=complex)
        for k, c in modes.items():
            k = (k,) if np.isscalar(k) else tuple(k)
            a[tuple(np.add(k, K))] += c
            if any(k):
                a[tuple(np.add(np.negative(k), K))] += np.conj(c)
            else:
                a[(K,) * dim] = complex(c).real
        return cls(a)

    @classmethod
    def from_grid(cls, values, K: int | None = None) -> "TorusFourier":
        """Coefficients from samples at x_j = j/N (N even); the Nyquist mode is dropped."""
        v = np.asarray(values)
        N = v.shape[0]
        dim = v.ndim
        if K is None:
            K = N // 2 - 1
        if 2 * K + 1 > N:
            raise ValueError("grid too small for requested K")
        F = np.fft.fftn(v) / N ** dim
        idx = np.arange(-K, K + 1) % N
        c = F[np.ix_(*([idx] * dim))]
        return cls(c)

    @classmethod
    def from_function(cls, f, dim: int, K: int, N: int | None = None) -> "TorusFourier":
        if N is None:
            N = int(2 ** np.ceil(np.log2(2 * K + 2)))
        x = np.arange(N) / N
        grids = np.meshgrid(*([x] * dim), indexing="ij")
        return cls.from_grid(f(*grids), K)

    # queries ------------------------------------------------------------

    def wavenumbers(self):
        k = np.arange(-self.K, self.K + 1)
        return np.meshgrid(*([k] * self.dim), indexing="ij")

    def l1(self) -> np.ndarray:
        return sum(np.abs(k) for k in self.wavenumbers())

    def mean(self) -> complex:
        return self.coeffs[(self.K,) * self.dim]

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        flipped = self.coeffs[(slice(None, None, -1),) * self.dim]
        return bool(np.max(np.abs(self.coeffs - np.conj(flipped)), initial=0.0)
                    <= tol * max(1.0, np.abs(self.coeffs).max(initial=0.0)))

    def majorant(self, sigma: float) -> float:
        """sum |c_k| e^{2 pi sigma |k|_1}: computable stand-in for the sup on the strip."""
        return float(np.sum(np.abs(self.coeffs) * np.exp(2 * np.pi * sigma * self.l1())))

    def tail_mass(self, radius: float) -> float:
        """sum of |c_k| over |k|_inf > radius."""
        kinf = np.max(np.abs(np.stack(self.wavenumbers())), axis=0)
        return float(np.sum(np.abs(self.coeffs[kinf > radius])))

    # evaluation ---------------------------------------------------------

    def to_grid(self, N: int) -> np.ndarray:
        if N < 2 * self.K + 1:
            raise ValueError("grid must resolve all stored modes")
        F = np.zeros((N,) * self.dim, dtype=complex)
        idx = np.arange(-self.K, self.K + 1) % N
        F[np.ix_(*([idx] * self.dim))] = self.coeffs
        return np.real(np.fft.ifftn(F) * N ** self.dim)

    def evaluate(self, x) -> np.ndarray:
        """Direct sum at arbitrary points; x has shape (..., dim), or any shape when dim == 1."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            k = np.arange(-self.K, self.K + 1)
            nz = np.abs(self.coeffs) > 0
            ph = np.exp(2j * np.pi * np.multiply.outer(x, k[nz]))
            return np.real(ph @ self.coeffs[nz])
        flat = x.reshape(-1, self.dim)
        ks = np.stack([k.ravel() for k in self.wavenumbers()], axis=1)
        c = self.coeffs.ravel()
        nz = np.abs(c) > 0
        ph = np.exp(2j * np.pi * flat @ ks[nz].T)
        return np.real(ph @ c[nz]).reshape(x.shape[:-1])

    # algebra ------------------------------------------------------------

    def derivative(self, axis: int = 0) -> "TorusFourier":
        """d/dx_axis in the 1-periodic variable."""
        k = self.wavenumbers()[axis]
        return TorusFourier(2j * np.pi * k * self.coeffs)

    def resized(self, K: int) -> "TorusFourier":
        out = np.zeros((2 * K + 1,) * self.dim, dtype=complex)
        m = min(K, self.K)
        src = (slice(self.K - m, self.K + m + 1),) * self.dim
        dst = (slice(K - m, K + m + 1),) * self.dim
        out[dst] = self.coeffs[src]
        return TorusFourier(out, self.decay)

    def with_decay(self, sigma: float, rate: float) -> "TorusFourier":
        return replace(self, decay=(sigma, rate))

    def __add__(self, other: "TorusFourier") -> "TorusFourier":
        K = max(self.K, other.K)
        return TorusFourier(self.resized(K).coeffs + other.resized(K).coeffs)

    def __sub__(self, other: "TorusFourier") -> "TorusFourier":
        return self + other.scaled(-1.0)

    def scaled(self, a) -> "TorusFourier":
        return TorusFourier(a * self.coeffs)

    def without_mean(self) -> "TorusFourier":
        c = self.coeffs.copy()
        c[(self.K,) * self.dim] = 0
        return TorusFourier(c, self.decay)

    def nonzero_modes(self):
        for k in itertools.product(range(-self.K, self.K + 1), repeat=self.dim):
            c = self.coeffs[tuple(np.add(k, self.K))]
            if c != 0:
                yield k, c
