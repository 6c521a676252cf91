"""C-infinity step built from exp(-1/x)."""

import numpy as np


def smoothstep(s):
    """exp(-1/x) mollifier step on [0,1] and its first two derivatives."""
    s = np.asarray(s, dtype=float)
    S = np.where(s >= 1, 1.0, 0.0)
    d1 = np.zeros_like(s)
    d2 = np.zeros_like(s)
    mid = (s > 1e-6) & (s < 1 - 1e-6)
    if mid.any():
        u = s[mid]
        phi = 1 / u - 1 / (1 - u)
        with np.errstate(over="ignore"):
            Sm = 1 / (1 + np.exp(phi))
            q = 1 / (2 + 2 * np.cosh(phi))  # S(1-S)
        psi = 1 / u ** 2 + 1 / (1 - u) ** 2
        dpsi = -2 / u ** 3 + 2 / (1 - u) ** 3
        D1 = q * psi
        S[mid] = Sm
        d1[mid] = D1
        d2[mid] = D1 * (1 - 2 * Sm) * psi + q * dpsi
    S = np.where((s > 0) & (s <= 1e-6), 0.0, S)
    S = np.where((s < 1) & (s >= 1 - 1e-6), 1.0, S)
    return S, d1, d2
