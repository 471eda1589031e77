"""Symmetric tridiagonal eigenvalues by Sturm-count bisection.

Dependency-free and robust: the number of eigenvalues below sigma equals
the number of negative pivots in the LDL^T factorization of (T - sigma I),
which the classic three-term pivot recurrence delivers in O(n) per probe.
Each eigenvalue is then bisected independently inside Gershgorin bounds.
"""

from __future__ import annotations

import numpy as np

from .params import ParameterError

_TINY = 1e-300


def _count_below(diag: np.ndarray, off2: np.ndarray, sigma: float) -> int:
    count = 0
    q = 1.0
    n = diag.shape[0]
    for i in range(n):
        if i == 0:
            q = diag[0] - sigma
        else:
            q = diag[i] - sigma - off2[i - 1] / q
        if q == 0.0:
            q = -_TINY
        if q < 0.0:
            count += 1
    return count


def tridiag_eigenvalues(diag, off, rel_tol: float = 1e-12) -> np.ndarray:
    """Ascending eigenvalues of the symmetric tridiagonal (diag, off).

    rel_tol multiplies the spectral-radius estimate from the Gershgorin
    bounds to give the bisection stopping width.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = diag.shape[0]
    if n == 0:
        return np.empty(0)
    if off.shape[0] != max(0, n - 1):
        raise ParameterError("off-diagonal must have length n-1")
    if n == 1:
        return diag.copy()
    off2 = off * off

    radius = np.zeros(n)
    radius[0] = abs(off[0])
    radius[-1] = abs(off[-1])
    if n > 2:
        radius[1:-1] = np.abs(off[:-1]) + np.abs(off[1:])
    lo_all = float(np.min(diag - radius))
    hi_all = float(np.max(diag + radius))
    scale = max(abs(lo_all), abs(hi_all), 1e-30)
    tol = rel_tol * scale

    eig = np.empty(n)
    for k in range(n):
        lo, hi = lo_all, hi_all
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _count_below(diag, off2, mid) <= k:
                lo = mid
            else:
                hi = mid
        eig[k] = 0.5 * (lo + hi)
    return eig
