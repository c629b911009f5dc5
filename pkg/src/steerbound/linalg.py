"""Eigenvalues of real symmetric 3x3 matrices.

The trigonometric closed form loses accuracy when two eigenvalues nearly
coincide (``acos`` is ill-conditioned near +-1), which happens structurally
here: dropping one axis from a 2-design leaves a doubly degenerate top
eigenvalue.  Those cases fall back to LAPACK's symmetric QL/QR solver.
"""
from __future__ import annotations

import math

import numpy as np

# 1 - r**2 below this triggers the fallback; rounding in r then moves the
# eigenvalues by ~1e-16 / sqrt(DISC_TOL), i.e. ~1e-13 relative
DISC_TOL = 1e-6


def sym3_eigvals(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix, descending."""
    a = np.asarray(a, dtype=float)
    off = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = (a[0, 0] + a[1, 1] + a[2, 2]) / 3.0
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * off
    scale = max(1.0, abs(q))
    if p2 <= (1e-14 * scale) ** 2:
        return np.array([q, q, q])
    p = math.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    r = np.linalg.det(b) / 2.0
    if 1.0 - r * r < DISC_TOL:
        return np.linalg.eigvalsh(a)[::-1]
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.array([e1, e2, e3])


def sym3_lambda_max(a: np.ndarray) -> float:
    return float(sym3_eigvals(a)[0])


def top_eigenspace(a: np.ndarray, tol: float = 1e-9) -> tuple[float, np.ndarray, np.ndarray]:
    """Largest eigenvalue, an orthonormal basis of its eigenspace, and the complement.

    Eigenvalues within ``tol`` of the largest count as degenerate with it.
    Returns ``(lam, basis, complement)`` with ``basis`` of shape (3, d).
    """
    w, v = np.linalg.eigh(np.asarray(a, dtype=float))
    lam = w[-1]
    top = w >= lam - tol
    return float(lam), v[:, top], v[:, ~top]
