"""Brute-force cross-checks for the analytic bound computations.

Nothing here imports the bound or eigenvalue helpers from the main path.
Values are recomputed by naive loops, dense sphere grids and explicit
two-qubit density matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

_I2 = np.eye(2, dtype=complex)
_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class SphereGrid:
    points: np.ndarray

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def pitch(self) -> float:
        """Nominal angular spacing, ``pi / sqrt(count)``."""
        return math.pi / math.sqrt(self.count)


def fibonacci_grid(count: int = 10**6) -> SphereGrid:
    """Quasi-uniform Fibonacci lattice of ``count`` unit vectors."""
    i = np.arange(count, dtype=float) + 0.5
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(1.0 - z * z)
    theta = 2.0 * math.pi * i / ((1.0 + math.sqrt(5.0)) / 2.0)
    return SphereGrid(np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z]))


def _chunks(grid: SphereGrid, size: int = 1 << 17):
    for start in range(0, grid.count, size):
        yield start, grid.points[start:start + size]


def grid_max_linear(axes: np.ndarray, plan, grid: SphereGrid) -> tuple[float, np.ndarray]:
    """Max over grid states of ``(1/n) sum_j A_j (b_j . r)`` and the maximising ``r``."""
    axes = np.asarray(axes, dtype=float)
    a = np.asarray(plan, dtype=float)
    n = len(axes)
    best, arg = -np.inf, None
    for start, pts in _chunks(grid):
        vals = (pts @ axes.T) @ a / n
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), pts[i]
    return best, arg


def grid_max_variance(axes: np.ndarray, plan, grid: SphereGrid) -> tuple[float, np.ndarray]:
    """Max over grid states of ``(1/n) sum_{A_j != 0} (b_j . r)**2`` and the maximiser."""
    axes = np.asarray(axes, dtype=float)
    keep = np.asarray(plan) != 0
    n = len(axes)
    best, arg = -np.inf, None
    for start, pts in _chunks(grid):
        vals = ((pts @ axes[keep].T) ** 2).sum(axis=1) / n
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), pts[i]
    return best, arg


def grid_max_deterministic(axes: np.ndarray, criterion: str, m: int, grid: SphereGrid) -> float:
    """Plan-free deterministic bound: for each grid state keep the ``m`` best settings.

    For a fixed state ``r`` the best linear plan answers the ``m`` settings with
    the largest ``|b_j . r|`` with matching signs; the best variance plan keeps
    the ``m`` largest ``(b_j . r)**2``.
    """
    axes = np.asarray(axes, dtype=float)
    n = len(axes)
    best = -np.inf
    for _, pts in _chunks(grid):
        proj = pts @ axes.T
        score = np.abs(proj) if criterion == "linear" else proj ** 2
        top = -np.partition(-score, m - 1, axis=1)[:, :m]
        best = max(best, float(top.sum(axis=1).max()) / n)
    return best


def exhaustive_bound(axes, criterion: str, m: int) -> float:
    """Deterministic bound by plain enumeration of subsets and sign patterns."""
    axes = [tuple(float(c) for c in b) for b in np.asarray(axes, dtype=float)]
    n = len(axes)
    best = 0.0
    for subset in combinations(range(n), m):
        if criterion == "linear":
            for signs in product((1, -1), repeat=m):
                sx = sy = sz = 0.0
                for s, j in zip(signs, subset):
                    sx += s * axes[j][0]
                    sy += s * axes[j][1]
                    sz += s * axes[j][2]
                best = max(best, math.sqrt(sx * sx + sy * sy + sz * sz) / n)
        elif criterion == "variance":
            mat = [[0.0] * 3 for _ in range(3)]
            for j in subset:
                for r in range(3):
                    for c in range(3):
                        mat[r][c] += axes[j][r] * axes[j][c]
            best = max(best, float(np.linalg.eigvalsh(np.array(mat))[-1]) / n)
        else:
            raise ValueError(f"unknown criterion {criterion!r}")
    return best


def _projector(axis, outcome: int) -> np.ndarray:
    op = sum(c * s for c, s in zip(axis, _SIGMA))
    return (_I2 + outcome * op) / 2.0


def werner_state(mu: float) -> np.ndarray:
    """Two-qubit Werner state ``mu |singlet><singlet| + (1 - mu) I/4``."""
    singlet = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0)
    return mu * np.outer(singlet, singlet.conj()) + (1.0 - mu) * np.eye(4) / 4.0


def werner_joint(mu: float, axis=(0.0, 0.0, 1.0)) -> dict[tuple[int, int], float]:
    """Joint outcome probabilities ``P(A, B)`` when both parties measure along ``axis``."""
    rho = werner_state(mu)
    out = {}
    for a in (1, -1):
        for b in (1, -1):
            op = np.kron(_projector(axis, a), _projector(axis, b))
            out[(a, b)] = float(np.real(np.trace(rho @ op)))
    return out


def werner_conditionals(mu: float, axis=(0.0, 0.0, 1.0)) -> dict[str, float]:
    """``P(B = -A | A)`` ("anti") and ``P(B = A | A)`` ("same"), checked equal for both A."""
    joint = werner_joint(mu, axis)
    anti = []
    for a in (1, -1):
        pa = joint[(a, 1)] + joint[(a, -1)]
        anti.append(joint[(a, -a)] / pa)
    if abs(anti[0] - anti[1]) > 1e-12:
        raise AssertionError("Werner conditionals depend on Alice's outcome")
    return {"anti": anti[0], "same": 1.0 - anti[0]}


def conditioned_bloch(mu: float, axis, outcome: int) -> np.ndarray:
    """Bob's Bloch vector after Alice's projective outcome, via partial trace."""
    rho = werner_state(mu)
    op = np.kron(_projector(axis, outcome), _I2)
    post = op @ rho @ op
    post = post / np.trace(post)
    bob = post.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    return np.array([float(np.real(np.trace(bob @ s))) for s in _SIGMA])


def operator_norm_check(axes, plan) -> tuple[float, float]:
    """``lambda_max`` of ``(1/n) sum A_j b_j . sigma`` versus ``|sum A_j b_j| / n``."""
    axes = np.asarray(axes, dtype=float)
    a = np.asarray(plan, dtype=float)
    n = len(axes)
    vec = a @ axes
    op = sum(c * s for c, s in zip(vec, _SIGMA)) / n
    return float(np.linalg.eigvalsh(op)[-1]), float(np.linalg.norm(vec)) / n
