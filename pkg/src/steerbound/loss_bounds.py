"""Perfect-efficiency and loss-tolerant steering bounds.

A cheating Alice who declares non-null results on ``m`` of Bob's ``n``
settings is scored by a deterministic bound (``D`` for the linear
correlation criterion, ``F`` for the inference-variance criterion).  Mixing
deterministic strategies gives the nondeterministic envelope (``K`` / ``G``),
the upper concave hull of the deterministic points together with the origin.
Dividing the envelope by the apparent efficiency gives the post-selected
bound that is compared against post-selected data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .geometry import MeasurementSet, pauli_operator
from .linalg import sym3_lambda_max, top_eigenspace

CRITERIA = ("linear", "variance")
TIE_TOL = 1e-10
DEGEN_TOL = 1e-9
EXTREME_TOL = 1e-12
IMPOSSIBLE = math.inf

REGIMES = (
    "anger_linear",
    "anger_variance",
    "depression_linear",
    "depression_variance",
    "hope_linear",
    "hope_variance",
)


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class ResponsePlan:
    """Alice's declared result per setting: +1, -1, or 0 (null)."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if any(v not in (-1, 0, 1) for v in vals):
            raise BoundError(f"plan entries must be -1, 0 or +1: {vals}")
        if not any(vals):
            raise BoundError("a plan needs at least one non-null entry")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return sum(1 for v in self.values if v)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j, v in enumerate(self.values) if v)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def flipped(self) -> "ResponsePlan":
        return ResponsePlan(tuple(-v for v in self.values))

    @property
    def bitmask(self) -> int:
        """Two bits per entry, entry ``j`` at bits ``2j, 2j+1``: 01 = +1, 10 = -1, 00 = null."""
        mask = 0
        for j, v in enumerate(self.values):
            if v == 1:
                mask |= 0b01 << (2 * j)
            elif v == -1:
                mask |= 0b10 << (2 * j)
        return mask

    @classmethod
    def from_bitmask(cls, mask: int, n: int) -> "ResponsePlan":
        vals = []
        for j in range(n):
            bits = (mask >> (2 * j)) & 0b11
            if bits == 0b11:
                raise BoundError(f"invalid bit pair 11 at entry {j}")
            vals.append({0b00: 0, 0b01: 1, 0b10: -1}[bits])
        if mask >> (2 * n):
            raise BoundError(f"bitmask {mask} has bits beyond entry {n - 1}")
        return cls(tuple(vals))


@dataclass(frozen=True)
class StateFamily:
    """Optimal Bloch orientations for one plan.

    ``kind`` is ``point`` (orientation is the state), ``circle`` (orientation is
    the normal of a great circle of optimal states) or ``sphere`` (every pure
    state is optimal; orientation is unused and set to +z).
    """

    kind: str
    orientation: tuple[float, float, float]

    def as_array(self) -> np.ndarray:
        return np.array(self.orientation)


@dataclass(frozen=True)
class DeterministicBoundPoint:
    criterion: str
    n: int
    m: int
    value: float
    plans: tuple[ResponsePlan, ...]
    optimal_states: tuple[StateFamily, ...]

    @property
    def epsilon_m(self) -> Fraction:
        return Fraction(self.m, self.n)

    @property
    def epsilon(self) -> float:
        return self.m / self.n

    @property
    def post_selected(self) -> float:
        return self.value / self.epsilon


def _check_m(ms: MeasurementSet, m: int) -> None:
    if not 1 <= m <= ms.n:
        raise BoundError(f"m must lie in 1..{ms.n}, got {m!r}")


def _check_criterion(criterion: str) -> None:
    if criterion not in CRITERIA:
        raise BoundError(f"criterion must be one of {CRITERIA}, got {criterion!r}")


def sign_plans(n: int, m: int) -> np.ndarray:
    """All plans with ``m`` non-null entries, first non-null entry fixed to +1.

    Shape ``(C(n, m) * 2**(m-1), n)``; the global sign flip is implied.
    """
    signs = np.array([(1,) + s for s in product((1, -1), repeat=m - 1)], dtype=float)
    rows = []
    for subset in combinations(range(n), m):
        block = np.zeros((len(signs), n))
        block[:, subset] = signs
        rows.append(block)
    return np.vstack(rows)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _linear_max(ms: MeasurementSet, plans: np.ndarray) -> tuple[float, np.ndarray]:
    sums = plans @ ms.axes
    vals = np.sqrt(np.einsum("ij,ij->i", sums, sums)) / ms.n
    return float(vals.max()), vals


def linear_bound_perfect(ms: MeasurementSet) -> float:
    """``k_n``: largest ``|sum_j A_j b_j| / n`` over all full sign patterns."""
    best, _ = _linear_max(ms, sign_plans(ms.n, ms.n))
    return best


def variance_bound_perfect(ms: MeasurementSet) -> float:
    """``g_n = lambda_max(sum_j b_j b_j^T) / n``."""
    return sym3_lambda_max(ms.outer_sum()) / ms.n


def deterministic_linear(ms: MeasurementSet, m: int) -> DeterministicBoundPoint:
    """Best linear correlation reachable by declaring non-null results on ``m`` settings.

    Every plan within ``TIE_TOL`` of the maximum is kept, together with its
    unique optimal orientation ``unit(sum_j A_j b_j)``.  Only the
    representative with a leading +1 of each flip pair is stored.
    """
    _check_m(ms, m)
    plans = sign_plans(ms.n, m)
    best, vals = _linear_max(ms, plans)
    winners = np.flatnonzero(vals >= best - TIE_TOL)
    states = []
    kept = []
    for i in winners:
        plan = plans[i]
        kept.append(ResponsePlan(tuple(int(v) for v in plan)))
        states.append(StateFamily("point", tuple(_unit(plan @ ms.axes))))
    return DeterministicBoundPoint("linear", ms.n, m, best, tuple(kept), tuple(states))


def _family_for(matrix: np.ndarray) -> StateFamily:
    _, basis, complement = top_eigenspace(matrix, DEGEN_TOL)
    dim = basis.shape[1]
    if dim == 1:
        return StateFamily("point", tuple(_canonical_sign(basis[:, 0])))
    if dim == 2:
        return StateFamily("circle", tuple(_canonical_sign(complement[:, 0])))
    return StateFamily("sphere", (0.0, 0.0, 1.0))


def _canonical_sign(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # +v and -v describe the same W_n class; pick the one with positive z, y, x
    for c in (v[2], v[1], v[0]):
        if c > tol:
            return v
        if c < -tol:
            return -v
    return v


def deterministic_variance(ms: MeasurementSet, m: int) -> DeterministicBoundPoint:
    """Best inference-variance score with ``m`` non-null settings.

    ``F = max_S lambda_max(sum_{j in S} b_j b_j^T) / n`` over size-``m``
    subsets.  Achieving plans are stored with +1 on the subset (signs do not
    affect this criterion).  The optimal-state family records the dimension
    of the top eigenspace: 1 -> point, 2 -> great circle, 3 -> any state.
    """
    _check_m(ms, m)
    subsets = list(combinations(range(ms.n), m))
    mats = [ms.axes[list(s)].T @ ms.axes[list(s)] for s in subsets]
    vals = np.array([sym3_lambda_max(mat) for mat in mats]) / ms.n
    best = float(vals.max())
    plans = []
    states = []
    for i in np.flatnonzero(vals >= best - TIE_TOL):
        values = [0] * ms.n
        for j in subsets[i]:
            values[j] = 1
        plans.append(ResponsePlan(tuple(values)))
        states.append(_family_for(mats[i]))
    return DeterministicBoundPoint("variance", ms.n, m, best, tuple(plans), tuple(states))


def deterministic_points(ms: MeasurementSet, criterion: str) -> list[DeterministicBoundPoint]:
    _check_criterion(criterion)
    fn = deterministic_linear if criterion == "linear" else deterministic_variance
    return [fn(ms, m) for m in range(1, ms.n + 1)]


def operator_lambda_max(ms: MeasurementSet, plan: ResponsePlan) -> float:
    """Largest eigenvalue of the qubit operator ``(1/n) sum_j A_j b_j . sigma``."""
    op = pauli_operator(plan.as_array() @ ms.axes) / ms.n
    return float(np.linalg.eigvalsh(op)[-1])


@dataclass
class Envelope:
    """Upper concave envelope of deterministic points plus the origin.

    ``hull`` holds the envelope vertices as ``(epsilon, value, m)`` with
    ``m = 0`` for the origin.
    """

    points: list[DeterministicBoundPoint]
    hull: list[tuple[float, float, int]] = field(init=False)

    def __post_init__(self):
        if not self.points:
            raise BoundError("envelope needs at least one deterministic point")
        ms = sorted({p.m for p in self.points})
        n = self.points[0].n
        if ms != list(range(1, n + 1)):
            raise BoundError(f"envelope needs points for every m in 1..{n}, got {ms}")
        self.hull = upper_hull([(0.0, 0.0, 0)] + [(p.epsilon, p.value, p.m) for p in self.points])

    @property
    def n(self) -> int:
        return self.points[0].n

    def mixture(self, epsilon: float) -> list[tuple[int, float]]:
        """Deterministic strategies ``(m, weight)`` realising the envelope at ``epsilon``.

        At most two entries; ``m = 0`` stands for answering nothing and only
        appears below ``1/n``.
        """
        _check_epsilon(epsilon)
        xs = [h[0] for h in self.hull]
        i = int(np.searchsorted(xs, epsilon, side="left"))
        if i < len(xs) and abs(xs[i] - epsilon) <= 1e-15:
            return [(self.hull[i][2], 1.0)]
        x0, _, m0 = self.hull[i - 1]
        x1, _, m1 = self.hull[i]
        w1 = (epsilon - x0) / (x1 - x0)
        return [(m0, 1.0 - w1), (m1, w1)]

    def __call__(self, epsilon: float) -> float:
        """Envelope value (``K`` or ``G``) at ``epsilon``."""
        val = 0.0
        values = {h[2]: h[1] for h in self.hull}
        for m, w in self.mixture(epsilon):
            val += w * values[m]
        return val

    def post_selected(self, epsilon: float) -> float:
        return self(epsilon) / epsilon

    def slope(self, epsilon: float) -> float:
        """Slope of the envelope at ``epsilon``; the left slope at a vertex."""
        _check_epsilon(epsilon)
        xs = [h[0] for h in self.hull]
        i = min(max(int(np.searchsorted(xs, epsilon, side="left")), 1), len(xs) - 1)
        (x0, y0, _), (x1, y1, _) = self.hull[i - 1], self.hull[i]
        return (y1 - y0) / (x1 - x0)

    def status(self, point: DeterministicBoundPoint) -> str:
        """``extreme`` (strictly above every other mixture), ``dominated``, or ``degenerate``."""
        env = self(point.epsilon)
        if env - point.value > EXTREME_TOL:
            return "dominated"
        others = [(0.0, 0.0, 0)] + [(p.epsilon, p.value, p.m) for p in self.points if p.m != point.m]
        hull = upper_hull(others)
        xs = [h[0] for h in hull]
        if point.epsilon > xs[-1]:
            return "extreme"
        without = float(np.interp(point.epsilon, xs, [h[1] for h in hull]))
        return "extreme" if point.value - without > EXTREME_TOL else "degenerate"


def upper_hull(pts: Sequence[tuple[float, float, int]]) -> list[tuple[float, float, int]]:
    """Monotone-chain upper hull; collinear interior points are dropped."""
    hull: list[tuple[float, float, int]] = []
    for p in sorted(pts, key=lambda t: (t[0], -t[1])):
        if hull and p[0] == hull[-1][0]:
            continue
        while len(hull) >= 2:
            (x0, y0, _), (x1, y1, _) = hull[-2], hull[-1]
            cross = (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0)
            if cross >= 0.0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise BoundError(f"epsilon must lie in (0, 1], got {epsilon!r}")


def envelope(points: list[DeterministicBoundPoint], epsilon: float) -> float:
    """Nondeterministic bound (``K`` or ``G``) at ``epsilon``."""
    return Envelope(points)(epsilon)


_PROFILE_CACHE: dict = {}


def bound_profile(ms: MeasurementSet, criterion: str) -> Envelope:
    """Cached :class:`Envelope` for a measurement set and criterion."""
    _check_criterion(criterion)
    key = (criterion, ms.n, ms.axes.tobytes())
    if key not in _PROFILE_CACHE:
        _PROFILE_CACHE[key] = Envelope(deterministic_points(ms, criterion))
    return _PROFILE_CACHE[key]


def default_grid() -> list[float]:
    return [i / 100 for i in range(1, 101)]


def parse_grid(text: str) -> list[float]:
    """Parse ``start:stop:step`` (inclusive of ``stop``) into a list of efficiencies."""
    try:
        start, stop, step = (float(s) for s in text.split(":"))
    except ValueError as exc:
        raise BoundError(f"grid must look like start:stop:step, got {text!r}") from exc
    if step <= 0:
        raise BoundError("grid step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    grid = [round(start + i * step, 12) for i in range(count)]
    if not grid or any(not 0.0 < g <= 1.0 for g in grid):
        raise BoundError(f"grid values must lie in (0, 1]: {text!r}")
    return grid


@dataclass
class CurveRow:
    epsilon: float
    envelope: float
    post_selected: float
    violation_possible: bool

    @property
    def sqrt_post_selected(self) -> float:
        return math.sqrt(self.post_selected)


@dataclass
class BoundCurve:
    criterion: str
    n: int
    rows: list[CurveRow]
    deterministic_points: list[DeterministicBoundPoint]

    @property
    def grid(self) -> list[float]:
        return [r.epsilon for r in self.rows]

    def profile(self) -> Envelope:
        return Envelope(self.deterministic_points)

    def bound_at(self, epsilon: float) -> float:
        """Exact post-selected bound at any ``epsilon`` in (0, 1]."""
        return self.profile().post_selected(epsilon)

    def interpolate(self, epsilon: float) -> float:
        """Linear interpolation of the post-selected column on the grid."""
        return float(np.interp(epsilon, self.grid, [r.post_selected for r in self.rows]))

    def point_status(self) -> list[tuple[DeterministicBoundPoint, str]]:
        env = self.profile()
        return [(p, env.status(p)) for p in self.deterministic_points]


def post_selected_curve(ms: MeasurementSet, criterion: str, grid: Sequence[float] | None = None) -> BoundCurve:
    """Envelope and post-selected bound on a grid of apparent efficiencies.

    Efficiencies at or below ``1/n`` are flagged as never demonstrating
    steering: there Alice can answer only when Bob measures along her state.
    """
    if grid is None:
        grid = default_grid()
    grid = list(grid)
    if not grid:
        raise BoundError("grid is empty")
    env = bound_profile(ms, criterion)
    rows = []
    for eps in grid:
        _check_epsilon(eps)
        k = env(eps)
        ps = k / eps
        possible = eps > 1.0 / ms.n + 1e-12 and ps < 1.0 - 1e-12
        rows.append(CurveRow(float(eps), k, ps, possible))
    return BoundCurve(criterion, ms.n, rows, list(env.points))


def critical_purity(regime: str, ms: MeasurementSet, epsilon: float) -> float:
    """Smallest Werner purity an honest Alice needs to beat the bound in ``regime``.

    Returns :data:`IMPOSSIBLE` (``inf``) when that purity would have to reach 1
    or more, since violation requires ``mu`` strictly above the threshold.
    """
    if regime not in REGIMES:
        raise BoundError(f"regime must be one of {REGIMES}, got {regime!r}")
    _check_epsilon(epsilon)
    if regime == "anger_linear" or regime == "depression_linear":
        mu = linear_bound_perfect(ms) / epsilon
    elif regime == "anger_variance":
        mu = math.sqrt(variance_bound_perfect(ms)) / epsilon
    elif regime == "depression_variance":
        mu = math.sqrt(variance_bound_perfect(ms) / epsilon)
    elif regime == "hope_linear":
        mu = bound_profile(ms, "linear").post_selected(epsilon)
    else:
        mu = math.sqrt(bound_profile(ms, "variance").post_selected(epsilon))
    return IMPOSSIBLE if mu >= 1.0 - 1e-12 else mu


def failure_frontiers(ms: MeasurementSet) -> dict[str, float]:
    """Efficiency below which each regime can never demonstrate steering."""
    k = linear_bound_perfect(ms)
    g = variance_bound_perfect(ms)
    return {
        "anger_linear": k,
        "anger_variance": math.sqrt(g),
        "depression_linear": k,
        "depression_variance": g,
        "hope_linear": 1.0 / ms.n,
        "hope_variance": 1.0 / ms.n,
    }


@dataclass
class ComparisonRow:
    epsilon: float
    linear: float
    sqrt_variance: float

    @property
    def difference(self) -> float:
        return self.linear - self.sqrt_variance


def criterion_comparison(ms: MeasurementSet, grid: Sequence[float] | None = None) -> list[ComparisonRow]:
    """Post-selected ``k(eps)`` against ``sqrt(g(eps))`` on a grid.

    Cauchy-Schwarz gives ``k <= sqrt(g)`` pointwise, so a negative
    difference is the margin by which the variance test is stronger.
    """
    lin = post_selected_curve(ms, "linear", grid)
    var = post_selected_curve(ms, "variance", grid)
    return [
        ComparisonRow(a.epsilon, a.post_selected, b.sqrt_post_selected)
        for a, b in zip(lin.rows, var.rows)
    ]


def coincidence_points(ms: MeasurementSet, tol: float = 1e-12) -> list[int]:
    """Values of ``m`` where the deterministic post-selected bounds satisfy ``D/eps == sqrt(F/eps)``."""
    lin = deterministic_points(ms, "linear")
    var = deterministic_points(ms, "variance")
    out = []
    for a, b in zip(lin, var):
        if abs(a.post_selected - math.sqrt(b.post_selected)) <= tol:
            out.append(a.m)
    return out
