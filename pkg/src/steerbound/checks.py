"""Cross-checks of the main bound path against the brute-force oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SUPPORTED_N, WernerParams, build_measurement_set, conditioned_bob_state
from .loss_bounds import CRITERIA, deterministic_points
from .oracle import (
    conditioned_bloch,
    exhaustive_bound,
    fibonacci_grid,
    grid_max_deterministic,
    grid_max_linear,
    grid_max_variance,
    operator_norm_check,
    werner_conditionals,
)

EXACT_TOL = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    expected: float
    observed: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<40s} expected={self.expected:.12g} observed={self.observed:.12g} tol={self.tolerance:.3g}"


def _close(name: str, expected: float, observed: float, tol: float) -> Check:
    return Check(name, expected, observed, tol, abs(expected - observed) <= tol)


def _below(name: str, bound: float, observed: float, tol: float) -> Check:
    # grid maxima can only undershoot the exact maximum
    ok = observed <= bound + EXACT_TOL and bound - observed <= tol
    return Check(name, bound, observed, tol, ok)


def verify(grid_points: int = 10**6) -> list[Check]:
    """Run every oracle comparison and return one :class:`Check` per comparison."""
    grid = fibonacci_grid(grid_points)
    grid_tol = 2.0 * grid.pitch**2
    checks: list[Check] = []
    for n in SUPPORTED_N:
        ms = build_measurement_set(n)
        for criterion in CRITERIA:
            for p in deterministic_points(ms, criterion):
                tag = f"n={n} {criterion} m={p.m}"
                checks.append(_close(f"exhaustive {tag}", p.value, exhaustive_bound(ms.axes, criterion, p.m), EXACT_TOL))
                checks.append(_below(f"grid {tag}", p.value, grid_max_deterministic(ms.axes, criterion, p.m, grid), grid_tol))
        full = deterministic_points(ms, "linear")[-1]
        plan = full.plans[0].as_array()
        value, arg = grid_max_linear(ms.axes, plan, grid)
        checks.append(_below(f"grid plan n={n} linear m={n}", full.value, value, grid_tol))
        target = plan @ ms.axes
        target = target / np.linalg.norm(target)
        angle = 2.0 * math.asin(min(1.0, float(np.linalg.norm(arg - target)) / 2.0))
        checks.append(Check(f"argmax angle n={n}", 0.0, angle, 2.0 * grid.pitch, angle <= 2.0 * grid.pitch))
        op, vec = operator_norm_check(ms.axes, plan)
        checks.append(_close(f"operator norm n={n}", vec, op, EXACT_TOL))
        vfull = deterministic_points(ms, "variance")[-1]
        value, _ = grid_max_variance(ms.axes, vfull.plans[0].as_array(), grid)
        checks.append(_below(f"grid plan n={n} variance m={n}", vfull.value, value, grid_tol))
    for mu in (0.0, 0.6, 0.9, 1.0):
        cond = werner_conditionals(mu)
        checks.append(_close(f"werner P(B=-A) mu={mu}", (1.0 + mu) / 2.0, cond["anti"], EXACT_TOL))
        axis = (0.0, 0.6, 0.8)
        for outcome in (1, -1):
            expected = conditioned_bob_state(WernerParams(mu), axis, outcome).as_array()
            got = conditioned_bloch(mu, axis, outcome)
            err = float(np.max(np.abs(expected - got)))
            checks.append(Check(f"bob state mu={mu} A={outcome:+d}", 0.0, err, EXACT_TOL, err <= EXACT_TOL))
    return checks
