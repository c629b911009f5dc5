"""Catalogs of Alice's optimal deterministic cheating ensembles.

Linear-criterion ensembles are single Bloch orientations ``unit(sum A_j b_j)``;
``r`` and ``-r`` come from globally flipped plans and are counted separately.
Variance-criterion ensembles depend only on which settings are non-null and
are reported up to sign, as points, great circles (by their normal) or the
whole sphere.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import BlochVector, MeasurementSet
from .loss_bounds import (
    DeterministicBoundPoint,
    ResponsePlan,
    StateFamily,
    deterministic_linear,
    deterministic_variance,
)

ANGLE_TOL = 1e-6
CLASSIFICATIONS = ("vertex_centred", "edge_centred", "face_centred", "intermediate", "any_state")


@dataclass(frozen=True)
class OptimalEnsemble:
    kind: str
    orientation: BlochVector
    plan: ResponsePlan
    classification: str
    value: float

    def to_dict(self) -> dict:
        return {
            "plan_bitmask": self.plan.bitmask,
            "plan": list(self.plan.values),
            "kind": self.kind,
            "orientation": [self.orientation.x, self.orientation.y, self.orientation.z],
            "classification": self.classification,
            "value": self.value,
        }


@dataclass(frozen=True)
class EnsembleCatalog:
    n: int
    criterion: str
    m: int
    ensembles: tuple[OptimalEnsemble, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.ensembles)

    def orientations(self) -> np.ndarray:
        return np.array([e.orientation.as_array() for e in self.ensembles])

    def classifications(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.ensembles:
            out[e.classification] = out.get(e.classification, 0) + 1
        return out

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "criterion": self.criterion,
            "m": self.m,
            "multiplicity": self.multiplicity,
            "ensembles": [e.to_dict() for e in self.ensembles],
        }
        return json.dumps(payload, indent=2)


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    # chord-based angle, accurate near zero unlike arccos of the dot product
    return 2.0 * float(np.arcsin(min(1.0, np.linalg.norm(u - v) / 2.0)))


def _near_any(r: np.ndarray, refs: np.ndarray, tol: float, antipodal: bool = True) -> bool:
    for ref in refs:
        if _angle(r, ref) < tol or (antipodal and _angle(r, -ref) < tol):
            return True
    return False


def edge_midpoints(ms: MeasurementSet) -> np.ndarray:
    """Directions of the edge midpoints (edges = closest vertex pairs)."""
    verts = ms.vertices
    dist = np.linalg.norm(verts[:, None, :] - verts[None, :, :], axis=2)
    np.fill_diagonal(dist, np.inf)
    shortest = dist.min()
    mids = []
    for i, k in combinations(range(len(verts)), 2):
        if dist[i, k] <= shortest + 1e-9:
            mid = verts[i] + verts[k]
            mids.append(mid / np.linalg.norm(mid))
    return np.array(mids)


def face_centres(ms: MeasurementSet) -> np.ndarray:
    """Directions of the face centroids (outward normals of supporting planes).

    Planar sets (the square) have no faces off the origin and return an
    empty array.
    """
    verts = ms.vertices
    normals: list[np.ndarray] = []
    for i, j, k in combinations(range(len(verts)), 3):
        u = np.cross(verts[j] - verts[i], verts[k] - verts[i])
        nrm = np.linalg.norm(u)
        if nrm < 1e-12:
            continue
        u = u / nrm
        offset = u @ verts[i]
        if abs(offset) < 1e-9:
            continue
        if offset < 0:
            u, offset = -u, -offset
        if np.all(verts @ u <= offset + 1e-9) and not _near_any(u, np.array(normals), 1e-9, antipodal=False):
            normals.append(u)
    return np.array(normals).reshape(-1, 3)


_REFERENCE_CACHE: dict = {}


def _references(ms: MeasurementSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    key = ms.vertices.tobytes()
    if key not in _REFERENCE_CACHE:
        _REFERENCE_CACHE[key] = (ms.vertices, face_centres(ms), edge_midpoints(ms))
    return _REFERENCE_CACHE[key]


def _near_set(r: np.ndarray, refs: np.ndarray, tol: float) -> bool:
    if len(refs) == 0:
        return False
    chords = np.minimum(np.linalg.norm(refs - r, axis=1), np.linalg.norm(refs + r, axis=1))
    return bool(np.any(2.0 * np.arcsin(np.minimum(1.0, chords / 2.0)) < tol))


def classify_orientation(ms: MeasurementSet, r, tol: float = ANGLE_TOL) -> str:
    """Position of ``r`` relative to the solid: vertex, face or edge centred, else intermediate."""
    r = r.as_array() if isinstance(r, BlochVector) else np.asarray(r, dtype=float)
    r = r / np.linalg.norm(r)
    verts, faces, edges = _references(ms)
    if _near_set(r, verts, tol):
        return "vertex_centred"
    if _near_set(r, faces, tol):
        return "face_centred"
    if _near_set(r, edges, tol):
        return "edge_centred"
    return "intermediate"


def optimal_linear_ensembles(ms: MeasurementSet, m: int, point: DeterministicBoundPoint | None = None) -> EnsembleCatalog:
    """Every orientation attaining the deterministic linear bound at ``m`` non-null settings."""
    if point is None:
        point = deterministic_linear(ms, m)
    found: list[OptimalEnsemble] = []
    seen: list[np.ndarray] = []
    for plan in point.plans:
        for p in (plan, plan.flipped()):
            total = p.as_array() @ ms.axes
            value = float(np.linalg.norm(total)) / ms.n
            r = total / np.linalg.norm(total)
            if any(_angle(r, s) < ANGLE_TOL for s in seen):
                continue
            seen.append(r)
            found.append(
                OptimalEnsemble("point", BlochVector.from_array(r), p, classify_orientation(ms, r), value)
            )
    return EnsembleCatalog(ms.n, "linear", point.m, tuple(found))


def optimal_variance_ensembles(ms: MeasurementSet, m: int, point: DeterministicBoundPoint | None = None) -> EnsembleCatalog:
    """Optimal inference-variance ensembles: points, great circles, or any state."""
    if point is None:
        point = deterministic_variance(ms, m)
    found: list[OptimalEnsemble] = []
    seen: list[tuple[str, np.ndarray]] = []
    for plan, fam in zip(point.plans, point.optimal_states):
        r = fam.as_array()
        if any(kind == fam.kind and (_angle(r, s) < ANGLE_TOL or _angle(r, -s) < ANGLE_TOL) for kind, s in seen):
            continue
        seen.append((fam.kind, r))
        support = list(plan.support)
        mat = ms.axes[support].T @ ms.axes[support]
        value = float(np.linalg.eigvalsh(mat)[-1]) / ms.n
        label = "any_state" if fam.kind == "sphere" else classify_orientation(ms, r)
        found.append(OptimalEnsemble(fam.kind, BlochVector.from_array(r), plan, label, value))
    return EnsembleCatalog(ms.n, "variance", point.m, tuple(found))


def optimal_ensembles(ms: MeasurementSet, criterion: str, m: int) -> EnsembleCatalog:
    if criterion == "linear":
        return optimal_linear_ensembles(ms, m)
    if criterion == "variance":
        return optimal_variance_ensembles(ms, m)
    raise ValueError(f"criterion must be 'linear' or 'variance', got {criterion!r}")


def same_orientation_set(a: np.ndarray, b: np.ndarray, tol: float = ANGLE_TOL, antipodal: bool = False) -> bool:
    """True if every direction in ``a`` has a partner in ``b`` and vice versa."""
    if len(a) != len(b):
        return False
    return all(_near_any(u, b, tol, antipodal) for u in a) and all(_near_any(v, a, tol, antipodal) for v in b)


def symmetry_rotations(ms: MeasurementSet, tol: float = 1e-9) -> list[np.ndarray]:
    """Proper rotations mapping the solid's vertex set onto itself."""
    verts = ms.vertices
    v0 = verts[0]
    # a second vertex not collinear with v0, nearest first
    order = np.argsort(-(verts @ v0))
    v1 = next(verts[i] for i in order if np.linalg.norm(np.cross(v0, verts[i])) > 1e-6)
    src = np.column_stack([v0, v1, np.cross(v0, v1)])
    rots = []
    for w0 in verts:
        for w1 in verts:
            if abs(w0 @ w1 - v0 @ v1) > tol:
                continue
            dst = np.column_stack([w0, w1, np.cross(w0, w1)])
            rot = dst @ np.linalg.inv(src)
            if abs(np.linalg.det(rot) - 1.0) > 1e-6 or np.max(np.abs(rot @ rot.T - np.eye(3))) > 1e-6:
                continue
            mapped = verts @ rot.T
            if same_orientation_set(mapped, verts, 1e-6):
                rots.append(rot)
    return rots


def family_for_plan(ms: MeasurementSet, plan: ResponsePlan, criterion: str) -> tuple[StateFamily, float]:
    """Optimal state family and achieved (non-post-selected) value for one plan."""
    if criterion == "linear":
        total = plan.as_array() @ ms.axes
        nrm = float(np.linalg.norm(total))
        if nrm == 0.0:
            return StateFamily("sphere", (0.0, 0.0, 1.0)), 0.0
        return StateFamily("point", tuple(total / nrm)), nrm / ms.n
    support = list(plan.support)
    mat = ms.axes[support].T @ ms.axes[support]
    w, v = np.linalg.eigh(mat)
    top = w >= w[-1] - 1e-9
    if top.sum() == 1:
        fam = StateFamily("point", tuple(v[:, -1]))
    elif top.sum() == 2:
        fam = StateFamily("circle", tuple(v[:, ~top][:, 0]))
    else:
        fam = StateFamily("sphere", (0.0, 0.0, 1.0))
    return fam, float(w[-1]) / ms.n
