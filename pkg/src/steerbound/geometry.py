"""Platonic-solid measurement sets and Bloch-vector primitives.

Bob's measurement axes are taken from antipodal vertex pairs of the square
(n=2), octahedron (3), cube (4), icosahedron (6) and dodecahedron (10).  One
vertex of each antipodal pair is kept, chosen by the hemisphere rule in
:func:`hemisphere_representatives`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

PHI = (1.0 + 5.0 ** 0.5) / 2.0

SUPPORTED_N = (2, 3, 4, 6, 10)

SOLID_NAMES = {
    2: "square",
    3: "octahedron",
    4: "cube",
    6: "icosahedron",
    10: "dodecahedron",
}

UNIT_TOL = 1e-12
PARALLEL_TOL = 1e-9
DESIGN_TOL = 1e-9

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, v) -> "BlochVector":
        v = np.asarray(v, dtype=float)
        if v.shape != (3,):
            raise GeometryError(f"Bloch vector needs 3 components, got shape {v.shape}")
        if np.linalg.norm(v) > 1.0 + UNIT_TOL:
            raise GeometryError(f"Bloch vector norm {np.linalg.norm(v)!r} exceeds 1")
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def pure(cls, v) -> "BlochVector":
        """Pure state pointing along ``v`` (normalised)."""
        v = np.asarray(v, dtype=float)
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise GeometryError("cannot normalise the zero vector")
        return cls.from_array(v / nrm)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def is_pure(self, tol: float = UNIT_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol


@dataclass(frozen=True)
class WernerParams:
    """Werner-state purity ``mu`` and Alice's detector efficiency ``epsilon``."""

    mu: float
    epsilon: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise GeometryError(f"mu must lie in [0, 1], got {self.mu!r}")
        if not 0.0 < self.epsilon <= 1.0:
            raise GeometryError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")


@dataclass(frozen=True)
class MeasurementSet:
    n: int
    axes: np.ndarray = field(repr=False)
    solid_name: str
    # every vertex of the solid (both hemispheres); used for classification
    vertices: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        axes = np.array(self.axes, dtype=float)
        axes.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        verts = np.array(self.vertices, dtype=float)
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        validate_axes(axes)

    def bloch_axes(self) -> list[BlochVector]:
        return [BlochVector.from_array(a) for a in self.axes]

    def outer_sum(self) -> np.ndarray:
        return self.axes.T @ self.axes

    def rotated(self, rotation: np.ndarray) -> "MeasurementSet":
        """Copy with every axis (and vertex) rotated by the 3x3 matrix ``rotation``."""
        rotation = np.asarray(rotation, dtype=float)
        return MeasurementSet(
            n=self.n,
            axes=self.axes @ rotation.T,
            solid_name=self.solid_name,
            vertices=self.vertices @ rotation.T,
        )

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "solid": self.solid_name,
            "axes": [[float(c) for c in a] for a in self.axes],
        }
        return _dumps_17(payload)

    @classmethod
    def from_json(cls, text: str) -> "MeasurementSet":
        payload = json.loads(text)
        n = int(payload["n"])
        axes = np.array(payload["axes"], dtype=float)
        verts = np.vstack([axes, -axes])
        ms = cls(n=n, axes=axes, solid_name=payload["solid"], vertices=verts)
        check_design(ms)
        return ms


def _dumps_17(payload) -> str:
    # 17 significant digits round-trip every IEEE double exactly
    def fmt(obj):
        if isinstance(obj, float):
            return format(obj, ".17g")
        if isinstance(obj, dict):
            return "{" + ", ".join(f"{json.dumps(k)}: {fmt(v)}" for k, v in obj.items()) + "}"
        if isinstance(obj, (list, tuple)):
            return "[" + ", ".join(fmt(v) for v in obj) + "]"
        return json.dumps(obj)

    return fmt(payload)


def validate_axes(axes: np.ndarray) -> None:
    """Raise :class:`GeometryError` unless ``axes`` are unit and pairwise non-parallel."""
    axes = np.asarray(axes, dtype=float)
    if axes.ndim != 2 or axes.shape[1] != 3 or axes.shape[0] < 1:
        raise GeometryError(f"axes must have shape (n, 3), got {axes.shape}")
    norms = np.linalg.norm(axes, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise GeometryError(f"axes must be unit vectors, norms={norms}")
    gram = np.abs(axes @ axes.T)
    np.fill_diagonal(gram, 0.0)
    if np.any(gram >= 1.0 - PARALLEL_TOL):
        raise GeometryError("two axes are parallel or antiparallel")


def check_design(ms: MeasurementSet) -> None:
    """Check the spherical 2-design identity (planar identity for the square)."""
    outer = ms.outer_sum()
    if ms.n == 2:
        normal = np.cross(ms.axes[0], ms.axes[1])
        normal /= np.linalg.norm(normal)
        target = np.eye(3) - np.outer(normal, normal)
    else:
        target = (ms.n / 3.0) * np.eye(3)
    err = np.max(np.abs(outer - target))
    if err > DESIGN_TOL:
        raise GeometryError(f"{ms.solid_name} axes violate the 2-design identity (err={err:.3g})")


def hemisphere_representatives(vertices: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Keep one vertex per antipodal pair: positive z, then positive y, then positive x."""
    keep = []
    for v in np.asarray(vertices, dtype=float):
        for c in (v[2], v[1], v[0]):
            if c > tol:
                keep.append(v)
                break
            if c < -tol:
                break
    return np.array(keep)


def _cyclic(vs):
    out = []
    for v in vs:
        x, y, z = v
        out.extend([(x, y, z), (z, x, y), (y, z, x)])
    return out


def solid_vertices(n: int) -> np.ndarray:
    """Unit-norm vertices (both hemispheres) of the solid used for ``n`` axes."""
    if n == 2:
        verts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    elif n == 3:
        verts = [tuple(s * e) for e in np.eye(3) for s in (1, -1)]
    elif n == 4:
        verts = list(product((1, -1), repeat=3))
    elif n == 6:
        verts = _cyclic([(0, s1, s2 * PHI) for s1 in (1, -1) for s2 in (1, -1)])
    elif n == 10:
        verts = list(product((1, -1), repeat=3))
        verts += _cyclic([(0, s1 / PHI, s2 * PHI) for s1 in (1, -1) for s2 in (1, -1)])
    else:
        raise GeometryError(f"unsupported n={n!r}; supported values are {SUPPORTED_N}")
    verts = np.array(verts, dtype=float)
    return verts / np.linalg.norm(verts, axis=1, keepdims=True)


def build_measurement_set(n: int) -> MeasurementSet:
    """Canonical measurement set with ``n`` axes, ``n`` in {2, 3, 4, 6, 10}.

    >>> build_measurement_set(3).axes
    array([[1., 0., 0.],
           [0., 1., 0.],
           [0., 0., 1.]])
    """
    if n not in SUPPORTED_N:
        raise GeometryError(f"unsupported n={n!r}; supported values are {SUPPORTED_N}")
    verts = solid_vertices(n)
    axes = hemisphere_representatives(verts)
    ms = MeasurementSet(n=n, axes=axes, solid_name=SOLID_NAMES[n], vertices=verts)
    check_design(ms)
    return ms


def expectation(axis, state) -> float:
    """Bob's mean outcome ``b . r`` for a measurement along ``axis`` on Bloch vector ``state``."""
    b = _arr(axis)
    r = _arr(state)
    return float(b @ r)


def conditioned_bob_state(params: WernerParams, alice_axis, alice_outcome: int) -> BlochVector:
    """Bob's Bloch vector after Alice measures the Werner state along ``alice_axis``.

    The singlet anticorrelates the two spins, so Bob is left with
    ``-outcome * mu * axis``.
    """
    if alice_outcome not in (1, -1):
        raise GeometryError(f"Alice's outcome must be +1 or -1, got {alice_outcome!r}")
    a = _arr(alice_axis)
    return BlochVector.from_array(-alice_outcome * params.mu * a)


def pauli_operator(vec) -> np.ndarray:
    """The 2x2 Hermitian operator ``vec . sigma``."""
    v = _arr(vec)
    return np.tensordot(v, PAULI, axes=1)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 3x3 rotation matrix (QR of a Gaussian matrix, det fixed to +1)."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _arr(v) -> np.ndarray:
    if isinstance(v, BlochVector):
        return v.as_array()
    return np.asarray(v, dtype=float)
