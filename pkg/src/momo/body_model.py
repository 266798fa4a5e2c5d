"""Per-part mass properties from closed triangle meshes.

Volumes, centroids and inertia tensors are accumulated as signed sums over
the tetrahedra spanned by each triangle and a reference point. For a
homogeneous quadratic integrand ``f`` the exact integral over a tetrahedron
``(0, V1, V2, V3)`` of signed volume ``v`` is
``v / 20 * (f(V1) + f(V2) + f(V3) + f(V1 + V2 + V3))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CyclicParents, DataError, DegenerateMesh, InvalidBodySpec, NonWatertightMesh

DEFAULT_GRAVITY_AXIS = (0.0, 0.0, -1.0)


@dataclass(eq=False)
class PartMesh:
    """Closed triangle mesh with outward-facing (counter-clockwise) winding."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)

    def translated(self, offset) -> "PartMesh":
        return PartMesh(self.vertices + np.asarray(offset, dtype=float), self.triangles.copy())

    def transformed(self, R) -> "PartMesh":
        return PartMesh(self.vertices @ np.asarray(R, dtype=float).T, self.triangles.copy())


@dataclass(frozen=True, eq=False)
class PartProperties:
    """Mass properties of one rigid part in the canonical pose.

    ``inertia`` is taken about ``centroid`` with world-aligned axes.
    ``joint`` is the pivot the part rotates about; it defaults to the
    centroid. ``points`` is an optional canonical point set (for example
    hull vertices) used by ground-contact metrics.
    """

    mass: float
    centroid: np.ndarray
    inertia: np.ndarray
    volume: float | None = None
    joint: np.ndarray | None = None
    name: str = ""
    points: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.centroid, dtype=float).reshape(3)
        inertia = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "centroid", c)
        object.__setattr__(self, "inertia", inertia)
        j = c.copy() if self.joint is None else np.asarray(self.joint, dtype=float).reshape(3)
        object.__setattr__(self, "joint", j)
        if self.points is not None:
            object.__setattr__(self, "points", np.asarray(self.points, dtype=float).reshape(-1, 3))
        if not self.mass > 0 or not math.isfinite(self.mass):
            raise InvalidBodySpec(f"part {self.name!r}: mass must be positive, got {self.mass}")
        if self.volume is not None and not self.volume > 0:
            raise InvalidBodySpec(f"part {self.name!r}: volume must be positive")
        _check_inertia(inertia, self.name)


def _check_inertia(inertia: np.ndarray, name: str = "") -> None:
    scale = max(np.abs(inertia).max(), 1e-300)
    if not np.all(np.isfinite(inertia)):
        raise InvalidBodySpec(f"part {name!r}: non-finite inertia")
    if np.abs(inertia - inertia.T).max() > 1e-9 * scale:
        raise InvalidBodySpec(f"part {name!r}: inertia is not symmetric")
    ev = np.linalg.eigvalsh(inertia)
    tol = 1e-9 * scale
    if ev.min() < -tol:
        raise InvalidBodySpec(f"part {name!r}: inertia is not positive semi-definite")
    # principal moments of a physical body obey the triangle inequality
    if ev.max() > ev.sum() - ev.max() + tol:
        raise InvalidBodySpec(f"part {name!r}: principal moments violate the triangle inequality")


@dataclass(frozen=True, eq=False)
class BodySpec:
    """Immutable rigid-part body model with masses normalized to sum to one."""

    parts: tuple[PartProperties, ...]
    parents: tuple[int, ...]
    gravity_axis: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_GRAVITY_AXIS))

    def __post_init__(self):
        parts = tuple(self.parts)
        parents = tuple(int(p) for p in self.parents)
        g = np.asarray(self.gravity_axis, dtype=float).reshape(3)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "parents", parents)
        if len(parts) < 1:
            raise InvalidBodySpec("body needs at least one part")
        if len(parents) != len(parts):
            raise InvalidBodySpec(f"{len(parents)} parents given for {len(parts)} parts")
        gn = np.linalg.norm(g)
        if not gn > 0:
            raise InvalidBodySpec("gravity_axis must be nonzero")
        object.__setattr__(self, "gravity_axis", g / gn)
        total = math.fsum(p.mass for p in parts)
        if abs(total - 1.0) > 1e-12:
            raise InvalidBodySpec(f"part masses sum to {total!r}, expected 1")
        object.__setattr__(self, "order", _topological_order(parents))

    @property
    def P(self) -> int:
        return len(self.parts)

    @property
    def root(self) -> int:
        return self.order[0]

    @property
    def masses(self) -> np.ndarray:
        return np.array([p.mass for p in self.parts])

    @property
    def centroids(self) -> np.ndarray:
        return np.stack([p.centroid for p in self.parts])

    @property
    def inertias(self) -> np.ndarray:
        return np.stack([p.inertia for p in self.parts])

    @property
    def joints(self) -> np.ndarray:
        return np.stack([p.joint for p in self.parts])

    @property
    def names(self) -> list[str]:
        return [p.name or f"part{i}" for i, p in enumerate(self.parts)]

    @property
    def up(self) -> np.ndarray:
        return -self.gravity_axis

    def leaves(self) -> list[int]:
        has_child = set(p for p in self.parents if p >= 0)
        return [i for i in range(self.P) if i not in has_child]

    def to_dict(self) -> dict:
        parts = []
        for p in self.parts:
            d = {
                "mass": p.mass,
                "centroid": p.centroid.tolist(),
                "inertia": p.inertia.reshape(9).tolist(),
                "joint": p.joint.tolist(),
            }
            if p.volume is not None:
                d["volume"] = p.volume
            if p.name:
                d["name"] = p.name
            if p.points is not None:
                d["points"] = p.points.tolist()
            parts.append(d)
        return {"parts": parts, "parents": list(self.parents), "gravity_axis": self.gravity_axis.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BodySpec":
        try:
            parts = tuple(
                PartProperties(
                    mass=p["mass"],
                    centroid=p["centroid"],
                    inertia=np.asarray(p["inertia"], dtype=float).reshape(3, 3),
                    volume=p.get("volume"),
                    joint=p.get("joint"),
                    name=p.get("name", ""),
                    points=p.get("points"),
                )
                for p in d["parts"]
            )
            return cls(parts, tuple(d["parents"]), d.get("gravity_axis", DEFAULT_GRAVITY_AXIS))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidBodySpec):
                raise
            raise InvalidBodySpec(f"malformed body spec: {exc}") from exc


def _topological_order(parents: Sequence[int]) -> tuple[int, ...]:
    P = len(parents)
    roots = [i for i, p in enumerate(parents) if p < 0]
    for i, p in enumerate(parents):
        if p >= P:
            raise InvalidBodySpec(f"part {i} has out-of-range parent {p}")
        if p == i:
            raise CyclicParents(f"part {i} is its own parent")
    # walk to the root from every part; a walk longer than P means a cycle
    for i in range(P):
        j, steps = i, 0
        while parents[j] >= 0:
            j = parents[j]
            steps += 1
            if steps > P:
                raise CyclicParents(f"parent chain from part {i} does not reach a root")
    if len(roots) != 1:
        raise InvalidBodySpec(f"expected exactly one root part, found {len(roots)}")
    children: dict[int, list[int]] = {i: [] for i in range(P)}
    for i, p in enumerate(parents):
        if p >= 0:
            children[p].append(i)
    order, stack = [], [roots[0]]
    while stack:
        i = stack.pop()
        order.append(i)
        stack.extend(reversed(children[i]))
    return tuple(order)


# -- mesh integration -------------------------------------------------------


def check_closed(mesh: PartMesh) -> None:
    """Edge-use count check: every undirected edge must border exactly two triangles."""
    tri = mesh.triangles
    if len(tri) == 0:
        raise NonWatertightMesh("mesh has no triangles")
    if tri.min() < 0 or tri.max() >= len(mesh.vertices):
        raise NonWatertightMesh("triangle references a missing vertex")
    edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    edges.sort(axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    if np.any(counts != 2):
        bad = int(np.sum(counts != 2))
        raise NonWatertightMesh(f"{bad} edge(s) not shared by exactly two triangles")
    v = mesh.vertices[tri]
    area2 = np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)
    extent = np.ptp(mesh.vertices, axis=0).max()
    if np.any(area2 <= 1e-14 * extent**2):
        raise DegenerateMesh("mesh contains zero-area triangles")


def _moments(mesh: PartMesh):
    """Volume, centroid and centroidal second-moment matrix ``int r r^T dV``."""
    check_closed(mesh)
    # integrate about the vertex mean to keep the tetrahedra small
    ref = mesh.vertices.mean(axis=0)
    v = mesh.vertices[mesh.triangles] - ref
    V1, V2, V3 = v[:, 0], v[:, 1], v[:, 2]
    vol = np.einsum("ij,ij->i", V1, np.cross(V2, V3)) / 6.0
    volume = math.fsum(vol)
    if not volume > 0:
        raise DegenerateMesh(f"enclosed volume is {volume!r}; check winding")
    S = V1 + V2 + V3
    first = (vol[:, None] * S).sum(axis=0) / 4.0
    centroid_rel = first / volume
    outer = (
        np.einsum("ti,tj->tij", V1, V1)
        + np.einsum("ti,tj->tij", V2, V2)
        + np.einsum("ti,tj->tij", V3, V3)
        + np.einsum("ti,tj->tij", S, S)
    )
    second = (vol[:, None, None] * outer).sum(axis=0) / 20.0
    second_c = second - volume * np.outer(centroid_rel, centroid_rel)
    return volume, centroid_rel + ref, 0.5 * (second_c + second_c.T)


def mesh_volume(mesh: PartMesh) -> float:
    """Enclosed volume of a closed, outward-wound triangle mesh."""
    return _moments(mesh)[0]


def mesh_centroid(mesh: PartMesh) -> np.ndarray:
    return _moments(mesh)[1]


def mesh_inertia(mesh: PartMesh, mass: float) -> np.ndarray:
    """Inertia tensor about the centroid for a uniform solid of total ``mass``."""
    if not mass > 0:
        raise ValueError("mass must be positive")
    volume, _, second = _moments(mesh)
    second = second * (mass / volume)
    return np.trace(second) * np.eye(3) - second


def build_body_spec(
    meshes: Sequence[PartMesh],
    parents: Sequence[int],
    gravity_axis=DEFAULT_GRAVITY_AXIS,
    joints=None,
    names: Sequence[str] | None = None,
    keep_points: bool = True,
) -> BodySpec:
    """Build a BodySpec with masses proportional to part volume (total mass 1)."""
    if len(meshes) != len(parents):
        raise InvalidBodySpec(f"{len(meshes)} meshes but {len(parents)} parents")
    _topological_order(tuple(int(p) for p in parents))
    moments = [_moments(m) for m in meshes]
    total = math.fsum(m[0] for m in moments)
    parts = []
    for i, (mesh, (vol, cen, second)) in enumerate(zip(meshes, moments)):
        mass = vol / total
        second = second * (mass / vol)
        inertia = np.trace(second) * np.eye(3) - second
        parts.append(
            PartProperties(
                mass=mass,
                centroid=cen,
                inertia=inertia,
                volume=vol,
                joint=None if joints is None else joints[i],
                name=names[i] if names else "",
                points=mesh.vertices if keep_points else None,
            )
        )
    # absorb the last-ulp rounding so the masses sum to one
    resid = 1.0 - math.fsum(p.mass for p in parts)
    if resid != 0.0:
        k = int(np.argmax([p.mass for p in parts]))
        p = parts[k]
        parts[k] = PartProperties(p.mass + resid, p.centroid, p.inertia, p.volume, p.joint, p.name, p.points)
    return BodySpec(tuple(parts), tuple(int(p) for p in parents), gravity_axis)


# -- file formats -------------------------------------------------------------


def load_obj(path) -> PartMesh:
    """Read ``v`` and ``f`` records of a Wavefront OBJ file (polygons are fan-split)."""
    verts, tris = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.split()
            if not tok:
                continue
            if tok[0] == "v":
                try:
                    verts.append([float(x) for x in tok[1:4]])
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad vertex record") from exc
            elif tok[0] == "f":
                idx = []
                try:
                    for t in tok[1:]:
                        k = int(t.split("/")[0])
                        idx.append(k - 1 if k > 0 else len(verts) + k)
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad face record") from exc
                if len(idx) < 3:
                    raise DataError(f"{path}:{lineno}: face with fewer than 3 vertices")
                for a in range(1, len(idx) - 1):
                    tris.append([idx[0], idx[a], idx[a + 1]])
    return PartMesh(np.array(verts, dtype=float), np.array(tris, dtype=np.int64))


def save_obj(mesh: PartMesh, path) -> None:
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write("v {!r} {!r} {!r}\n".format(*map(float, v)))
        for t in mesh.triangles:
            fh.write("f {} {} {}\n".format(*(int(i) + 1 for i in t)))


def save_body_spec(body: BodySpec, path) -> None:
    Path(path).write_text(json.dumps(body.to_dict(), indent=1))


def load_body_spec(path) -> BodySpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidBodySpec(f"{path}: invalid JSON ({exc})") from exc
    return BodySpec.from_dict(doc)


# -- reference meshes -----------------------------------------------------------


def cuboid_mesh(lo, hi) -> PartMesh:
    """Axis-aligned box with outward winding (12 triangles)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    verts = np.array(
        [[x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
         [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1]]
    )
    tris = np.array(
        [[0, 2, 1], [0, 3, 2],  # bottom
         [4, 5, 6], [4, 6, 7],  # top
         [0, 1, 5], [0, 5, 4],  # y = y0
         [2, 3, 7], [2, 7, 6],  # y = y1
         [1, 2, 6], [1, 6, 5],  # x = x1
         [3, 0, 4], [3, 4, 7]]  # x = x0
    )
    return PartMesh(verts, tris)


def icosphere(subdivisions: int = 3, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> PartMesh:
    t = (1.0 + 5.0**0.5) / 2.0
    verts = [
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ]
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = [list(np.asarray(v, dtype=float) / np.linalg.norm(v)) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = np.add(verts[a], verts[b])
                verts.append(list(m / np.linalg.norm(m)))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new
    return PartMesh(np.array(verts) * radius + np.asarray(center, dtype=float), np.array(faces))


# name, parent, box lower corner, box upper corner, joint; z up, +x to the
# body's left, +y forward, T-pose, soles on z = 0
_DEFAULT_PARTS = [
    ("pelvis", -1, (-0.15, -0.10, 0.90), (0.15, 0.10, 1.05), (0.0, 0.0, 0.95)),
    ("left_thigh", 0, (0.03, -0.07, 0.50), (0.17, 0.07, 0.90), (0.10, 0.0, 0.90)),
    ("right_thigh", 0, (-0.17, -0.07, 0.50), (-0.03, 0.07, 0.90), (-0.10, 0.0, 0.90)),
    ("spine1", 0, (-0.14, -0.09, 1.05), (0.14, 0.09, 1.18), (0.0, 0.0, 1.05)),
    ("left_shin", 1, (0.05, -0.05, 0.08), (0.15, 0.05, 0.50), (0.10, 0.0, 0.50)),
    ("right_shin", 2, (-0.15, -0.05, 0.08), (-0.05, 0.05, 0.50), (-0.10, 0.0, 0.50)),
    ("spine2", 3, (-0.15, -0.10, 1.18), (0.15, 0.10, 1.30), (0.0, 0.0, 1.18)),
    ("left_foot", 4, (0.05, -0.06, 0.0), (0.15, 0.10, 0.08), (0.10, 0.0, 0.08)),
    ("right_foot", 5, (-0.15, -0.06, 0.0), (-0.05, 0.10, 0.08), (-0.10, 0.0, 0.08)),
    ("upper_body", 6, (-0.18, -0.10, 1.30), (0.18, 0.10, 1.48), (0.0, 0.0, 1.30)),
    ("left_toes", 7, (0.05, 0.10, 0.0), (0.15, 0.18, 0.05), (0.10, 0.10, 0.03)),
    ("right_toes", 8, (-0.15, 0.10, 0.0), (-0.05, 0.18, 0.05), (-0.10, 0.10, 0.03)),
    ("neck", 9, (-0.05, -0.05, 1.48), (0.05, 0.05, 1.56), (0.0, 0.0, 1.48)),
    ("head", 12, (-0.09, -0.10, 1.56), (0.09, 0.10, 1.78), (0.0, 0.0, 1.56)),
    ("left_upper_arm", 9, (0.18, -0.05, 1.38), (0.46, 0.05, 1.46), (0.18, 0.0, 1.42)),
    ("right_upper_arm", 9, (-0.46, -0.05, 1.38), (-0.18, 0.05, 1.46), (-0.18, 0.0, 1.42)),
    ("left_forearm", 14, (0.46, -0.04, 1.38), (0.70, 0.04, 1.45), (0.46, 0.0, 1.42)),
    ("right_forearm", 15, (-0.70, -0.04, 1.38), (-0.46, 0.04, 1.45), (-0.46, 0.0, 1.42)),
    ("left_hand", 16, (0.70, -0.04, 1.39), (0.88, 0.04, 1.44), (0.70, 0.0, 1.42)),
    ("right_hand", 17, (-0.88, -0.04, 1.39), (-0.70, 0.04, 1.44), (-0.70, 0.0, 1.42)),
]


def default_body() -> BodySpec:
    """A 20-part box-segment body standing on z = 0, for demos and synthetic corpora."""
    meshes = [cuboid_mesh(lo, hi) for _, _, lo, hi, _ in _DEFAULT_PARTS]
    return build_body_spec(
        meshes,
        [p for _, p, _, _, _ in _DEFAULT_PARTS],
        DEFAULT_GRAVITY_AXIS,
        joints=[j for *_, j in _DEFAULT_PARTS],
        names=[n for n, *_ in _DEFAULT_PARTS],
    )
