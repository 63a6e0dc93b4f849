"""Polyhedron data model, OFF input/output, validation and face triangulation.

A polyhedron is a list of vertices plus planar polygonal faces whose vertex
order is counter-clockwise when seen from outside, so that the right-hand
rule yields the outward normal. Everything downstream (moments, rules)
relies on that orientation.
"""

from __future__ import annotations

import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import (
    DegenerateBox,
    DegenerateFace,
    EarClippingFailure,
    IndexOutOfRange,
    NegativeVolume,
    ParseError,
)

PLANARITY_TOL = 1e-9
CLOSURE_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _area_vector(points: np.ndarray) -> np.ndarray:
    """Newell's vector: area times unit normal of a planar polygon."""
    nxt = np.roll(points, -1, axis=0)
    return 0.5 * np.cross(points, nxt).sum(axis=0)


@dataclass(frozen=True)
class Face:
    vertex_indices: tuple[int, ...]
    unit_normal: np.ndarray
    area: float


@dataclass(frozen=True)
class BoundingBox:
    lo: np.ndarray
    hi: np.ndarray

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.extent))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extent))


@dataclass(frozen=True)
class AffineMap:
    """Translation plus axis scaling sending a box onto [-1, 1]^3."""

    center: np.ndarray
    half_extent: np.ndarray

    @property
    def jacobian(self) -> float:
        return float(np.prod(self.half_extent))

    def forward(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.center) / self.half_extent

    def inverse(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) * self.half_extent + self.center


@dataclass(frozen=True)
class Polyhedron:
    vertices: np.ndarray
    faces: tuple[Face, ...]
    label: str = ""

    @classmethod
    def from_faces(cls, vertices, faces: Iterable[Sequence[int]], label: str = "") -> "Polyhedron":
        """Build a polyhedron, deriving normals and areas of every face.

        Raises
        ------
        IndexOutOfRange
            If a face refers to a vertex that does not exist.
        """
        verts = _frozen(vertices).reshape(-1, 3)
        built = []
        for fi, idx in enumerate(faces):
            idx = tuple(int(i) for i in idx)
            if len(idx) < 3:
                raise ParseError(f"face {fi} has fewer than 3 vertices")
            bad = [i for i in idx if i < 0 or i >= len(verts)]
            if bad:
                raise IndexOutOfRange(f"face {fi} references vertex {bad[0]} (have {len(verts)})")
            av = _area_vector(verts[list(idx)])
            area = float(np.linalg.norm(av))
            normal = av / area if area > 0.0 else np.zeros(3)
            built.append(Face(idx, _frozen(normal), area))
        return cls(verts, tuple(built), label)

    @property
    def face_indices(self) -> list[tuple[int, ...]]:
        return [f.vertex_indices for f in self.faces]

    def face_points(self, face_index: int) -> np.ndarray:
        return self.vertices[list(self.faces[face_index].vertex_indices)]

    def reversed(self) -> "Polyhedron":
        """Same solid with every face orientation flipped (first vertex kept)."""
        flipped = [(f[0],) + tuple(reversed(f[1:])) for f in self.face_indices]
        return Polyhedron.from_faces(self.vertices, flipped, self.label)

    def transformed(self, func) -> "Polyhedron":
        """Apply ``func`` to the (V, 3) vertex array, keeping connectivity."""
        return Polyhedron.from_faces(func(np.array(self.vertices)), self.face_indices, self.label)

    def mapped(self, amap: AffineMap) -> "Polyhedron":
        return self.transformed(amap.forward)


# ---------------------------------------------------------------------------
# OFF input / output


def load_off(source, label: str = "") -> Polyhedron:
    """Parse an ASCII OFF stream (bytes or text) into a Polyhedron.

    Comments introduced by ``#`` and blank lines are skipped. Geometry is not
    validated here; call :func:`validate` for that.
    """
    data = source.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not an ASCII OFF file ({exc})") from None
    records = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            records.append((lineno, tokens))
    if not records:
        raise ParseError("empty file")

    it = iter(records)
    lineno, tokens = next(it)
    if tokens[0] != "OFF":
        raise ParseError(f"expected 'OFF' header, got {tokens[0]!r}", lineno)
    counts = tokens[1:]
    if not counts:
        try:
            lineno, counts = next(it)
        except StopIteration:
            raise ParseError("missing counts line", lineno) from None
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except (IndexError, ValueError):
        raise ParseError(f"bad counts line {' '.join(counts)!r}", lineno) from None
    if nv < 0 or nf < 0:
        raise ParseError("negative counts", lineno)

    vertices = np.empty((nv, 3))
    for i in range(nv):
        try:
            lineno, tokens = next(it)
        except StopIteration:
            raise ParseError(f"expected {nv} vertices, found {i}", lineno) from None
        try:
            vertices[i] = [float(t) for t in tokens[:3]]
        except ValueError:
            raise ParseError(f"bad vertex record {' '.join(tokens)!r}", lineno) from None
        if len(tokens) < 3:
            raise ParseError(f"vertex record needs 3 coordinates, got {len(tokens)}", lineno)

    faces = []
    for i in range(nf):
        try:
            lineno, tokens = next(it)
        except StopIteration:
            raise ParseError(f"expected {nf} faces, found {i}", lineno) from None
        try:
            k = int(tokens[0])
            idx = [int(t) for t in tokens[1 : 1 + k]]
        except ValueError:
            raise ParseError(f"bad face record {' '.join(tokens)!r}", lineno) from None
        if k < 3 or len(idx) != k:
            raise ParseError(f"face record must list k >= 3 indices: {' '.join(tokens)!r}", lineno)
        for j in idx:
            if j < 0 or j >= nv:
                raise IndexOutOfRange(f"vertex index {j} out of range [0, {nv})", lineno)
        faces.append(idx)

    return Polyhedron.from_faces(vertices, faces, label)


def read_off(path) -> Polyhedron:
    from pathlib import Path

    path = Path(path)
    with open(path, "rb") as fh:
        return load_off(fh, label=path.stem)


def dump_off(p: Polyhedron, stream: TextIO) -> None:
    """Write ``p`` in the dialect :func:`load_off` reads; floats round-trip exactly."""
    stream.write("OFF\n")
    if p.label:
        stream.write(f"# {p.label}\n")
    stream.write(f"{len(p.vertices)} {len(p.faces)} 0\n")
    for v in p.vertices:
        stream.write(" ".join(repr(float(c)) for c in v) + "\n")
    for f in p.faces:
        stream.write(f"{len(f.vertex_indices)} " + " ".join(map(str, f.vertex_indices)) + "\n")


def dumps_off(p: Polyhedron) -> str:
    buf = io.StringIO()
    dump_off(p, buf)
    return buf.getvalue()


def write_off(p: Polyhedron, path) -> None:
    with open(path, "w") as fh:
        dump_off(p, fh)


# ---------------------------------------------------------------------------
# bounding box and reference map


def bounding_box(p: Polyhedron) -> BoundingBox:
    if len(p.vertices) == 0:
        raise DegenerateBox("polyhedron has no vertices")
    lo = p.vertices.min(axis=0)
    hi = p.vertices.max(axis=0)
    box = BoundingBox(_frozen(lo), _frozen(hi))
    if np.any(box.extent < 1e-12 * box.diameter) or box.diameter == 0.0:
        raise DegenerateBox(f"flat bounding box with extent {box.extent}")
    return box


def affine_map(box: BoundingBox) -> AffineMap:
    return AffineMap(_frozen(0.5 * (box.lo + box.hi)), _frozen(0.5 * (box.hi - box.lo)))


# ---------------------------------------------------------------------------
# triangulation


@dataclass(frozen=True)
class TriangulatedFace:
    face_index: int
    triangles: tuple[tuple[int, int, int], ...]
    origin: np.ndarray
    axes: np.ndarray  # (2, 3): orthonormal in-plane axes, e1 x e2 = outward normal

    def to_local(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.origin) @ self.axes.T


def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _prune_collinear(order: list[int], pts: dict, tol: float) -> list[int]:
    changed = True
    while changed and len(order) > 3:
        changed = False
        for k in range(len(order)):
            a, b, c = pts[order[k - 1]], pts[order[k]], pts[order[(k + 1) % len(order)]]
            base = np.hypot(c[0] - a[0], c[1] - a[1])
            dist = abs(_cross2(a, b, c)) / base if base > 0 else np.hypot(b[0] - a[0], b[1] - a[1])
            if dist <= tol:
                del order[k]
                changed = True
                break
    return order


def _inside_or_on(p, a, b, c, tol) -> bool:
    return _cross2(a, b, p) >= -tol and _cross2(b, c, p) >= -tol and _cross2(c, a, p) >= -tol


def _ear_clip(order: list[int], pts: dict, tol: float) -> list[tuple[int, int, int]]:
    tris = []
    order = list(order)
    while len(order) > 3:
        m = len(order)
        for k in range(m):
            ia, ib, ic = order[k - 1], order[k], order[(k + 1) % m]
            a, b, c = pts[ia], pts[ib], pts[ic]
            if _cross2(a, b, c) <= tol:
                continue
            if any(
                _inside_or_on(pts[j], a, b, c, tol)
                for j in order
                if j not in (ia, ib, ic)
            ):
                continue
            tris.append((ia, ib, ic))
            del order[k]
            break
        else:
            raise EarClippingFailure("no ear found; face polygon is not simple")
    tris.append(tuple(order))
    return tris


def triangulate_face(p: Polyhedron, face_index: int) -> TriangulatedFace:
    """Split one face into triangles with the face's orientation.

    Convex faces are fanned from their first vertex, nonconvex faces are ear
    clipped in a local 2D frame. Vertices lying on the segment joining their
    neighbours (within 1e-12 of the face diameter) are dropped first.
    """
    face = p.faces[face_index]
    idx = face.vertex_indices
    pts3 = p.vertices[list(idx)]
    diam = float(np.linalg.norm(p.vertices.max(axis=0) - p.vertices.min(axis=0)))
    if face.area < 1e-14 * diam**2:
        raise DegenerateFace(f"face {face_index} has area {face.area:g}")

    normal = face.unit_normal
    origin = pts3[0]
    # first in-plane axis along the longest edge from the origin, for conditioning
    d = pts3 - origin
    d = d - np.outer(d @ normal, normal)
    e1 = d[np.argmax(np.einsum("ij,ij->i", d, d))]
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    axes = np.array([e1, e2])
    loc = (pts3 - origin) @ axes.T
    pts = {i: loc[k] for k, i in enumerate(idx)}

    face_diam = float(np.max(np.linalg.norm(loc[:, None, :] - loc[None, :, :], axis=-1)))
    tol = 1e-12 * face_diam
    order = _prune_collinear(list(dict.fromkeys(idx)), pts, tol)
    if len(order) < 3:
        raise DegenerateFace(f"face {face_index} collapses to fewer than 3 vertices")

    m = len(order)
    turns = [_cross2(pts[order[k - 1]], pts[order[k]], pts[order[(k + 1) % m]]) for k in range(m)]
    if all(t > tol * face_diam for t in turns):
        tris = [(order[0], order[k], order[k + 1]) for k in range(1, m - 1)]
    else:
        tris = _ear_clip(order, pts, tol * face_diam)

    total = sum(0.5 * _cross2(pts[a], pts[b], pts[c]) for a, b, c in tris)
    if abs(total - face.area) > 1e-10 * face.area:
        raise EarClippingFailure(
            f"face {face_index}: triangles cover {total:.17g}, face area {face.area:.17g}"
        )
    return TriangulatedFace(face_index, tuple(tris), _frozen(origin), _frozen(axes))


def triangle_area(p: Polyhedron, tri) -> float:
    a, b, c = p.vertices[list(tri)]
    return 0.5 * float(np.linalg.norm(np.cross(b - a, c - a)))


# ---------------------------------------------------------------------------
# volume and validation


def divergence_volume(p: Polyhedron, allow_negative: bool = False) -> float:
    """Volume as the surface integral of x times the first normal component.

    Raises
    ------
    NegativeVolume
        If the result is negative (inward orientation) and ``allow_negative``
        is false.
    """
    from .triangle_quadrature import triangle_rule

    vol = 0.0
    for fi, face in enumerate(p.faces):
        n1 = face.unit_normal[0]
        if abs(n1) <= 1e-14:
            continue
        acc = 0.0
        for tri in triangulate_face(p, fi).triangles:
            pts, w = triangle_rule(2, p.vertices[list(tri)])
            acc += w @ pts[:, 0]
        vol += n1 * acc
    if vol < 0 and not allow_negative:
        raise NegativeVolume(f"divergence volume {vol:g} < 0: faces oriented inward")
    return float(vol)


@dataclass
class ValidationReport:
    face_planarity: list[float]
    edge_pairing_ok: bool
    vector_area_residual: float
    volume: float
    surface_area: float = 0.0
    problems: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.problems

    def to_dict(self) -> dict:
        return {
            "face_planarity": [float(x) for x in self.face_planarity],
            "edge_pairing_ok": bool(self.edge_pairing_ok),
            "vector_area_residual": float(self.vector_area_residual),
            "volume": float(self.volume),
            "surface_area": float(self.surface_area),
            "passed": self.passed,
            "problems": list(self.problems),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _planarity(points: np.ndarray) -> float:
    centered = points - points.mean(axis=0)
    # smallest right singular vector = best-fit plane normal
    normal = np.linalg.svd(centered)[2][-1]
    return float(np.max(np.abs(centered @ normal)))


def validate(p: Polyhedron, tol_planarity: float = PLANARITY_TOL, tol_closure: float = CLOSURE_TOL) -> ValidationReport:
    """Check closedness, orientation, planarity and positivity of volume.

    Tolerances are relative: planarity to the bounding-box diameter,
    vector-area closure to the total surface area. Failures are collected in
    the report rather than raised.
    """
    problems: list[str] = []
    if len(p.vertices):
        diam = float(np.linalg.norm(p.vertices.max(axis=0) - p.vertices.min(axis=0)))
    else:
        diam = 0.0
        problems.append("no vertices")

    planarity = [_planarity(p.face_points(i)) for i in range(len(p.faces))]
    for i, dev in enumerate(planarity):
        if dev > tol_planarity * diam:
            problems.append(f"face {i} not planar: deviation {dev:.3g}")

    directed = Counter()
    for f in p.face_indices:
        m = len(f)
        for k in range(m):
            directed[(f[k], f[(k + 1) % m])] += 1
    edge_ok = True
    for (a, b), count in sorted(directed.items()):
        if count > 1:
            edge_ok = False
            problems.append(f"edge ({a},{b}) traversed {count} times in the same direction")
        elif directed.get((b, a), 0) != 1:
            edge_ok = False
            problems.append(f"edge ({a},{b}) has no oppositely oriented partner")

    area_vec = np.zeros(3)
    surface = 0.0
    for f in p.faces:
        area_vec += f.area * f.unit_normal
        surface += f.area
    residual = float(np.linalg.norm(area_vec))
    if residual > tol_closure * surface:
        problems.append(f"vector-area residual {residual:.3g} exceeds {tol_closure:g} x surface area")

    volume = float("nan")
    if diam > 0:
        try:
            volume = divergence_volume(p, allow_negative=True)
        except (DegenerateFace, EarClippingFailure) as exc:
            problems.append(str(exc))
        else:
            if not volume > 0:
                problems.append(f"divergence volume {volume:.3g} is not positive (inward orientation?)")
        for i in range(len(p.faces)):
            try:
                triangulate_face(p, i)
            except (DegenerateFace, EarClippingFailure) as exc:
                if str(exc) not in problems:
                    problems.append(str(exc))

    return ValidationReport(planarity, edge_ok, residual, volume, surface, problems)
