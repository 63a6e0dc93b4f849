"""Independent reference integrators for tests and the ``check`` command.

Nothing here touches the Chebyshev / moment pipeline: box integrals are
analytic or use numpy's Gauss-Legendre nodes, and convex polyhedra are cut
into cones over their faces from the vertex centroid, each cone integrated
with a collapsed product rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import NonConvex
from .geometry import Polyhedron


@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))


@dataclass(frozen=True)
class BoxUnion:
    """Signed collection of axis-aligned boxes (+1 adds, -1 subtracts)."""

    boxes: tuple[Box, ...]
    signs: tuple[int, ...]

    @classmethod
    def of(cls, *items: Box | tuple[Box, int]) -> "BoxUnion":
        boxes, signs = [], []
        for it in items:
            box, sign = (it, 1) if isinstance(it, Box) else it
            boxes.append(box)
            signs.append(sign)
        return cls(tuple(boxes), tuple(signs))

    @property
    def volume(self) -> float:
        return sum(s * b.volume for b, s in zip(self.boxes, self.signs))


def box_monomial_integral(box: Box, a: int, b: int, c: int) -> float:
    out = 1.0
    for k, lo, hi in zip((a, b, c), box.lo, box.hi):
        out *= (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
    return out


def union_monomial_integral(u: BoxUnion, a: int, b: int, c: int) -> float:
    return sum(s * box_monomial_integral(box, a, b, c) for box, s in zip(u.boxes, u.signs))


def _leggauss01(k: int):
    x, w = leggauss(k)
    return 0.5 * (x + 1.0), 0.5 * w


def box_integral(box: Box, f: Callable, degree: int) -> float:
    """Tensor Gauss-Legendre integral of a vectorized f(x, y, z) of given degree."""
    k = degree // 2 + 1
    t, w = _leggauss01(k)
    lo, hi = np.asarray(box.lo, float), np.asarray(box.hi, float)
    ext = hi - lo
    X, Y, Z = np.meshgrid(lo[0] + ext[0] * t, lo[1] + ext[1] * t, lo[2] + ext[2] * t, indexing="ij")
    W = np.einsum("i,j,k->ijk", w, w, w) * np.prod(ext)
    return float(np.sum(W * f(X, Y, Z)))


def union_integral(u: BoxUnion, f: Callable, degree: int) -> float:
    return sum(s * box_integral(box, f, degree) for box, s in zip(u.boxes, u.signs))


def _cones(p: Polyhedron):
    """Tetrahedra (centroid, a, b, c) over fan-triangulated faces."""
    g = p.vertices.mean(axis=0)
    tets = []
    for face in p.faces:
        idx = face.vertex_indices
        for k in range(1, len(idx) - 1):
            tets.append((g, p.vertices[idx[0]], p.vertices[idx[k]], p.vertices[idx[k + 1]]))
    return np.array(tets)


def _collapsed_tet_points(k: int):
    s, ws = _leggauss01(k)
    S, T, R = np.meshgrid(s, s, s, indexing="ij")
    W = np.einsum("i,j,k->ijk", ws, ws, ws) * S * S * T
    return S.ravel(), T.ravel(), R.ravel(), W.ravel()


def convex_integral(p: Polyhedron, f: Callable, degree: int) -> float:
    """Integrate a polynomial of the given total degree over a convex polyhedron.

    Raises
    ------
    NonConvex
        If some cone from the vertex centroid has negative volume.
    """
    tets = _cones(p)
    v0, v1, v2, v3 = (tets[:, i] for i in range(4))
    det = np.einsum("ij,ij->i", v1 - v0, np.cross(v2 - v0, v3 - v0))
    vol = det.sum() / 6.0
    if np.any(det / 6.0 < -1e-12 * abs(vol)):
        raise NonConvex("a face is not visible from the vertex centroid")
    k = math.ceil((degree + 4) / 2)
    s, t, r, w = _collapsed_tet_points(k)
    # (tets, points, 3)
    pts = (
        v0[:, None, :]
        + s[None, :, None] * (v1 - v0)[:, None, :]
        + (s * t)[None, :, None] * (v2 - v1)[:, None, :]
        + (s * t * r)[None, :, None] * (v3 - v2)[:, None, :]
    )
    vals = f(pts[..., 0], pts[..., 1], pts[..., 2])
    return float(np.sum(det * (vals @ w)))


def convex_tet_oracle(p: Polyhedron, a: int, b: int, c: int) -> float:
    return convex_integral(p, lambda x, y, z: x**a * y**b * z**c, a + b + c)


def convex_monomial_table(p: Polyhedron, triples: Sequence) -> np.ndarray:
    """convex_tet_oracle for many monomials, sharing one set of cone points."""
    triples = np.asarray(triples, dtype=int).reshape(-1, 3)
    top = int(triples.sum(axis=1).max()) if len(triples) else 0
    tets = _cones(p)
    v0, v1, v2, v3 = (tets[:, i] for i in range(4))
    det = np.einsum("ij,ij->i", v1 - v0, np.cross(v2 - v0, v3 - v0))
    if np.any(det < -1e-12 * abs(det.sum())):
        raise NonConvex("a face is not visible from the vertex centroid")
    s, t, r, w = _collapsed_tet_points(math.ceil((top + 4) / 2))
    pts = (
        v0[:, None, :]
        + s[None, :, None] * (v1 - v0)[:, None, :]
        + (s * t)[None, :, None] * (v2 - v1)[:, None, :]
        + (s * t * r)[None, :, None] * (v3 - v2)[:, None, :]
    )
    wd = det[:, None] * w[None, :]
    powers = [pts[..., d, None] ** np.arange(top + 1) for d in range(3)]
    return np.array([np.sum(wd * powers[0][..., a] * powers[1][..., b] * powers[2][..., c]) for a, b, c in triples])


def union_monomial_table(u: BoxUnion, triples: Sequence) -> np.ndarray:
    return np.array([union_monomial_integral(u, int(a), int(b), int(c)) for a, b, c in triples])


def is_convex(p: Polyhedron, rel_tol: float = 1e-10) -> bool:
    """True when every vertex lies on the inner side of every face plane."""
    diam = float(np.linalg.norm(np.ptp(p.vertices, axis=0)))
    for face in p.faces:
        origin = p.vertices[face.vertex_indices[0]]
        if np.max((p.vertices - origin) @ face.unit_normal) > rel_tol * diam:
            return False
    return True

