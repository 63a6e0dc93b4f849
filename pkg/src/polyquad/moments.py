"""Chebyshev moments of a polyhedron via the divergence theorem.

For each basis function phi_j the volume integral over the polyhedron equals
the surface integral of an antiderivative Phi_j (taken along one coordinate
axis) times the matching component of the outward normal. Faces are planar,
so that normal component is constant per face, and each face integral is a
triangle-wise Gauss rule in reference coordinates.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chebyshev import basis_dimension, cheb_values, index_triples, primitive_values
from .errors import NonFiniteMoment
from .geometry import AffineMap, Polyhedron, triangulate_face
from .triangle_quadrature import face_quadrature

NORMAL_SKIP_TOL = 1e-14
FACE_BLOCK = 32


@dataclass(frozen=True)
class MomentVector:
    degree: int
    values: np.ndarray
    reference_frame: AffineMap | None = None

    @property
    def triples(self) -> np.ndarray:
        return index_triples(self.degree).triples

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "triples": self.triples.tolist(),
            "values": [float(v) for v in self.values],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "MomentVector":
        n = int(d["degree"])
        expected = index_triples(n).triples.tolist()
        if "triples" in d and [list(t) for t in d["triples"]] != expected:
            raise ValueError("moment triples do not follow graded lexicographic order")
        values = np.array(d["values"], dtype=float)
        if len(values) != basis_dimension(n):
            raise ValueError(f"expected {basis_dimension(n)} moments, got {len(values)}")
        return cls(n, values)


def face_rule_order(n: int) -> int:
    """Points per direction so the degree n+1 primitive is integrated exactly."""
    return math.ceil((n + 3) / 2) + 1


@lru_cache(maxsize=64)
def _split_indices(n: int, axis: int) -> tuple[np.ndarray, np.ndarray, tuple[int, int], np.ndarray, np.ndarray]:
    """Index plumbing for the factorization m = (prim along axis) x (pair of others)."""
    others = tuple(d for d in range(3) if d != axis)
    pairs = [(b, c) for b in range(n + 1) for c in range(n + 1 - b)]
    lookup = {pc: i for i, pc in enumerate(pairs)}
    tr = index_triples(n).triples
    prim_idx = tr[:, axis]
    pair_idx = np.array([lookup[(int(t[others[0]]), int(t[others[1]]))] for t in tr])
    pairs = np.array(pairs)
    return prim_idx, pair_idx, others, pairs[:, 0], pairs[:, 1]


def _face_partials(ref: Polyhedron, faces: list[int], n: int, axis: int, k: int) -> np.ndarray:
    """Per-face contributions n_axis * int_face Phi_j dS, one row per face.

    Each face sum is computed as a small matrix product between the weighted
    primitive values along ``axis`` and the products of Chebyshev values in
    the two remaining coordinates, then gathered into basis order.
    """
    prim_idx, pair_idx, others, pb, pc = _split_indices(n, axis)
    coef = index_triples(n).normalization()
    out = np.zeros((len(faces), basis_dimension(n)))
    if not faces:
        return out
    pts, wts, counts = [], [], []
    for fi in faces:
        tri = triangulate_face(ref, fi)
        fq = face_quadrature(ref.vertices, tri.triangles, k)
        pts.append(fq.points)
        wts.append(fq.weights * ref.faces[fi].unit_normal[axis])
        counts.append(len(fq.weights))
    P = np.concatenate(pts)
    W = np.concatenate(wts)
    prim = primitive_values(n, P[:, axis]) * W[:, None]
    t1 = cheb_values(n, P[:, others[0]])
    t2 = cheb_values(n, P[:, others[1]])
    pair_vals = t1[:, pb] * t2[:, pc]
    start = 0
    for row, count in enumerate(counts):
        sl = slice(start, start + count)
        G = prim[sl].T @ pair_vals[sl]
        out[row] = coef * G[prim_idx, pair_idx]
        start += count
    return out


def polyhedron_moments(
    p: Polyhedron, amap: AffineMap, n: int, axis: int = 0, threads: int = 1
) -> MomentVector:
    """Moments m_j = int phi_j over the polyhedron mapped to [-1, 1]^3.

    Parameters
    ----------
    p : Polyhedron
        Valid, outward oriented polyhedron in physical coordinates.
    amap : AffineMap
        Map from the polyhedron's bounding box to the reference cube.
    n : int
        Total degree of the basis.
    axis : int
        Coordinate along which the antiderivative is taken (0 = x).
    threads : int
        Worker threads for blocks of faces; 0 means one per CPU. The reduction
        always adds per-face partial sums in face order, so the result does not
        depend on this setting.
    """
    ref = p.mapped(amap)
    k = face_rule_order(n)
    active = [i for i, f in enumerate(ref.faces) if abs(f.unit_normal[axis]) > NORMAL_SKIP_TOL]
    blocks = [active[i : i + FACE_BLOCK] for i in range(0, len(active), FACE_BLOCK)]

    def work(block):
        return _face_partials(ref, block, n, axis, k)

    if threads != 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            partials = list(pool.map(work, blocks))
    else:
        partials = [work(b) for b in blocks]

    values = np.zeros(basis_dimension(n))
    for block in partials:
        for row in block:
            values += row
    if not np.all(np.isfinite(values)):
        raise NonFiniteMoment("non-finite value while accumulating moments")
    values.setflags(write=False)
    return MomentVector(n, values, amap)


def moments_crosscheck(p: Polyhedron, amap: AffineMap, n: int) -> float:
    """Max abs difference between moments built from x- and y-antiderivatives."""
    mx = polyhedron_moments(p, amap, n, axis=0).values
    my = polyhedron_moments(p, amap, n, axis=1).values
    return float(np.max(np.abs(mx - my)))
