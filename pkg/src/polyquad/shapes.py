"""Built-in test polyhedra and their reference integrators.

``lprism`` is nonconvex, ``holedprism`` is a prism with a square
through-hole (multiply connected, every face simple), ``hull20`` is a
fixed convex hull with 20 triangular facets and ``hull760`` a many-facet
convex hull used for timing comparisons.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull

from .errors import UnknownShape
from .geometry import Polyhedron
from .oracle import Box, BoxUnion, convex_integral, convex_monomial_table, union_integral, union_monomial_table


def box(lo=(-1.0, -1.0, -1.0), hi=(1.0, 1.0, 1.0), label: str = "cube") -> Polyhedron:
    lo = np.broadcast_to(np.asarray(lo, float), 3)
    hi = np.broadcast_to(np.asarray(hi, float), 3)
    v = np.array([[(lo, hi)[i][0], (lo, hi)[j][1], (lo, hi)[k][2]] for k in (0, 1) for j in (0, 1) for i in (0, 1)])
    faces = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]]
    return Polyhedron.from_faces(v, faces, label)


def cube() -> Polyhedron:
    return box()


def tetrahedron() -> Polyhedron:
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    return Polyhedron.from_faces(v, [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]], "tet")


def prism(polygon, z0: float, z1: float, label: str = "prism") -> Polyhedron:
    """Extrude a counter-clockwise simple polygon between heights z0 < z1."""
    poly = np.asarray(polygon, float)
    m = len(poly)
    verts = np.vstack([np.column_stack([poly, np.full(m, z0)]), np.column_stack([poly, np.full(m, z1)])])
    faces = [list(range(m - 1, -1, -1)), list(range(m, 2 * m))]
    faces += [[i, (i + 1) % m, m + (i + 1) % m, m + i] for i in range(m)]
    return Polyhedron.from_faces(verts, faces, label)


def lprism() -> Polyhedron:
    return prism([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], 0.0, 1.0, "lprism")


def holedprism() -> Polyhedron:
    """[0,3]^3 minus the through-hole [1,2]^2 x [0,3], volume 24."""
    outer = [(0, 0), (3, 0), (3, 3), (0, 3)]
    inner = [(1, 1), (2, 1), (2, 2), (1, 2)]
    verts = (
        [(x, y, 0) for x, y in outer]
        + [(x, y, 3) for x, y in outer]
        + [(x, y, 0) for x, y in inner]
        + [(x, y, 3) for x, y in inner]
    )
    faces = []
    for i in range(4):
        j = (i + 1) % 4
        faces.append([i, j, 4 + j, 4 + i])  # outer wall
        faces.append([8 + j, 8 + i, 12 + i, 12 + j])  # hole wall, facing into the hole
        faces.append([4 + i, 4 + j, 12 + j, 12 + i])  # top trapezoid
        faces.append([i, 8 + i, 8 + j, j])  # bottom trapezoid
    return Polyhedron.from_faces(verts, faces, "holedprism")


def hull(num_points: int, seed: int, label: str = "") -> Polyhedron:
    """Convex hull of random points on the unit sphere, faces oriented outward."""
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((num_points, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    h = ConvexHull(pts)
    used = np.unique(h.simplices)
    remap = {int(old): new for new, old in enumerate(used)}
    faces = []
    for tri, eq in zip(h.simplices, h.equations):
        a, b, c = pts[tri]
        if np.cross(b - a, c - a) @ eq[:3] < 0:
            tri = tri[[0, 2, 1]]
        faces.append([remap[int(i)] for i in tri])
    return Polyhedron.from_faces(pts[used], faces, label or f"hull{len(faces)}")


def hull20() -> Polyhedron:
    p = hull(12, seed=42, label="hull20")
    if len(p.faces) != 20:
        raise RuntimeError(f"hull20 construction produced {len(p.faces)} facets")
    return p


def hull760() -> Polyhedron:
    p = hull(382, seed=42, label="hull760")
    if len(p.faces) != 760:
        raise RuntimeError(f"hull760 construction produced {len(p.faces)} facets")
    return p


BUILDERS: dict[str, Callable[[], Polyhedron]] = {
    "cube": cube,
    "tet": tetrahedron,
    "lprism": lprism,
    "holedprism": holedprism,
    "hull20": hull20,
    "hull760": hull760,
}

#: the five shapes every test and acceptance criterion runs on
CORE_SHAPES = ("cube", "tet", "lprism", "holedprism", "hull20")

BOX_UNIONS = {
    "cube": BoxUnion.of(Box((-1, -1, -1), (1, 1, 1))),
    "lprism": BoxUnion.of(Box((0, 0, 0), (2, 1, 1)), Box((0, 1, 0), (1, 2, 1))),
    # disjoint positive pieces; no cancellation in the reference sums
    "holedprism": BoxUnion.of(
        Box((0, 0, 0), (3, 1, 3)),
        Box((0, 2, 0), (3, 3, 3)),
        Box((0, 1, 0), (1, 2, 3)),
        Box((2, 1, 0), (3, 2, 3)),
    ),
}

VOLUMES = {"cube": 8.0, "tet": 1.0 / 6.0, "lprism": 3.0, "holedprism": 24.0}


def builtin_shape(name: str) -> Polyhedron:
    try:
        return BUILDERS[name]()
    except KeyError:
        raise UnknownShape(f"unknown shape {name!r}; choose from {', '.join(BUILDERS)}") from None


def reference_integrator(name: str, p: Polyhedron | None = None) -> Callable[[Callable, int], float]:
    """Oracle ``(f, degree) -> integral`` for a built-in shape."""
    if name in BOX_UNIONS:
        u = BOX_UNIONS[name]
        return lambda f, degree: union_integral(u, f, degree)
    p = builtin_shape(name) if p is None else p
    return lambda f, degree: convex_integral(p, f, degree)


def monomial_reference(name: str, triples, p: Polyhedron | None = None) -> np.ndarray:
    """Oracle integrals of x^a y^b z^c over a built-in shape, one per triple."""
    if name in BOX_UNIONS:
        return union_monomial_table(BOX_UNIONS[name], triples)
    return convex_monomial_table(builtin_shape(name) if p is None else p, triples)


def identify(p: Polyhedron) -> str | None:
    """Name of the built-in shape with identical vertices and faces, if any."""
    for name, build in BUILDERS.items():
        if name == "hull760" and len(p.faces) != 760:
            continue
        q = build()
        if (
            q.vertices.shape == p.vertices.shape
            and np.array_equal(q.vertices, p.vertices)
            and q.face_indices == p.face_indices
        ):
            return name
    return None
