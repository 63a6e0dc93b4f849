"""Gauss-Legendre rules and collapsed (Duffy) product rules on triangles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceFailure, DegenerateTriangle


@lru_cache(maxsize=None)
def _gauss_legendre_cached(k: int) -> tuple[np.ndarray, np.ndarray]:
    if not 1 <= k <= 64:
        raise ValueError(f"Gauss-Legendre order must be in [1, 64], got {k}")
    i = np.arange(1, k + 1)
    # Chebyshev-angle initial guesses; roots of P_k descend from near +1
    x = np.cos(np.pi * (i - 0.25) / (k + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, k + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = k * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-15:
            break
    else:
        raise ConvergenceFailure(f"Newton iteration for {k}-point Gauss-Legendre did not converge")
    # derivative at the converged roots
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, k + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = k * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    nodes = 0.5 * (x[order] + 1.0)
    weights = 0.5 * w[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre_1d(k: int) -> tuple[np.ndarray, np.ndarray]:
    """k-point Gauss-Legendre rule on [0, 1], exact for degree 2k - 1.

    Nodes are the roots of the Legendre polynomial P_k, found by Newton
    iteration from Chebyshev-angle initial guesses, returned in ascending
    order.

    Raises
    ------
    ConvergenceFailure
        If Newton's method does not reach 1e-15 within 100 steps.
    """
    return _gauss_legendre_cached(int(k))


@lru_cache(maxsize=None)
def _unit_square_collapsed(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t, wt = gauss_legendre_1d(k)
    s, ws = gauss_legendre_1d(k)
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt) * S  # Duffy Jacobian factor s
    return S.ravel(), T.ravel(), W.ravel()


@dataclass(frozen=True)
class FaceQuadrature:
    """Nodes and positive weights covering one face, triangle by triangle."""

    points: np.ndarray
    weights: np.ndarray


def triangle_rule(k: int, vertices) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed k x k Gauss-Legendre rule on a triangle.

    The unit square (s, t) is mapped onto the triangle ABC by
    ``A + s (B - A) + s t (C - B)``; the rule is exact for polynomials of
    total degree <= 2k - 2.

    Parameters
    ----------
    k : int
        Points per direction.
    vertices : array_like, shape (3, d)
        Triangle corners in 2D or 3D.

    Returns
    -------
    points : ndarray, shape (k*k, d)
    weights : ndarray, shape (k*k,)
        Positive weights summing to the triangle area.
    """
    v = np.asarray(vertices, dtype=float)
    a, b, c = v
    e1, e2 = b - a, c - a
    if v.shape[1] == 2:
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    else:
        area = 0.5 * float(np.linalg.norm(np.cross(e1, e2)))
    scale = float(np.max(np.abs(v - a))) if v.size else 0.0
    if not area > 1e-14 * scale * scale:
        raise DegenerateTriangle(f"triangle area {area:g} is degenerate")
    s, t, w = _unit_square_collapsed(int(k))
    pts = a + np.outer(s, b - a) + np.outer(s * t, c - b)
    return pts, 2.0 * area * w


def face_quadrature(vertices: np.ndarray, triangles, k: int) -> FaceQuadrature:
    """Concatenate :func:`triangle_rule` over the given triangles, in order."""
    pts, wts = [], []
    for tri in triangles:
        p, w = triangle_rule(k, vertices[list(tri)])
        pts.append(p)
        wts.append(w)
    return FaceQuadrature(np.concatenate(pts), np.concatenate(wts))
