"""Product Chebyshev orthonormal basis on [-1, 1]^3.

Basis functions are ``c * T_a(x) T_b(y) T_c(z)`` over triples with
``a + b + c <= n``, orthonormal for the measure with density
``((1 - x^2)(1 - y^2)(1 - z^2))^(-1/2)``. Triples are kept in graded
lexicographic order so that the degree-d prefix is the degree-d basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError

DOMAIN_TOL = 1e-14
A0 = 1.0 / np.sqrt(np.pi)
AK = np.sqrt(2.0 / np.pi)


def basis_dimension(n: int) -> int:
    """Dimension of trivariate polynomials of total degree <= n."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    return (n + 1) * (n + 2) * (n + 3) // 6


@dataclass(frozen=True)
class MultiIndexSet:
    degree: int
    triples: np.ndarray  # (N, 3) int
    _lookup: dict = field(repr=False, compare=False, default_factory=dict)

    def __len__(self) -> int:
        return len(self.triples)

    def index(self, triple) -> int:
        return self._lookup[tuple(int(t) for t in triple)]

    def normalization(self) -> np.ndarray:
        """Constants c_j = a_alpha a_beta a_gamma making each column unit-norm."""
        a = np.where(self.triples == 0, A0, AK)
        return a.prod(axis=1)


@lru_cache(maxsize=64)
def index_triples(n: int) -> MultiIndexSet:
    """Triples (alpha, beta, gamma) with total degree <= n, graded lex order.

    Within a total degree the ordering is descending lexicographic in
    (alpha, beta), which puts (d, 0, 0) first and (0, 0, d) last.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    triples = [
        (a, b, d - a - b)
        for d in range(n + 1)
        for a in range(d, -1, -1)
        for b in range(d - a, -1, -1)
    ]
    arr = np.array(triples, dtype=int).reshape(-1, 3)
    arr.setflags(write=False)
    return MultiIndexSet(n, arr, {t: j for j, t in enumerate(triples)})


def _check_domain(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + DOMAIN_TOL) or not np.all(np.isfinite(x)):
        bad = x[~(np.abs(x) <= 1.0 + DOMAIN_TOL)].ravel()[0]
        raise DomainError(f"Chebyshev argument {bad!r} outside [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def cheb_values(k_max: int, x) -> np.ndarray:
    """T_0(x) .. T_{k_max}(x) by the three-term recurrence.

    ``x`` may be a scalar or an array; the result has a trailing axis of
    length ``k_max + 1``. Arguments within 1e-14 of the interval are clamped.
    """
    x = _check_domain(x)
    out = np.empty(x.shape + (k_max + 1,))
    out[..., 0] = 1.0
    if k_max >= 1:
        out[..., 1] = x
    for k in range(1, k_max):
        out[..., k + 1] = 2.0 * x * out[..., k] - out[..., k - 1]
    return out


def primitive_values(k_max: int, x) -> np.ndarray:
    """Primitives int_0^x T_k for k = 0 .. k_max (trailing axis).

    ``x`` for k=0, ``x^2/2`` for k=1 and
    ``T_{k+1}/(2(k+1)) - T_{k-1}/(2(k-1))`` for k >= 2.
    """
    x = _check_domain(x)
    t = cheb_values(k_max + 1, x)
    out = np.empty(x.shape + (k_max + 1,))
    out[..., 0] = x
    if k_max >= 1:
        out[..., 1] = 0.5 * x * x
    if k_max >= 2:
        k = np.arange(2, k_max + 1)
        out[..., 2:] = t[..., 3:] / (2.0 * (k + 1)) - t[..., 1:-2] / (2.0 * (k - 1))
    return out


def primitive_eval(alpha: int, x: float) -> float:
    return float(primitive_values(alpha, x)[..., alpha])


def gauss_chebyshev_1d(m: int) -> tuple[np.ndarray, float]:
    """m-point Gauss-Chebyshev rule: nodes cos((2i-1)pi/(2m)), common weight pi/m."""
    if m < 1:
        raise ValueError("need at least one node")
    i = np.arange(1, m + 1)
    return np.cos((2 * i - 1) * np.pi / (2 * m)), np.pi / m


@dataclass(frozen=True)
class BoxRule:
    degree: int
    nodes: np.ndarray  # (nu, 3), x varies fastest
    weights: np.ndarray  # (nu,)

    @property
    def size(self) -> int:
        return len(self.weights)


def box_rule(n: int) -> BoxRule:
    """Tensor Gauss-Chebyshev rule with (n+1)^3 nodes, exact on degree 2n."""
    x, w = gauss_chebyshev_1d(n + 1)
    Z, Y, X = np.meshgrid(x, x, x, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    weights = np.full(len(nodes), w**3)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return BoxRule(n, nodes, weights)


def _product_columns(idx: MultiIndexSet, fx, ty, tz) -> np.ndarray:
    tr = idx.triples
    return idx.normalization() * fx[:, tr[:, 0]] * ty[:, tr[:, 1]] * tz[:, tr[:, 2]]


def vandermonde(n: int, points) -> np.ndarray:
    """Matrix of orthonormal basis values, V[i, j] = phi_j(P_i), shape (nu, N)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    idx = index_triples(n)
    tx, ty, tz = (cheb_values(n, pts[:, d]) for d in range(3))
    return _product_columns(idx, tx, ty, tz)


def primitive_vandermonde(n: int, points, axis: int = 0) -> np.ndarray:
    """Columns c_j * (int_0 T along ``axis``) * T * T at the given points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    idx = index_triples(n)
    f = [cheb_values(n, pts[:, d]) for d in range(3)]
    f[axis] = primitive_values(n, pts[:, axis])
    return _product_columns(idx, *f)


def primitive_basis_eval(triple, c: float, point) -> float:
    """c * int_0^x T_alpha * T_beta(y) * T_gamma(z); its x-derivative is phi_j."""
    a, b, g = (int(t) for t in triple)
    x, y, z = (float(v) for v in point)
    return float(
        c
        * primitive_values(a, x)[a]
        * cheb_values(b, y)[b]
        * cheb_values(g, z)[g]
    )
