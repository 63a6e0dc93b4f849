"""Accuracy, stability and timing diagnostics behind ``polyquad check`` / ``bench``."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np

from . import shapes
from .geometry import Polyhedron, affine_map, bounding_box, divergence_volume, triangulate_face
from .moments import moments_crosscheck
from .oracle import convex_integral, is_convex
from .rule import RuleCache, build_rule
from .triangle_quadrature import face_quadrature

#: relative errors below this are logged at this value (exact results give log 0)
ERROR_FLOOR = 1e-17


def orthonormality_residual(n: int, cache: RuleCache | None = None) -> float:
    """max |V^T diag(u) V - I| for the cached box data of degree n."""
    entry = (cache or RuleCache()).get(n)
    V, u = entry.vandermonde, entry.box.weights
    G = V.T @ (u[:, None] * V)
    return float(np.max(np.abs(G - np.eye(G.shape[0]))))


def surface_reference(p: Polyhedron, coeffs, n: int) -> float:
    """Integral of (a x + b y + c z + d)^n by the divergence theorem.

    The exact antiderivative L^(n+1) / ((n+1) a_k) is taken along the axis
    whose coefficient is largest in magnitude, and integrated exactly over
    every face. Used for shapes with no box-union or convex oracle.
    """
    coeffs = np.asarray(coeffs, float)
    axis = int(np.argmax(np.abs(coeffs[:3])))
    k = math.ceil((n + 3) / 2)
    total = 0.0
    for fi, face in enumerate(p.faces):
        nk = face.unit_normal[axis]
        if abs(nk) <= 1e-14:
            continue
        fq = face_quadrature(p.vertices, triangulate_face(p, fi).triangles, k)
        lin = fq.points @ coeffs[:3] + coeffs[3]
        total += nk * (fq.weights @ lin ** (n + 1))
    return total / ((n + 1) * coeffs[axis])


def reference_for(p: Polyhedron) -> tuple[str, Callable[[np.ndarray, int], float]]:
    """Pick an independent reference for linear-power integrands on ``p``."""
    name = shapes.identify(p)
    if name is not None:
        integ = shapes.reference_integrator(name, p)
        kind = "box-union" if name in shapes.BOX_UNIONS else "convex-cones"
    elif is_convex(p):
        kind, integ = "convex-cones", lambda f, deg: convex_integral(p, f, deg)
    else:
        return "surface-primitive", lambda c, n: surface_reference(p, c, n)

    def ref(c, n):
        a, b, cc, d = c
        return integ(lambda x, y, z: (a * x + b * y + cc * z + d) ** n, n)

    return kind, ref


def random_linear_powers(n: int, samples: int, seed: int) -> np.ndarray:
    """Coefficients (a, b, c, d) uniform in [-1, 1], one row per integrand."""
    return np.random.default_rng([seed, n]).uniform(-1.0, 1.0, size=(samples, 4))


@dataclass
class CheckRow:
    n: int
    stability_ratio: float
    negative_weights: int
    volume_residual: float
    orthonormality_residual: float
    crosscheck_residual: float
    mean_log_err: float
    max_err: float


def check_shape(
    p: Polyhedron,
    degrees: Iterable[int],
    samples: int = 200,
    seed: int = 0,
    cache: RuleCache | None = None,
    threads: int = 1,
) -> tuple[str, list[CheckRow]]:
    cache = RuleCache() if cache is None else cache
    kind, ref = reference_for(p)
    vol = divergence_volume(p)
    amap = affine_map(bounding_box(p))
    rows = []
    for n in degrees:
        rule = build_rule(p, n, cache, threads=threads)
        x, y, z = rule.nodes.T
        errs = []
        for a, b, c, d in random_linear_powers(n, samples, seed):
            exact = ref((a, b, c, d), n)
            approx = rule.weights @ (a * x + b * y + c * z + d) ** n
            errs.append(max(abs(approx - exact) / abs(exact), ERROR_FLOOR))
        w = rule.weights
        rows.append(
            CheckRow(
                n=n,
                stability_ratio=rule.stability_ratio,
                negative_weights=int(np.count_nonzero(w < 0)),
                volume_residual=abs(rule.volume_estimate - vol) / vol,
                orthonormality_residual=orthonormality_residual(n, cache),
                crosscheck_residual=moments_crosscheck(p, amap, n),
                mean_log_err=float(np.mean(np.log10(errs))),
                max_err=float(np.max(errs)),
            )
        )
    return kind, rows


def rows_to_csv(rows, fields) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        d = asdict(r) if not isinstance(r, dict) else r
        w.writerow([repr(d[f]) if isinstance(d[f], float) else d[f] for f in fields])
    return buf.getvalue()


@dataclass
class BenchRow:
    n: int
    cold_mean_s: float
    warm_mean_s: float
    warm_over_cold: float


def bench_shape(p: Polyhedron, degrees: Iterable[int], repeats: int = 3, threads: int = 1) -> list[BenchRow]:
    """Mean wall time of build_rule with an empty cache and with a primed cache."""
    rows = []
    for n in degrees:
        cold = []
        for _ in range(repeats):
            cache = RuleCache()
            t0 = time.perf_counter()
            build_rule(p, n, cache, threads=threads)
            cold.append(time.perf_counter() - t0)
        warm_cache = RuleCache()
        warm_cache.get(n)
        warm = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            build_rule(p, n, warm_cache, threads=threads)
            warm.append(time.perf_counter() - t0)
        cold_mean, warm_mean = float(np.mean(cold)), float(np.mean(warm))
        rows.append(BenchRow(n, cold_mean, warm_mean, warm_mean / cold_mean))
    return rows
