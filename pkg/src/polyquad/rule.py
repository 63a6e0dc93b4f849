"""Assembly of polyhedral quadrature rules from cached box data and moments.

The weights are ``w = u * (V @ m)``: u are the box-rule weights, V the
Chebyshev Vandermonde matrix at the box nodes and m the moment vector of the
element. u and V depend only on the degree, so a :class:`RuleCache` builds
them once and every element after that costs a moment computation plus one
matrix-vector product. No factorization or linear solve is involved.

The resulting weights may be negative. Their absolute sum tends to the
volume as the degree grows, which makes the rule stable; for a continuous f
the error is bounded by ``(vol + sum|w|) * E_n(f)`` where ``E_n(f)`` is the
best uniform approximation error of f by degree-n polynomials on the box.
"""

from __future__ import annotations

import csv
import io
import json
import threading
import time
from dataclasses import dataclass

import numpy as np

from .chebyshev import BoxRule, box_rule, vandermonde
from .errors import DegreeCapExceeded, LengthMismatch
from .geometry import Polyhedron, affine_map, bounding_box
from .moments import polyhedron_moments

MAX_DEGREE = 30


@dataclass(frozen=True)
class CacheEntry:
    box: BoxRule
    vandermonde: np.ndarray
    built_at: float


class RuleCache:
    """Per-degree element-independent data, built at most once per degree."""

    def __init__(self):
        self._entries: dict[int, CacheEntry] = {}
        self._lock = threading.Lock()
        self.builds = 0

    def __contains__(self, n: int) -> bool:
        return n in self._entries

    def get(self, n: int) -> CacheEntry:
        entry = self._entries.get(n)
        if entry is not None:
            return entry
        with self._lock:
            entry = self._entries.get(n)
            if entry is None:
                box = box_rule(n)
                V = vandermonde(n, box.nodes)
                V.setflags(write=False)
                entry = CacheEntry(box, V, time.time())
                self._entries[n] = entry
                self.builds += 1
        return entry

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


DEFAULT_CACHE = RuleCache()


@dataclass(frozen=True)
class QuadratureRule:
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    polyhedron_label: str = ""

    @property
    def volume_estimate(self) -> float:
        return float(np.sum(self.weights))

    @property
    def stability_ratio(self) -> float:
        return float(np.sum(np.abs(self.weights)) / self.volume_estimate)

    def __len__(self) -> int:
        return len(self.weights)

    def __call__(self, f) -> float:
        """Integrate a vectorized callable ``f(x, y, z)``."""
        x, y, z = self.nodes.T
        return apply(self, f(x, y, z))

    # serialization

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "label": self.polyhedron_label,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "volume": self.volume_estimate,
            "stability_ratio": self.stability_ratio,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "QuadratureRule":
        nodes = np.array(d["nodes"], dtype=float).reshape(-1, 3)
        weights = np.array(d["weights"], dtype=float)
        if len(nodes) != len(weights):
            raise LengthMismatch(f"{len(nodes)} nodes but {len(weights)} weights")
        return cls(int(d["degree"]), nodes, weights, d.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> "QuadratureRule":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# degree={self.degree} label={self.polyhedron_label}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z", "w"])
        for (x, y, z), wi in zip(self.nodes, self.weights):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(z)), repr(float(wi))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "QuadratureRule":
        lines = text.splitlines()
        degree, label = -1, ""
        if lines and lines[0].startswith("#"):
            for item in lines[0][1:].split():
                key, _, val = item.partition("=")
                if key == "degree":
                    degree = int(val)
                elif key == "label":
                    label = val
            lines = lines[1:]
        rows = list(csv.DictReader(lines))
        data = np.array([[float(r[c]) for c in "xyzw"] for r in rows]).reshape(-1, 4)
        return cls(degree, data[:, :3], data[:, 3], label)


def build_rule(p: Polyhedron, n: int, cache: RuleCache | None = None, threads: int = 1) -> QuadratureRule:
    """Quadrature rule exact for total degree ``n`` on polyhedron ``p``.

    Nodes are the (n+1)^3 tensor Gauss-Chebyshev points scaled to the
    bounding box of ``p``; they are returned in physical coordinates and the
    weights carry the box Jacobian.
    """
    if not 0 <= n <= MAX_DEGREE:
        raise DegreeCapExceeded(f"degree {n} outside supported range [0, {MAX_DEGREE}]")
    cache = DEFAULT_CACHE if cache is None else cache
    amap = affine_map(bounding_box(p))
    m = polyhedron_moments(p, amap, n, threads=threads)
    entry = cache.get(n)
    w_ref = entry.box.weights * (entry.vandermonde @ m.values)
    weights = amap.jacobian * w_ref
    nodes = amap.inverse(entry.box.nodes)
    weights.setflags(write=False)
    nodes.setflags(write=False)
    return QuadratureRule(n, nodes, weights, p.label)


def apply(rule: QuadratureRule, samples) -> float:
    """Sum of weights times samples, samples aligned with ``rule.nodes``."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 0:
        samples = np.full(len(rule), float(samples))
    if samples.shape != rule.weights.shape:
        raise LengthMismatch(f"expected {len(rule)} samples, got {samples.shape}")
    return float(rule.weights @ samples)


@dataclass(frozen=True)
class StabilityReport:
    sum_abs: float
    ratio: float
    negative_count: int
    min_weight: float

    def to_dict(self) -> dict:
        return {
            "sum_abs": self.sum_abs,
            "ratio": self.ratio,
            "negative_count": self.negative_count,
            "min_weight": self.min_weight,
        }


def stability_report(rule: QuadratureRule) -> StabilityReport:
    w = rule.weights
    sum_abs = float(np.sum(np.abs(w)))
    return StabilityReport(
        sum_abs=sum_abs,
        ratio=sum_abs / float(np.sum(w)),
        negative_count=int(np.count_nonzero(w < 0)),
        min_weight=float(np.min(w)),
    )


def error_bound_factor(rule: QuadratureRule, volume: float | None = None) -> float:
    """The computable factor ``vol + sum|w|`` of the uniform error bound.

    For any continuous f on the bounding box,
    ``|int f - Q(f)| <= (vol + sum|w|) * E_n(f)``, and the factor approaches
    ``2 vol`` as the degree increases. ``volume`` defaults to the sum of the
    weights, which equals the volume by exactness on constants.
    """
    vol = rule.volume_estimate if volume is None else float(volume)
    return vol + float(np.sum(np.abs(rule.weights)))
