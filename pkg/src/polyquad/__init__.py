"""Cheap and stable quadrature on polyhedral elements.

Rules of polynomial exactness ``n`` are supported on the tensor
Gauss-Chebyshev grid of the element's bounding box. Their weights are one
matrix-vector product between an element-independent Chebyshev Vandermonde
matrix and the element's Chebyshev moments, which are computed by the
divergence theorem over the faces.

>>> from polyquad import shapes, build_rule
>>> rule = build_rule(shapes.lprism(), 8)
>>> round(rule.volume_estimate, 12)
3.0
"""

from .chebyshev import (
    basis_dimension,
    box_rule,
    cheb_values,
    gauss_chebyshev_1d,
    index_triples,
    primitive_basis_eval,
    primitive_eval,
    vandermonde,
)
from .geometry import (
    AffineMap,
    BoundingBox,
    Polyhedron,
    affine_map,
    bounding_box,
    divergence_volume,
    load_off,
    read_off,
    triangulate_face,
    validate,
    write_off,
)
from .moments import MomentVector, moments_crosscheck, polyhedron_moments
from .rule import (
    QuadratureRule,
    RuleCache,
    apply,
    build_rule,
    error_bound_factor,
    stability_report,
)

__version__ = "0.1.0"
