import json

import numpy as np
import pytest
from numpy.polynomial.chebyshev import Chebyshev

from polyquad import shapes
from polyquad.chebyshev import index_triples
from polyquad.geometry import affine_map, bounding_box, divergence_volume
from polyquad.moments import MomentVector, face_rule_order, moments_crosscheck, polyhedron_moments

C000 = np.pi**-1.5


def cheb_interval_integral(k, lo, hi):
    """int_lo^hi T_k via numpy's Chebyshev antiderivative (independent of our primitives)."""
    anti = Chebyshev.basis(k).integ()
    return anti(hi) - anti(lo)


def box_moments(lo, hi, n):
    idx = index_triples(n)
    c = idx.normalization()
    return np.array(
        [c[j] * np.prod([cheb_interval_integral(k, lo[d], hi[d]) for d, k in enumerate(t)]) for j, t in enumerate(idx.triples)]
    )


def moments_of(p, n, **kw):
    return polyhedron_moments(p, affine_map(bounding_box(p)), n, **kw).values


class TestCube:
    def test_constant(self):
        m = moments_of(shapes.cube(), 4)
        assert m[0] == pytest.approx(8 * C000, rel=1e-14)
        assert 8 * C000 == pytest.approx(1.4366969770013325, rel=1e-15)

    def test_odd_indices_vanish(self):
        m = moments_of(shapes.cube(), 10)
        odd = np.any(index_triples(10).triples % 2 == 1, axis=1)
        assert np.max(np.abs(m[odd])) <= 1e-13

    def test_t2(self):
        n = 4
        m = moments_of(shapes.cube(), n)
        expected = np.sqrt(2) * C000 * cheb_interval_integral(2, -1, 1) * 2 * 2
        assert cheb_interval_integral(2, -1, 1) == pytest.approx(-2 / 3, rel=1e-15)
        assert m[index_triples(n).index((2, 0, 0))] == pytest.approx(expected, abs=1e-14)

    def test_matches_box_oracle(self):
        assert np.max(np.abs(moments_of(shapes.cube(), 12) - box_moments((-1,) * 3, (1,) * 3, 12))) <= 1e-13


class TestBoxOracle:
    @pytest.mark.parametrize("n", [0, 3, 8, 15, 20])
    def test_sub_boxes_of_lprism_frame(self, n):
        amap = affine_map(bounding_box(shapes.lprism()))
        for lo, hi in [((0, 0, 0), (2, 1, 1)), ((0, 1, 0), (1, 2, 1)), ((0.25, 0.5, 0.1), (1.5, 1.75, 0.6))]:
            p = shapes.box(lo, hi)
            m = polyhedron_moments(p, amap, n).values
            ref = box_moments(amap.forward(lo), amap.forward(hi), n)
            assert np.max(np.abs(m - ref)) <= 1e-13

    @pytest.mark.parametrize("n", [2, 10, 20])
    def test_additivity(self, n):
        amap = affine_map(bounding_box(shapes.lprism()))
        whole = polyhedron_moments(shapes.lprism(), amap, n).values
        parts = sum(polyhedron_moments(shapes.box(lo, hi), amap, n).values for lo, hi in [((0, 0, 0), (2, 1, 1)), ((0, 1, 0), (1, 2, 1))])
        assert np.max(np.abs(whole - parts)) <= 1e-12


class TestCrossCheck:
    def test_cube(self):
        p = shapes.cube()
        assert moments_crosscheck(p, affine_map(bounding_box(p)), 6) <= 1e-13

    def test_lprism(self):
        p = shapes.lprism()
        assert moments_crosscheck(p, affine_map(bounding_box(p)), 10) <= 1e-12

    @pytest.mark.parametrize("name", shapes.CORE_SHAPES)
    def test_degree_zero(self, name):
        p = shapes.builtin_shape(name)
        amap = affine_map(bounding_box(p))
        vol_ref = divergence_volume(p) / amap.jacobian
        mx = polyhedron_moments(p, amap, 0, axis=0).values[0]
        my = polyhedron_moments(p, amap, 0, axis=1).values[0]
        assert mx == pytest.approx(C000 * vol_ref, abs=1e-13)
        assert my == pytest.approx(C000 * vol_ref, abs=1e-13)

    @pytest.mark.parametrize("name", shapes.CORE_SHAPES)
    def test_direction_independence(self, name):
        p = shapes.builtin_shape(name)
        amap = affine_map(bounding_box(p))
        for n in range(0, 21):
            assert moments_crosscheck(p, amap, n) <= 1e-12


class TestInvariants:
    @pytest.mark.parametrize("name", shapes.CORE_SHAPES)
    def test_first_moment_is_scaled_volume(self, name):
        p = shapes.builtin_shape(name)
        amap = affine_map(bounding_box(p))
        vol_ref = divergence_volume(p.mapped(amap))
        m = polyhedron_moments(p, amap, 8)
        assert m.values[0] == pytest.approx(C000 * vol_ref, rel=1e-12)
        assert np.all(np.isfinite(m.values))

    @pytest.mark.parametrize("name", shapes.CORE_SHAPES)
    def test_constant_shift_of_primitive(self, name):
        # adding a constant to every Phi adds const * sum_f n1_f area_f, which vanishes
        ref = shapes.builtin_shape(name).mapped(affine_map(bounding_box(shapes.builtin_shape(name))))
        for const in (1.0, -3.5, 10.0):
            shift = const * sum(f.unit_normal[0] * f.area for f in ref.faces)
            assert abs(shift) <= 1e-13

    def test_threads_do_not_change_result(self):
        p = shapes.hull760()
        serial = moments_of(p, 10)
        parallel = moments_of(p, 10, threads=4)
        assert np.array_equal(serial, parallel)

    def test_face_rule_order(self):
        for n in range(0, 31):
            k = face_rule_order(n)
            assert 2 * k - 2 >= n + 1

    def test_json_round_trip(self):
        m = polyhedron_moments(shapes.tetrahedron(), affine_map(bounding_box(shapes.tetrahedron())), 5)
        d = json.loads(m.to_json())
        assert set(d) == {"degree", "triples", "values"}
        back = MomentVector.from_dict(d)
        assert np.array_equal(back.values, m.values)
