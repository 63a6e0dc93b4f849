import threading

import numpy as np
import pytest

from polyquad import shapes
from polyquad.chebyshev import basis_dimension, index_triples
from polyquad.errors import DegreeCapExceeded, LengthMismatch
from polyquad.geometry import bounding_box, divergence_volume
from polyquad.oracle import Box, BoxUnion, union_monomial_table
from polyquad.rule import (
    QuadratureRule,
    RuleCache,
    apply,
    build_rule,
    error_bound_factor,
    stability_report,
)

from conftest import monomial_scale

EVEN = range(4, 21, 2)


def scaled_monomial_errors(rule, p, reference, triples):
    """|Q - I| / (vol * max_B |x^a y^b z^c|) for every triple."""
    b = bounding_box(p)
    vol = divergence_volume(p)
    x, y, z = rule.nodes.T
    out = []
    for (a, bb, c), exact in zip(triples, reference):
        q = rule.weights @ (x**a * y**bb * z**c)
        out.append(abs(q - exact) / (vol * monomial_scale(b.lo, b.hi, a, bb, c)))
    return np.array(out)


@pytest.fixture(scope="module")
def monomial_tables():
    triples = index_triples(20).triples
    return {name: shapes.monomial_reference(name, triples) for name in shapes.CORE_SHAPES}


class TestBuildRule:
    @pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 20])
    def test_cube_volume(self, n, cache):
        r = build_rule(shapes.cube(), n, cache)
        assert r.volume_estimate == pytest.approx(8.0, rel=1e-12)
        assert len(r) == (n + 1) ** 3

    def test_tet_volume(self, cache):
        assert build_rule(shapes.tetrahedron(), 4, cache).volume_estimate == pytest.approx(1 / 6, rel=1e-12)

    @pytest.mark.parametrize("n", EVEN)
    def test_lprism_monomials(self, n, cache, monomial_tables):
        p = shapes.lprism()
        N = basis_dimension(n)
        errs = scaled_monomial_errors(build_rule(p, n, cache), p, monomial_tables["lprism"][:N], index_triples(n).triples)
        assert errs.max() <= 1e-11

    @pytest.mark.parametrize("name", shapes.CORE_SHAPES)
    @pytest.mark.parametrize("n", EVEN)
    def test_exactness_suite(self, name, n, cache, core_shapes, monomial_tables):
        p = core_shapes[name]
        N = basis_dimension(n)
        errs = scaled_monomial_errors(build_rule(p, n, cache), p, monomial_tables[name][:N], index_triples(n).triples)
        assert errs.max() <= 1e-11

    @pytest.mark.parametrize("name", shapes.CORE_SHAPES)
    def test_nodes_in_box_and_volume_consistency(self, name, cache, core_shapes):
        p = core_shapes[name]
        b = bounding_box(p)
        vol = divergence_volume(p)
        for n in (3, 12):
            r = build_rule(p, n, cache)
            assert np.all(r.nodes > b.lo) and np.all(r.nodes < b.hi)
            assert abs(r.volume_estimate - vol) <= 1e-12 * vol
            assert r.stability_ratio >= 1 - 1e-10

    def test_degree_cap(self):
        with pytest.raises(DegreeCapExceeded):
            build_rule(shapes.cube(), 31)
        with pytest.raises(DegreeCapExceeded):
            build_rule(shapes.cube(), -1)

    @pytest.mark.parametrize("n", [4, 12, 20])
    def test_affine_covariance(self, n, cache):
        s, t = 2.5, np.array([-3.0, 1.0, 7.0])
        p = shapes.lprism().transformed(lambda v: s * v + t)
        union = BoxUnion.of(
            Box(tuple(t), tuple(s * np.array([2, 1, 1]) + t)),
            Box(tuple(s * np.array([0, 1, 0]) + t), tuple(s * np.array([1, 2, 1]) + t)),
        )
        triples = index_triples(n).triples
        errs = scaled_monomial_errors(build_rule(p, n, cache), p, union_monomial_table(union, triples), triples)
        assert errs.max() <= 1e-11
        assert build_rule(p, n, cache).volume_estimate == pytest.approx(3 * s**3, rel=1e-12)


class TestApply:
    def test_constants(self, cache):
        r = build_rule(shapes.lprism(), 6, cache)
        assert apply(r, np.ones(len(r))) == pytest.approx(3.0, rel=1e-12)
        assert apply(r, np.zeros(len(r))) == 0.0

    @pytest.mark.parametrize("n", [3, 4, 9])
    def test_xyz_on_unit_cube(self, n, cache):
        r = build_rule(shapes.box((0, 0, 0), (1, 1, 1)), n, cache)
        x, y, z = r.nodes.T
        assert apply(r, x * y * z) == pytest.approx(0.125, abs=1e-12)

    def test_length_mismatch(self, cache):
        r = build_rule(shapes.cube(), 2, cache)
        with pytest.raises(LengthMismatch):
            apply(r, np.ones(len(r) - 1))

    def test_callable(self, cache):
        r = build_rule(shapes.cube(), 4, cache)
        assert r(lambda x, y, z: x**2 * z**2) == pytest.approx(8 / 9, rel=1e-13)


class TestStability:
    @pytest.mark.parametrize("name", shapes.CORE_SHAPES)
    def test_ratio_at_least_one(self, name, cache, core_shapes):
        for n in EVEN:
            rep = stability_report(build_rule(core_shapes[name], n, cache))
            assert rep.ratio >= 1 - 1e-10

    def test_lprism_trend(self, cache):
        r4 = stability_report(build_rule(shapes.lprism(), 4, cache))
        r20 = stability_report(build_rule(shapes.lprism(), 20, cache))
        assert r20.ratio <= r4.ratio <= 3
        assert r4.negative_count > 0  # negative weights are reported, not clipped
        assert r4.min_weight < 0

    def test_report_fields(self, cache):
        r = build_rule(shapes.hull20(), 6, cache)
        rep = stability_report(r)
        assert rep.sum_abs == pytest.approx(np.abs(r.weights).sum())
        assert rep.ratio == pytest.approx(r.stability_ratio, rel=1e-15)
        assert rep.negative_count == np.count_nonzero(r.weights < 0)

    @pytest.mark.parametrize("n", [2, 8, 16])
    def test_error_bound_factor_cube(self, n, cache):
        r = build_rule(shapes.cube(), n, cache)
        f = error_bound_factor(r, 8.0)
        sum_abs = np.abs(r.weights).sum()
        assert 16 - 1e-9 <= f <= 16 + sum_abs - 8 + 1e-12
        assert f == pytest.approx(8.0 * (1 + r.stability_ratio), rel=1e-14)

    def test_error_bound_factor_lprism(self, cache):
        r = build_rule(shapes.lprism(), 20, cache)
        assert 6 <= error_bound_factor(r) <= 12
        assert error_bound_factor(r) == pytest.approx(r.volume_estimate * (1 + r.stability_ratio), rel=1e-14)


class TestCache:
    def test_transparency(self):
        shared = RuleCache()
        a1 = build_rule(shapes.lprism(), 10, shared)
        b1 = build_rule(shapes.hull20(), 10, shared)
        a2 = build_rule(shapes.lprism(), 10, RuleCache())
        b2 = build_rule(shapes.hull20(), 10, RuleCache())
        assert np.array_equal(a1.weights, a2.weights) and np.array_equal(a1.nodes, a2.nodes)
        assert np.array_equal(b1.weights, b2.weights) and np.array_equal(b1.nodes, b2.nodes)
        assert shared.builds == 1

    def test_build_once_under_race(self):
        cache = RuleCache()
        barrier = threading.Barrier(6)
        got = []

        def worker():
            barrier.wait()
            got.append(cache.get(8))

        threads = [threading.Thread(target=worker) for _ in range(6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert cache.builds == 1
        assert all(e is got[0] for e in got)


class TestSerialization:
    def test_json_round_trip_bitwise(self, cache):
        r = build_rule(shapes.hull20(), 8, cache)
        back = QuadratureRule.from_json(r.to_json())
        assert np.array_equal(back.weights, r.weights) and np.array_equal(back.nodes, r.nodes)
        samples = np.sin(r.nodes).sum(axis=1)
        assert apply(back, samples) == apply(r, samples)
        d = r.to_dict()
        assert {"degree", "nodes", "weights", "volume", "stability_ratio"} <= set(d)

    def test_csv_round_trip_bitwise(self, cache):
        r = build_rule(shapes.tetrahedron(), 5, cache)
        back = QuadratureRule.from_csv(r.to_csv())
        assert back.degree == 5 and back.polyhedron_label == "tet"
        assert np.array_equal(back.weights, r.weights) and np.array_equal(back.nodes, r.nodes)

    def test_mismatched_json(self):
        with pytest.raises(LengthMismatch):
            QuadratureRule.from_dict({"degree": 1, "nodes": [[0, 0, 0]], "weights": [1.0, 2.0]})
