from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from monocone.errors import DimensionTooLarge, EmptySet, NotMember
from monocone.fixtures import kx_box
from monocone.maxquad import MaxQuadFunction
from monocone.operators import MaxQuadSubdiff, from_json, graph_pieces, graph_sample, SampleConfig
from monocone.polyhedral import (
    HPolyhedron, PolyCone, cone_contains, cone_polar, regular_normal_cone, regular_normal_cone_union,
    support_min, vertex_ray_enumerate,
)
from monocone.strata import (
    FaceSignature, limiting_family, limiting_normal_cone_union, local_strata, signature_realizable_near,
)

small = st.integers(-3, 3)


def abs_pieces():
    f = MaxQuadFunction.make([([[0]], [1], 0), ([[0]], [-1], 0)])
    return list(graph_pieces(MaxQuadSubdiff(f)))


def cone_of(*rays, dim=2):
    return PolyCone.from_generators(rays, (), dim)


# -- regular normal cones ---------------------------------------------------

def test_halfline_normal():
    P = HPolyhedron.make([[1]], [0])
    assert regular_normal_cone(P, [0]).same_as(cone_of((1,), dim=1))


def test_square_vertex_normal():
    P = HPolyhedron.box([0, 0], [1, 1])
    assert regular_normal_cone(P, [0, 0]).same_as(cone_of((-1, 0), (0, -1)))


def test_affine_box_graph_normal():
    P = HPolyhedron.make([[1, -1], [-1, 1]], [0, 1])  # 0 <= v - u <= 1
    assert regular_normal_cone(P, [0, 0]).same_as(cone_of((1, -1)))


def test_regular_normal_not_member():
    with pytest.raises(NotMember):
        regular_normal_cone(HPolyhedron.box([0], [1]), [2])


def test_union_cone_at_corner_is_intersection():
    left = HPolyhedron.make([[1, 0]], [0], [[0, 1]], [-1])      # {(u,-1): u <= 0}
    seg = HPolyhedron.make([[0, 1], [0, -1]], [1, 1], [[1, 0]], [0])  # {0} x [-1,1]
    x = (0, -1)
    C = regular_normal_cone_union([left, seg], x)
    assert regular_normal_cone(left, x).contains_cone(C)
    assert regular_normal_cone(seg, x).contains_cone(C)
    assert C.same_as(cone_of((1, 0), (0, -1)))


def test_union_single_piece_and_inactive():
    P = HPolyhedron.box([0, 0], [1, 1])
    Q = HPolyhedron.box([5, 5], [6, 6])
    assert regular_normal_cone_union([P], (0, 0)).same_as(regular_normal_cone(P, (0, 0)))
    assert regular_normal_cone_union([P, Q], (0, F(1, 2))).same_as(regular_normal_cone(P, (0, F(1, 2))))


# -- limiting cones -----------------------------------------------------------

def test_limiting_abs_origin():
    pieces = abs_pieces()
    cones = limiting_normal_cone_union(pieces, (0, 0))
    assert any(c.contains((1, 0)) for c in cones)
    assert any(c.contains((-1, 0)) for c in cones)
    # the rays sit at v = +-1, so they do not reach the origin
    assert not any(c.contains((0, 1)) or c.contains((0, -1)) for c in cones)


def test_limiting_at_facet_is_regular():
    pieces = abs_pieces()
    x = (F(-1, 2), -1)
    fam = limiting_family(pieces, x)
    assert len(fam) == 1
    assert fam[0][1].same_as(regular_normal_cone_union(pieces, x))


def test_limiting_interior_is_zero():
    P = HPolyhedron.make([[1, -1], [-1, 1]], [0, 1])
    cones = limiting_normal_cone_union([P], (0, F(1, 2)))
    assert len(cones) == 1 and cones[0].is_zero_cone()


def test_signature_realizability():
    pieces = abs_pieces()
    right = [i for i, P in enumerate(pieces) if P.contains((1, 1))][0]
    seg = [i for i, P in enumerate(pieces) if P.contains((0, F(1, 2)))][0]
    right_only = FaceSignature(tuple(frozenset() if i == right else None for i in range(len(pieces))))
    seg_interior = FaceSignature(tuple(frozenset() if i == seg else None for i in range(len(pieces))))
    assert not signature_realizable_near(pieces, (0, 0), right_only)
    assert signature_realizable_near(pieces, (0, 0), seg_interior)
    assert signature_realizable_near(pieces, (0, 0), FaceSignature.of(pieces, (0, 0)))


# -- support, polarity, enumeration -------------------------------------------

def test_support_min_examples():
    val, x = support_min(HPolyhedron.box([0, 0], [1, 1]), (1, 1))
    assert val == 0 and x == (0, 0)
    val, _ = support_min(cone_of((1, -1)), (1, 1))
    assert val == 0
    val, _ = support_min(HPolyhedron.point((3,)), (2,))
    assert val == 6


def test_support_min_unbounded_and_empty():
    val, ray = support_min(HPolyhedron.make([[1]], [0]), (1,))
    assert val is None and ray[0] < 0
    with pytest.raises(EmptySet):
        support_min(HPolyhedron.make([[1], [-1]], [0, -1]), (1,))


def test_polar_examples():
    orthant = PolyCone.from_halfspaces([(-1, 0), (0, -1)])
    assert cone_polar(orthant).same_as(PolyCone.from_halfspaces([(1, 0), (0, 1)]))
    C = cone_of((1, 2))
    assert cone_polar(cone_polar(C)).same_as(C)
    assert cone_contains(C, (2, 4)) and not cone_contains(C, (2, 3))


def test_vertex_enumeration_square():
    vr = vertex_ray_enumerate(HPolyhedron.box([0, 0], [1, 1]))
    assert len(vr.vertices) == 4 and not vr.rays


def test_vertex_enumeration_dimension_limit():
    with pytest.raises(DimensionTooLarge):
        vertex_ray_enumerate(HPolyhedron.box([0] * 5, [1] * 5))


@given(st.lists(st.tuples(small, small, small), min_size=1, max_size=4))
def test_polarity_involution(rays):
    rays = [r for r in rays if any(r)]
    if not rays:
        return
    C = PolyCone.from_generators(rays, (), 3)
    assert cone_polar(cone_polar(C)).same_as(C)
    for r in rays:
        assert C.contains(r)


@given(st.lists(st.tuples(small, small, st.integers(1, 4)), min_size=0, max_size=4), small, small)
def test_support_min_matches_vertices(rows, w1, w2):
    A = [(a, b) for a, b, _ in rows] + [(1, 0), (-1, 0), (0, 1), (0, -1)]
    b = [c for _, _, c in rows] + [2, 2, 2, 2]
    P = HPolyhedron.make(A, b)
    vr = vertex_ray_enumerate(P)
    val, _ = support_min(P, (w1, w2))
    assert val == min(w1 * v[0] + w2 * v[1] for v in vr.vertices)


FIXTURE_SPECS = [kx_box(1), {"dim": 1, "variant": "MaxQuadSubdiff", "function": {
    "pieces": [{"Q": [[0]], "c": [1], "d": 0}, {"Q": [[0]], "c": [-1], "d": 0}]}}]


@pytest.mark.parametrize("spec", FIXTURE_SPECS)
def test_regular_inside_limiting_and_slice_consistency(spec):
    T = from_json(spec)
    pieces = graph_pieces(T)
    for p in graph_sample(T, SampleConfig.make([(-2, 2)], 9)):
        x = p.u + p.v
        reg = regular_normal_cone_union(pieces, x)
        fam = [c for _, c in limiting_family(pieces, x)]
        # a convex regular cone lies in the union iff it lies in one member
        # of the family here (the family contains the regular cone itself)
        assert any(c.contains_cone(reg) for c in fam)
        for st_ in local_strata(pieces, x):
            assert max(abs(a - b) for a, b in zip(st_.witness, x)) <= F(1, 10 ** 6)
            assert FaceSignature.of(pieces, st_.witness) == st_.signature
