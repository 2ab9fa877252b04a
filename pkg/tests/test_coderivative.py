from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from monocone.coderivative import (
    LIMITING, REGULAR, coderivative, coderivative_shift, limiting_coderivative, regular_coderivative,
    second_order_combined, second_order_limiting,
)
from monocone.errors import NotOnGraph
from monocone.fixtures import FIXTURES
from monocone.maxquad import MaxQuadFunction
from monocone.operators import (
    AffineBox, Inverse, MaxQuadSubdiff, SampleConfig, from_json, graph_sample, is_compilable, shift,
)
from monocone.smooth import RationalMap

ABS_F = MaxQuadFunction.make([([[0]], [1], 0), ([[0]], [-1], 0)])
ABS = MaxQuadSubdiff(ABS_F)
POLY_FIXTURES = [f for f in FIXTURES if f.analysis == "check-maximal" and is_compilable(from_json(f.spec))]


def kx(k):
    return AffineBox.make([[k]], [0], [0], [1])


def grid(n, lo=-4, hi=4, step=F(1, 2)):
    axis = [lo + k * step for k in range(int((hi - lo) / step) + 1)]
    return list(product(axis, repeat=n))


def same_set(a, b, n):
    if a.is_empty() or b.is_empty():
        return a.is_empty() == b.is_empty()
    dirs = [tuple(s if i == j else 0 for j in range(n)) for i in range(n) for s in (1, -1)]
    if any(a.support_min(d)[0] != b.support_min(d)[0] for d in dirs):
        return False
    return all(a.contains(z) == b.contains(z) for z in grid(n))


def points(val):
    return set(val.value.points) if val.value.kind == "points" else None


# -- examples -------------------------------------------------------------------

@pytest.mark.parametrize("kind", [REGULAR, LIMITING])
@pytest.mark.parametrize("p, w, expected", [
    (((0,), (F(1, 2),)), (0,), {(0,)}),
    (((0,), (F(1, 2),)), (1,), set()),
    (((0,), (0,)), (1,), {(1,)}),
    (((0,), (1,)), (-1,), {(-1,)}),
    (((0,), (0,)), (-1,), set()),
])
def test_kx_box_table(kind, p, w, expected):
    val = coderivative(kx(1), p, w, kind)
    assert val.exact
    if not expected:
        assert val.is_empty()
    else:
        (z,) = expected
        assert val.contains(z)
        assert val.support_min((1,))[0] == z[0] == -val.support_min((-1,))[0]


@given(st.fractions(-5, 5, max_denominator=9), st.fractions(-5, 5, max_denominator=9))
def test_identity(u, w):
    T = RationalMap(["x"])
    for kind in (REGULAR, LIMITING):
        assert points(coderivative(T, ((u,), (u,)), (w,), kind)) == {(w,)}


def test_neg_reciprocal_adjoint():
    T = RationalMap(["-1/x"])
    assert points(regular_coderivative(T, ((2,), (F(-1, 2),)), (3,))) == {(F(3, 4),)}
    assert points(limiting_coderivative(T, ((2,), (F(-1, 2),)), (3,))) == {(F(3, 4),)}


def test_not_on_graph():
    with pytest.raises(NotOnGraph):
        regular_coderivative(kx(1), ((0,), (2,)), (1,))
    with pytest.raises(NotOnGraph):
        regular_coderivative(RationalMap(["x"]), ((1,), (2,)), (1,))
    with pytest.raises(NotOnGraph):
        limiting_coderivative(ABS, ((0,), (2,)), (1,))


def test_abs_at_origin_is_vertical_line():
    # near (0,0) the graph is the segment {0} x [-1,1]
    for kind in (REGULAR, LIMITING):
        assert coderivative(ABS, ((0,), (0,)), (0,), kind).contains((7,))
        assert coderivative(ABS, ((0,), (0,)), (1,), kind).is_empty()


def test_abs_corner():
    # at (0,1): regular normals {x <= 0, y >= 0}; limiting adds both axes
    p = ((0,), (1,))
    reg = lambda w: regular_coderivative(ABS, p, (w,))
    lim = lambda w: limiting_coderivative(ABS, p, (w,))
    assert reg(1).is_empty()
    assert points(lim(1)) == {(0,)} or (lim(1).contains((0,)) and lim(1).support_min((1,))[0] == 0
                                        and lim(1).support_min((-1,))[0] == 0)
    assert reg(0).contains((-3,)) and not reg(0).contains((3,))
    assert lim(0).contains((-3,)) and lim(0).contains((3,))
    assert reg(-1).contains((-2,)) and not reg(-1).contains((1,))
    assert lim(-1).contains((-2,)) and not lim(-1).contains((1,))


def test_abs_interior_of_vertical_segment():
    val = regular_coderivative(ABS, ((0,), (F(1, 2),)), (0,))
    assert val.contains((5,)) and val.contains((-5,))
    assert regular_coderivative(ABS, ((0,), (F(1, 2),)), (1,)).is_empty()


def test_second_order_c2():
    f = MaxQuadFunction.make([([[2]], [0], 0)])
    assert points(second_order_combined(f, ((1,), (2,)), (5,))) == {(10,)}
    assert points(second_order_limiting(f, ((1,), (2,)), (5,))) == {(10,)}


def test_second_order_shared_q():
    Q = [[2, 1], [1, 3]]
    f = MaxQuadFunction.make([(Q, [1, 0], 0), (Q, [0, 1], 0)])
    u = (2, 0)  # first affine part strictly active
    v = (5, 2)
    w = (1, -1)
    val = second_order_combined(f, (u, v), w)
    assert val.contains((1, -2))
    assert val.support_min((1, 0))[0] == 1 and val.support_min((0, -1))[0] == 2


# -- invariants -----------------------------------------------------------------

def fixture_samples(T, count):
    n = T.dim
    pts = graph_sample(T, SampleConfig.make([(-2, 2)] * n, 5 if n == 1 else 3, seed=1, jitter=0.3))
    rng = np.random.default_rng(0)
    idx = rng.integers(0, len(pts), size=count)
    return [pts[i] for i in idx]


def directions(n):
    return [w for w in product((-1, 0, 1, 2), repeat=n)]


def test_regular_in_limiting_all_fixtures():
    checked = 0
    for fx in POLY_FIXTURES:
        T = from_json(fx.spec)
        n = T.dim
        for p in fixture_samples(T, 20):
            for w in directions(n)[:6]:
                reg = regular_coderivative(T, p, w)
                lim = limiting_coderivative(T, p, w)
                if not reg.is_empty():
                    assert lim.contains(reg.value.any_point())
                    assert all(lim.contains(z) for z in grid(n, -2, 2, 1) if reg.contains(z))
                checked += 1
    assert checked > 300


@pytest.mark.parametrize("kind", [REGULAR, LIMITING])
def test_graph_swap_symmetry(kind):
    for fx in POLY_FIXTURES:
        T = from_json(fx.spec)
        n = T.dim
        for p in fixture_samples(T, 6):
            for w in directions(n)[:5]:
                val = coderivative(T, p, w, kind)
                for z in grid(n, -2, 2, 1) if n == 1 else grid(n, -1, 1, 1):
                    inv = coderivative(Inverse(T), (p.v, p.u), tuple(-x for x in z), kind)
                    assert val.contains(z) == inv.contains(tuple(-x for x in w))


@pytest.mark.parametrize("fx", POLY_FIXTURES, ids=lambda f: f.name)
def test_shift_rule_matches_direct(fx):
    T = from_json(fx.spec)
    n = T.dim
    rng = np.random.default_rng(7)
    base = fixture_samples(T, 100)
    for k, p in enumerate(base):
        s = F(int(rng.integers(-3, 4)), 2)
        w = tuple(F(int(x)) for x in rng.integers(-2, 3, size=n))
        v = tuple(b + s * a for a, b in zip(p.u, p.v))
        kind = REGULAR if k % 2 else LIMITING
        rule = coderivative_shift(T, s, (p.u, v), w, kind)
        direct = coderivative(shift(T, s), (p.u, v), w, kind)
        assert same_set(rule.value, direct.value, n)


def test_shift_zero_is_identity():
    for p in fixture_samples(ABS, 10):
        for w in (-1, 0, 1):
            assert same_set(coderivative_shift(ABS, 0, p, (w,)).value, regular_coderivative(ABS, p, (w,)).value, 1)


def test_kx_box_as_shifted_constant_box():
    for u, t, w in product((-1, 0, F(1, 3)), (0, F(1, 2), 1), (-1, 0, 2)):
        v = u + t
        a = regular_coderivative(kx(1), ((u,), (v,)), (w,))
        b = coderivative_shift(kx(0), 1, ((u,), (v,)), (w,))
        assert same_set(a.value, b.value, 1)


def test_shift_rule_abs_example():
    rule = coderivative_shift(ABS, 1, ((0,), (1,)), (1,))
    direct = regular_coderivative(shift(ABS, 1), ((0,), (1,)), (1,))
    base = regular_coderivative(ABS, ((0,), (1,)), (1,))
    assert same_set(rule.value, direct.value, 1)
    assert same_set(rule.value, base.value.translate((1,)), 1)


@settings(max_examples=30)
@given(st.lists(st.integers(-20, 20).filter(lambda k: k != 0), min_size=2, max_size=2),
       st.lists(st.integers(-5, 5), min_size=2, max_size=2))
def test_smooth_finite_differences(u, w):
    T = RationalMap(["x1*x2 - 1/x1", "x2**3/(1 + x1**2)"])
    u = tuple(F(k, 4) for k in u)
    z = np.array([float(c) for c in next(iter(points(regular_coderivative(T, (u, T(u)), w))))])
    h = 1e-5
    uf = np.array([float(x) for x in u])
    def g(x):  # same map written directly in floats
        return np.array([x[0] * x[1] - 1 / x[0], x[1] ** 3 / (1 + x[0] ** 2)])

    fd = []
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd.append((np.dot(g(uf + e), w) - np.dot(g(uf - e), w)) / (2 * h))
    fd = np.array(fd)
    assert np.linalg.norm(fd - z) <= 1e-6 * max(1.0, np.linalg.norm(z))


def test_sampled_limiting_superset():
    f = MaxQuadFunction.make([([[2, 0], [0, 1]], [0, 0], 0), ([[1, 0], [0, 3]], [0, 0], 0)])
    T = MaxQuadSubdiff(f)
    assert not is_compilable(T)
    w = (1, 2)
    val = limiting_coderivative(T, ((0, 0), (0, 0)), w)
    assert val.exactness == "sampled" and val.schedule["halvings"] == 12
    # every single-active point near the origin has regular value Q_i w
    r = F(1, 10) / 2 ** 12
    for x in [(r, 0), (0, r), (r, r / 3)]:
        reg = regular_coderivative(T, (x, f.pieces[f.active(x)[0]].gradient(x)), w)
        (z,) = reg.value.points
        assert val.contains(z, tol=1e-8)
    assert set(val.value.points) == {(2, 2), (1, 6)}
    # away from the kink only one piece is active
    far = limiting_coderivative(T, ((1, 0), (2, 0)), w)
    assert set(far.value.points) == {(2, 2)}
