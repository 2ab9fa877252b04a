from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from monocone.coderivative import second_order_combined, second_order_limiting
from monocone.convexity import (
    convexity_check_second_order, convexity_oracle_sampling, mean_value_inequality_test, midpoint_search,
    semilocal_spot_check, strong_convexity_check, strong_modulus_estimate,
)
from monocone.errors import RoutesDisagree
from monocone.maxquad import MaxQuadFunction, ShiftedFunction, subdifferential
from monocone.monotonicity import psd_coderivative_check
from monocone.operators import MaxQuadSubdiff

ABS = MaxQuadFunction.make([([[0]], [1], 0), ([[0]], [-1], 0)])
SQUARE = MaxQuadFunction.make([([[2]], [0], 0)])
NEG_SQUARE = MaxQuadFunction.make([([[-2]], [0], 0)])
DIAG = MaxQuadFunction.make([([[2, 0], [0, 4]], [0, 0], 0)])


def fval(f, x):
    """Plain float evaluation, independent of the package."""
    x = np.asarray(x, dtype=float)
    return max(0.5 * x @ np.array(p.Q, dtype=float) @ x + np.array(p.c, dtype=float) @ x + float(p.d)
               for p in f.pieces)


def midpoint_oracle(f, seed=0, count=1000, box=3):
    rng = np.random.default_rng(seed + 100)
    for _ in range(count):
        x, y = rng.uniform(-box, box, size=(2, f.dim))
        lam = rng.uniform()
        if fval(f, lam * x + (1 - lam) * y) > lam * fval(f, x) + (1 - lam) * fval(f, y) + 1e-9:
            return False
    return True


# -- subdifferential -------------------------------------------------------------

def test_subdifferential_examples():
    assert sorted(subdifferential(ABS, (0,)).vertices) == [(-1,), (1,)]
    f = MaxQuadFunction.make([([[2]], [0], 0), ([[0]], [2], -1)])
    assert subdifferential(f, (1,)).vertices == ((2,),) or set(subdifferential(f, (1,)).vertices) == {(2,)}
    assert set(subdifferential(SQUARE, (F(3, 7),)).vertices) == {(F(6, 7),)}


# -- verdict examples --------------------------------------------------------------

def test_examples():
    v = convexity_check_second_order(ABS)
    assert v.verdict == "Convex" and v.exact
    v = convexity_check_second_order(NEG_SQUARE)
    assert v.verdict == "NotConvex" and v.exact
    w, z = F(v.witnesses["second_order"]["w"][0]), F(v.witnesses["second_order"]["z"][0])
    assert z == -2 * w and z * w < 0
    assert v.witnesses["primal"] is not None and not v.witnesses["primal_witness_missing"]
    hinge = MaxQuadFunction.make([([[2]], [0], -1), ([[0]], [0], 0)])
    assert convexity_check_second_order(hinge).verdict == "Convex"


def test_oracle_examples():
    assert convexity_oracle_sampling(ABS, 1000, seed=3).passed
    res = convexity_oracle_sampling(NEG_SQUARE, 1000)
    assert not res.passed and F(res.witness["gap"]) > 0
    assert convexity_oracle_sampling(SQUARE, 1000, kappa=2).passed
    # (-1, 1, 1/2) is a violation of -x^2
    assert midpoint_search(NEG_SQUARE, (0,), (1,))["gap"] == 1


def test_strong_examples():
    assert strong_convexity_check(SQUARE, 2).verdict == "StronglyConvex"
    assert strong_convexity_check(DIAG, 2).verdict == "StronglyConvex"
    assert strong_convexity_check(DIAG, F(5, 2)).verdict == "NotStronglyConvex"
    for k in (F(1, 100), F(1, 2), 1, 3):
        assert strong_convexity_check(ABS, k).verdict == "NotStronglyConvex"
    # defining inequality at x=1, y=2, lam=1/2
    k = F(1, 100)
    assert abs(F(3, 2)) > F(1, 2) * 1 + F(1, 2) * 2 - k / 2 * F(1, 4) * 1


def test_strong_modulus():
    grid = [F(k, 2) for k in range(9)]
    assert strong_modulus_estimate(DIAG, grid) == 2
    assert strong_modulus_estimate(ABS, grid) == 0
    assert strong_modulus_estimate(NEG_SQUARE, grid) is None


def test_sampled_mode():
    # distinct quadratic parts in two dimensions do not compile
    f = MaxQuadFunction.make([([[2, 0], [0, 1]], [0, 0], 0), ([[1, 0], [0, 3]], [0, 0], 0)])
    v = convexity_check_second_order(f)
    assert v.verdict == "Inconclusive" and not v.exact
    g = MaxQuadFunction.make([([[2, 0], [0, -1]], [0, 0], 0), ([[1, 0], [0, 3]], [0, 0], -5)])
    v = convexity_check_second_order(g)
    assert v.verdict == "NotConvex"
    wit = v.witnesses["second_order"]
    assert F(wit["margin"]) < 0


def test_semilocal_spot_check():
    win = semilocal_spot_check(ABS)
    assert win is not None and win["modulus"] == 0


# -- catalog ------------------------------------------------------------------------

def test_catalog_agreement(catalog_results):
    assert len(catalog_results) == 20
    assert sum(c for _, _, c, _, _ in catalog_results) == 10
    for name, f, convex, verdict, oracle in catalog_results:
        assert verdict.exact, name
        assert (verdict.verdict == "Convex") == oracle.passed == convex == midpoint_oracle(f), name


def test_catalog_witnesses_recheck(catalog_results):
    for name, f, convex, verdict, _ in catalog_results:
        if verdict.verdict != "NotConvex":
            continue
        wit = verdict.witnesses["second_order"]
        u, v, w, z = (tuple(F(x) for x in wit[k]) for k in ("u", "v", "w", "z"))
        assert sum(a * b for a, b in zip(z, w)) < 0, name
        assert second_order_limiting(f, (u, v), w).contains(z), name
        p = verdict.witnesses["primal"]
        if p is not None:
            x, y = np.array([float(F(t)) for t in p["x"]]), np.array([float(F(t)) for t in p["y"]])
            lam = float(F(p["lambda"]))
            assert fval(f, lam * x + (1 - lam) * y) > lam * fval(f, x) + (1 - lam) * fval(f, y), name


def test_combined_vs_limiting(catalog_results):
    for name, f, _, verdict, _ in catalog_results:
        comb, lim = verdict.certificates["combined"], verdict.certificates["limiting"]
        if lim["passed"] and lim["exact"]:
            assert comb["passed"], name


@pytest.mark.parametrize("kappa", [F(1, 2), 1, 2, 3])
def test_shift_coherence_catalog(catalog_results, kappa):
    for name, f, *_ in catalog_results:
        try:
            strong_convexity_check(f, kappa)
        except RoutesDisagree:  # pragma: no cover
            pytest.fail(f"routes disagree on {name} at kappa {kappa}")


def test_shifted_function_pieces():
    g = ShiftedFunction(DIAG, 2).function
    assert g.pieces[0].Q == ((0, 0), (0, 2))


# -- C2 reduction ----------------------------------------------------------------------

sym = st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))


@settings(max_examples=30)
@given(sym, st.tuples(st.integers(-3, 3), st.integers(-3, 3)), st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_c2_reduction(abc, u, w):
    a, b, c = abc
    Q = [[a, b], [b, c]]
    f = MaxQuadFunction.make([(Q, [1, -1], 0)])
    v = tuple(sum(Q[i][j] * u[j] for j in range(2)) + (1, -1)[i] for i in range(2))
    Qw = tuple(sum(Q[i][j] * w[j] for j in range(2)) for i in range(2))
    for val in (second_order_combined(f, (u, v), w), second_order_limiting(f, (u, v), w)):
        assert val.contains(Qw)
        for d in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            assert val.support_min(d)[0] == sum(x * y for x, y in zip(Qw, d))
    lam_min = np.linalg.eigvalsh(np.array(Q, dtype=float))[0]
    verdict = convexity_check_second_order(f).verdict
    assert verdict == ("Convex" if lam_min >= -1e-10 else "NotConvex")


# -- mean-value inequality --------------------------------------------------------------

def test_mean_value_examples():
    assert mean_value_inequality_test(ABS, (-1,), (1,), 0.1).lhs == 0
    rep = mean_value_inequality_test(SQUARE, (0,), (2,), 0.1)
    assert rep.lhs == 4 and rep.passed and rep.bound >= 2 * 4.2 - 1e-9
    f = MaxQuadFunction.make([([[0]], [1], 0), ([[0]], [-1], 1)])
    rep = mean_value_inequality_test(f, (0,), (1,), 0.1)
    assert rep.lhs == 0 and rep.passed


def test_mean_value_catalog(catalog_results):
    rng = np.random.default_rng(11)
    for name, f, *_ in catalog_results:
        for _ in range(100):
            a, b = rng.uniform(-3, 3, size=(2, f.dim))
            eps = rng.uniform(0.01, 0.5)
            rep = mean_value_inequality_test(f, a, b, eps, grid_density=21)
            assert rep.passed, (name, a, b, eps)
