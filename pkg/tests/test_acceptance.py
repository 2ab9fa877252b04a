"""Acceptance criteria 1-8, one pass/fail line each.

Run alone with ``pytest tests/test_acceptance.py`` (the lines appear in the
terminal summary) or ``python3 tests/test_acceptance.py``.
"""
import sys
import time
from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest

from monocone.coderivative import LIMITING, REGULAR, coderivative, coderivative_shift, second_order_limiting
from monocone.convexity import (
    convexity_oracle_sampling, mean_value_inequality_test, strong_convexity_check, strong_modulus_estimate,
)
from monocone.fixtures import FIXTURES, get, kx_box
from monocone.maxquad import MaxQuadFunction
from monocone.monotonicity import (
    DecisionConfig, domain_convexity_probe, hypomonotonicity_estimate, maximality_decision,
    minty_surjectivity_test, pairwise_monotone_test, psd_coderivative_check, semilocal_hypomonotonicity,
)
from monocone.operators import (
    GraphPoint, Inverse, MaxQuadSubdiff, SampleConfig, evaluate, from_json, graph_sample, is_compilable, shift,
)
from monocone.polyhedral import PolyCone, cone_polar
from monocone.smooth import RationalMap

CFG1 = SampleConfig.make([(-2, 2)], 5)


def kx(k):
    return from_json(kx_box(k))


def exactly(val, expected):
    """Value equals ``expected`` (None for empty, else a 1-D point) exactly."""
    if expected is None:
        return val.is_empty()
    if val.is_empty():
        return False
    lo, _ = val.support_min((1,))
    hi, _ = val.support_min((-1,))
    return lo == expected and hi is not None and -hi == expected


def table(k, u, v, w):
    t = v - k * u
    if w == 0 and 0 < t < 1:
        return 0
    if w >= 0 and t == 0:
        return k * w
    if w <= 0 and t == 1:
        return k * w
    return None


def test_criterion_1_coderivative_table(criterion):
    start = time.perf_counter()
    checks = []
    probes = [(u, t, w) for (t, w), u in zip(product((0, F(1, 2), 1), (-2, -1, 0, F(3, 2))),
                                              [F(-1), F(0), F(3, 2), F(1, 3)] * 3)]
    assert len(probes) == 12
    for k in (0, 1, 2):
        T = kx(k)
        for u, t, w in probes:
            v = k * u + t
            want = table(k, u, v, w)
            for kind in (REGULAR, LIMITING):
                val = coderivative(T, ((u,), (v,)), (w,), kind)
                checks.append((f"k={k} u={u} t={t} w={w} {kind}", val.exact and exactly(val.value, want)))
    elapsed = time.perf_counter() - start
    checks.append(("under 1 s", elapsed < 1.0))
    assert criterion(1, checks, elapsed)


def test_criterion_2_hypomonotonicity_essential(criterion):
    start = time.perf_counter()
    T = kx(1)
    samples = graph_sample(T, CFG1)
    checks = []
    for kind in (REGULAR, LIMITING):
        rep = psd_coderivative_check(T, kind, 0)
        checks.append((f"PSD {kind} exact pass", rep.exact and rep.passed and rep.worst_margin == 0))
    est = hypomonotonicity_estimate(T, samples)
    q3 = est.schedule_quotients[F(1, 1000)]
    checks.append(("divergence", est.diverged and est.r_hat == float("inf")))
    checks.append(("quotient <= -999 at 1e-3", q3 is not None and q3 <= -999))
    eps = F(1, 1000)
    pw = pairwise_monotone_test(T, [GraphPoint((0,), (1,)), GraphPoint((eps,), (eps,))])
    checks.append(("pairwise witness", not pw.monotone and pw.inf_product == (1 - eps) * (-eps)))
    v = maximality_decision(T)
    checks.append(("verdict NotMonotone", v.verdict == "NotMonotone"))
    pair = v.witnesses.get("pair") or {}
    u1, v1, u2, v2 = (F(pair[k][0]) if k in pair else F(0) for k in ("u1", "v1", "u2", "v2"))
    checks.append(("decision witness rechecks", (v1 - v2) * (u1 - u2) < 0 and T.dim == 1
                   and evaluate(T, (u1,)).contains((v1,)) and evaluate(T, (u2,)).contains((v2,))))
    assert criterion(2, checks, time.perf_counter() - start)


def test_criterion_3_domain_convexity_essential(criterion):
    start = time.perf_counter()
    T = RationalMap(["-1/x"])
    checks = []
    rep = psd_coderivative_check(T, REGULAR, 0)
    checks.append(("symbolic PSD", rep.exact and rep.passed))
    rng = np.random.default_rng(0)
    ok = True
    for _ in range(100):
        u = F(float(rng.uniform(0.1, 5)) * (1 if rng.uniform() < 0.5 else -1)).limit_denominator(1000)
        w = F(float(rng.uniform(-3, 3))).limit_denominator(1000)
        (z,) = coderivative(T, ((u,), (-1 / u,)), (w,)).value.points
        ok &= float(z[0] * w) >= -1e-12 and abs(float(z[0] * w) - float(w * w / (u * u))) <= 1e-12
    checks.append(("100 probes w^2/u^2", ok))
    for c in (1, -1):
        win = semilocal_hypomonotonicity(T, (c,))
        checks.append((f"window at {c}", win is not None and win.modulus == 0))
    probe = domain_convexity_probe(T, [GraphPoint((-1,), (1,)), GraphPoint((1,), (-1,))])
    checks.append(("domain witness 0", not probe.passed and probe.witness == (0,)))
    pw = pairwise_monotone_test(T, [GraphPoint((-1,), (1,)), GraphPoint((1,), (-1,))])
    checks.append(("pair product -4", pw.inf_product == -4))
    for route in ("auto", "semilocal"):
        v = maximality_decision(T, DecisionConfig(route=route)).verdict
        checks.append((f"verdict ({route})", v in ("Inconclusive", "NotMonotone")))
    assert criterion(3, checks, time.perf_counter() - start)


def soft_threshold(y):
    return float(np.sign(y) * max(abs(y) - 1, 0))


def test_criterion_4_positive_certification(criterion):
    start = time.perf_counter()
    checks = []
    ys1 = [(F(k, 2) - 5,) for k in range(21)]
    abs_op = from_json(get("absval-subdiff").spec)
    box = from_json(get("affine-psd-box").spec)
    A = np.array([[2.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 0.0])
    ys2 = [(F(k, 2) - 5, F(5 - k, 4)) for k in range(21)]
    for name, T, ys, oracle in [
        ("abs", abs_op, ys1, lambda y: np.array([soft_threshold(float(y[0]))])),
        ("affine", box, ys2, lambda y: np.linalg.solve(A + np.eye(2), np.array([float(t) for t in y]) - b)),
    ]:
        v = maximality_decision(T)
        hy = v.certificates["hypomonotonicity"]
        checks.append((f"{name} MaximalMonotone", v.verdict == "MaximalMonotone" and v.route == "global"))
        checks.append((f"{name} exact PSD", v.certificates["psd"]["exact"] and v.certificates["psd"]["passed"]))
        checks.append((f"{name} r_hat 0", hy["r_hat"] == 0))
        rep = minty_surjectivity_test(T, 1, ys, 0)
        checks.append((f"{name} coverage", rep.coverage == 1.0 and rep.single_valued))
        checks.append((f"{name} Lipschitz", rep.lipschitz_ratio <= 1 / (1 - 0) + 1e-9))
        err = max(float(np.max(np.abs(np.array([float(x) for x in us[0]]) - oracle(y)))) for y, us in rep.solutions)
        checks.append((f"{name} closed-form resolvent", err <= 1e-10))
    assert criterion(4, checks, time.perf_counter() - start)


def test_criterion_5_strong_monotonicity(criterion):
    start = time.perf_counter()
    T = from_json(get("quad-l1-subdiff").spec)
    lam = float(np.linalg.eigvalsh(np.diag([2.0, 4.0]))[0])
    checks = []
    for k in (0, F(1, 2), 1, F(3, 2), 2):
        rep = psd_coderivative_check(T, REGULAR, k)
        checks.append((f"kappa {k} passes", rep.exact and rep.passed))
    over = psd_coderivative_check(T, REGULAR, 2 + F(1, 10 ** 6))
    checks.append(("kappa 2+1e-6 fails", over.exact and not over.passed))
    checks.append(("eigenvalue oracle", abs(lam - 2) < 1e-12))
    v = maximality_decision(T, DecisionConfig(kappa=F(2)))
    checks.append(("StronglyMaximalMonotone", v.verdict == "StronglyMaximalMonotone" and v.kappa == 2))
    assert criterion(5, checks, time.perf_counter() - start)


def test_criterion_6_convexity_equivalence(criterion, catalog_results):
    start = time.perf_counter()
    checks = [("20 functions", len(catalog_results) == 20),
              ("10 convex", sum(c for _, _, c, _, _ in catalog_results) == 10)]
    for name, f, convex, verdict, oracle in catalog_results:
        agree = (verdict.verdict == "Convex") == oracle.passed == convex and verdict.exact
        checks.append((f"{name} agrees", agree and oracle.checked == (1000 if oracle.passed else oracle.checked)))
        if verdict.verdict == "NotConvex":
            w = verdict.witnesses["second_order"]
            u, v, dw, z = (tuple(F(x) for x in w[k]) for k in ("u", "v", "w", "z"))
            ok = sum(a * c for a, c in zip(z, dw)) < 0 and second_order_limiting(f, (u, v), dw).contains(z)
            checks.append((f"{name} witness", ok))
    assert criterion(6, checks, time.perf_counter() - start)


def test_criterion_7_strong_convexity(criterion):
    start = time.perf_counter()
    diag = MaxQuadFunction.make([([[2, 0], [0, 4]], [0, 0], 0)])
    absf = MaxQuadFunction.make([([[0]], [1], 0), ([[0]], [-1], 0)])
    grid = [F(k, 2) for k in range(9)]
    checks = [("kappa* = 2", strong_modulus_estimate(diag, grid) == 2)]
    for k in grid[1:]:
        v = strong_convexity_check(diag, k)
        thr = v.certificates["threshold"]["combined"]["passed"]
        sh = v.certificates["shifted"]["combined"]["passed"]
        checks.append((f"diag routes agree at {k}", thr == sh == (k <= 2)))
        checks.append((f"abs fails at {k}", strong_convexity_check(absf, k).verdict == "NotStronglyConvex"))
    checks.append(("abs primal counterexample", not convexity_oracle_sampling(absf, 1000, 0, F(1, 2)).passed))
    assert criterion(7, checks, time.perf_counter() - start)


def _subset_1d(small, big):
    grid = [F(k, 2) for k in range(-8, 9)]
    return all(big.contains((z,)) for z in grid if small.contains((z,)))


def test_criterion_8_structural_invariants(criterion, catalog_results):
    start = time.perf_counter()
    checks = []
    ops = [(f.name, from_json(f.spec)) for f in FIXTURES if f.analysis == "check-maximal"]
    poly = [(n, T) for n, T in ops if is_compilable(T)]
    smooth = [(n, T) for n, T in ops if not is_compilable(T)]

    # regular inside limiting at 1000 graph points
    pts = []
    for name, T in ops:
        cfg = SampleConfig.make([(-3, 3)] * T.dim, 12 if T.dim == 1 else 5, seed=2, jitter=0.3)
        pts += [(T, p) for p in graph_sample(T, cfg)]
    rng = np.random.default_rng(5)
    chosen = [pts[i] for i in rng.choice(len(pts), size=1000, replace=len(pts) < 1000)]
    ok = True
    for k, (T, p) in enumerate(chosen):
        w = tuple(F(int(x)) for x in rng.integers(-2, 3, size=T.dim))
        reg = coderivative(T, p, w, REGULAR)
        lim = coderivative(T, p, w, LIMITING)
        if not reg.is_empty():
            ok &= lim.contains(reg.value.any_point())
            if T.dim == 1:
                ok &= _subset_1d(reg.value, lim.value)
    checks.append(("regular in limiting (1000 points)", ok))

    # graph swap on polyhedral fixtures
    ok = True
    for name, T in poly:
        for p in graph_sample(T, SampleConfig.make([(-2, 2)] * T.dim, 3, seed=4))[:8]:
            for w in product((-1, 0, 1), repeat=T.dim):
                val = coderivative(T, p, w, REGULAR)
                for z in product((-1, 0, 2), repeat=T.dim):
                    inv = coderivative(Inverse(T), (p.v, p.u), tuple(-x for x in z), REGULAR)
                    ok &= val.contains(z) == inv.contains(tuple(-x for x in w))
    checks.append(("graph-swap symmetry", ok))

    # shift rule vs direct computation, 100 queries per fixture
    ok = True
    for name, T in ops:
        n = T.dim
        base = graph_sample(T, SampleConfig.make([(-2, 2)] * n, 5 if n == 1 else 3, seed=6, jitter=0.3))
        for j in range(100):
            p = base[int(rng.integers(len(base)))]
            s = F(int(rng.integers(-3, 4)), 2)
            w = tuple(F(int(x)) for x in rng.integers(-2, 3, size=n))
            v = tuple(b + s * a for a, b in zip(p.u, p.v))
            rule = coderivative_shift(T, s, (p.u, v), w)
            direct = coderivative(shift(T, s), (p.u, v), w)
            if rule.value.kind == "points" and direct.value.kind == "points":
                ok &= all(max(abs(float(a - b)) for a, b in zip(x, y)) <= 1e-9
                          for x, y in zip(rule.value.points, direct.value.points))
                ok &= len(rule.value.points) == len(direct.value.points)
            else:
                for d in product((-1, 0, 1), repeat=n):
                    if any(d):
                        ok &= rule.value.support_min(d)[0] == direct.value.support_min(d)[0]
                ok &= rule.is_empty() == direct.is_empty()
    checks.append(("shift rule (100 per fixture)", ok))

    # smooth coderivatives vs central differences
    ok = True
    for name, T in smooth:
        for u in (F(-3, 2), F(-1, 3), F(1, 2), F(2)):
            for w in (F(-2), F(1), F(5, 2)):
                val = T((u,))
                (z,) = coderivative(T, ((u,), val), (w,)).value.points
                h = 1e-5
                fd = (float(T.eval_float([float(u) + h])[0]) - float(T.eval_float([float(u) - h])[0])) / (2 * h)
                ok &= abs(fd * float(w) - float(z[0])) <= 1e-6 * max(1.0, abs(float(z[0])))
    checks.append(("finite differences", ok))

    # cone polarity involution
    ok = True
    for _ in range(50):
        rays = [tuple(int(x) for x in rng.integers(-3, 4, size=3)) for _ in range(int(rng.integers(1, 5)))]
        rays = [r for r in rays if any(r)] or [(1, 0, 0)]
        C = PolyCone.from_generators(rays, (), 3)
        ok &= cone_polar(cone_polar(C)).same_as(C)
    checks.append(("polarity involution", ok))

    # mean-value inequality
    ok = True
    for name, f, *_ in catalog_results:
        for _ in range(100):
            a, b = rng.uniform(-3, 3, size=(2, f.dim))
            ok &= mean_value_inequality_test(f, a, b, rng.uniform(0.01, 0.5), grid_density=21).passed
    checks.append(("mean-value inequality (100 per function)", ok))
    assert criterion(8, checks, time.perf_counter() - start)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
