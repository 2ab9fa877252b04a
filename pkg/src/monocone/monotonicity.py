"""Monotonicity, hypomonotonicity and maximality of set-valued operators.

Refutations come from explicit pairs of graph points.  Positive verdicts
need the coderivative condition to be certified over the whole graph: for
polyhedral graphs every stratum is enumerated and the quadratic form
``-<a, b> - kappa |b|^2`` is checked for copositivity on its normal cone,
which covers every ``(z, -w)`` that can ever appear as a regular or
limiting normal.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp

from . import lp
from .coderivative import EXACT, LIMITING, REGULAR, coderivative, cone_slice
from .errors import (
    NotInDomain, SegmentLeavesDomain, ShiftTooSmall, TooFewSamples, UnsupportedVariant, WindowNotFound,
)
from .operators import (
    GraphPoint, MaxQuadSubdiff, SampleConfig, ValueSet, _invert_smooth, evaluate, graph_pieces, graph_sample,
    in_domain, is_compilable, shift_pieces, smooth_form,
)
from .parallel import pmap
from .polyhedral import PolyCone
from .rational import (
    ZERO, ONE, add, dot, is_psd, norm2, neg, q, scale, sub, to_json_number, to_json_vec, unit, vec,
)
from .smooth import univariate_nonnegative
from .strata import global_strata

TOL = 1e-12
DEFAULT_SCHEDULE = tuple(Fraction(1, 10 ** k) for k in range(1, 7))
DEFAULT_RADII = (ONE, Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))


def _num(x):
    if x is None:
        return "-inf"
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return to_json_number(x)


def _pair_json(pair):
    if pair is None:
        return None
    (u1, v1), (u2, v2) = pair
    return {"u1": to_json_vec(u1), "v1": to_json_vec(v1), "u2": to_json_vec(u2), "v2": to_json_vec(v2)}


# --------------------------------------------------------------------------
# pairwise test


@dataclass
class PairwiseReport:
    inf_quotient: object
    inf_product: object
    witness: tuple | None
    quotient_witness: tuple | None
    pairs: int

    @property
    def monotone(self) -> bool:
        return self.inf_product >= -TOL

    def to_json(self) -> dict:
        return {"inf_quotient": _num(self.inf_quotient), "inf_product": _num(self.inf_product),
                "monotone_on_samples": self.monotone, "pairs": self.pairs,
                "witness": _pair_json(self.witness), "quotient_witness": _pair_json(self.quotient_witness)}


def _exact_product(p1, p2):
    du = sub(p1[0], p2[0])
    return dot(sub(p1[1], p2[1]), du), norm2(du)


def pairwise_monotone_test(T, samples) -> PairwiseReport:
    """Exhaustive sweep of ``<v1 - v2, u1 - u2>`` over all sample pairs."""
    pts = [(vec(p.u), vec(p.v)) if isinstance(p, GraphPoint) else (vec(p[0]), vec(p[1])) for p in samples]
    if len(pts) < 2:
        raise TooFewSamples("the pairwise test needs at least two graph points")
    U = np.array([[float(x) for x in u] for u, _ in pts])
    V = np.array([[float(x) for x in v] for _, v in pts])
    dU = U[:, None, :] - U[None, :, :]
    dV = V[:, None, :] - V[None, :, :]
    prod = np.einsum("ijk,ijk->ij", dV, dU)
    dist = np.einsum("ijk,ijk->ij", dU, dU)
    iu = np.triu_indices(len(pts), 1)
    P = prod[iu]
    k = int(np.argmin(P))
    i, j = iu[0][k], iu[1][k]
    witness = (pts[i], pts[j])
    inf_product, _ = _exact_product(*witness)
    D = dist[iu]
    mask = D > 0
    inf_quotient, qwit = None, None
    if mask.any():
        Q = np.where(mask, P / np.where(mask, D, 1.0), np.inf)
        k = int(np.argmin(Q))
        qwit = (pts[iu[0][k]], pts[iu[1][k]])
        pr, d2 = _exact_product(*qwit)
        inf_quotient = pr / d2
    return PairwiseReport(inf_quotient if inf_quotient is not None else float("inf"), inf_product,
                          witness, qwit, len(P))


# --------------------------------------------------------------------------
# close pairs and hypomonotonicity


def worst_values(T, u, d):
    """``(v1, v2)`` maximizing and minimizing ``<., d>`` over ``T(u)``.

    Either entry is ``None`` when the support is infinite in that sense.
    """
    val = evaluate(T, u)
    if val.is_empty():
        return None
    lo, vlo = val.support_min(d)
    hi, vhi = val.support_min(neg(d))
    return (vhi if hi is not None else None), (vlo if lo is not None else None), val


def close_pair(T, u, d, t):
    """Worst pair ``(u, v1), (u + t d, v2)`` for ``<v2 - v1, t d>``.

    Returns ``(quotient, product, pair)``; an unbounded support gives a
    quotient of ``None`` (minus infinity) with a finite witness pair whose
    product is negative.
    """
    u = vec(u)
    u2 = add(u, scale(t, d))
    a = worst_values(T, u, d)
    b = worst_values(T, u2, d)
    if a is None or b is None:
        return None
    v1, _, val1 = a
    _, v2, val2 = b
    dd = norm2(d)
    if v1 is None or v2 is None:
        # walk along a recession ray until the product is negative
        base1 = v1 if v1 is not None else val1.any_point()
        base2 = v2 if v2 is not None else val2.any_point()
        if v1 is None:
            _, ray = val1.support_min(neg(d))
            s = (abs(dot(sub(base2, base1), d)) + 1) / abs(dot(ray, d))
            base1 = add(base1, scale(s, ray))
        if v2 is None:
            _, ray = val2.support_min(d)
            s = (abs(dot(sub(base2, base1), d)) + 1) / abs(dot(ray, d))
            base2 = add(base2, scale(s, ray))
        prod = t * dot(sub(base2, base1), d)
        return None, prod, ((u, base1), (u2, base2))
    prod = t * dot(sub(v2, v1), d)
    return prod / (t * t * dd), prod, ((u, v1), (u2, v2))


def axis_directions(n):
    return [unit(n, i, s) for i in range(n) for s in (1, -1)]


@dataclass
class HypoEstimate:
    r_hat: object  # Fraction, or inf
    diverged: bool
    inf_quotient: object
    schedule_quotients: dict
    witness: tuple | None
    negative_pair: tuple | None  # a pair with negative product, if any met

    @property
    def finite(self) -> bool:
        return not self.diverged

    def to_json(self) -> dict:
        return {"r_hat": _num(self.r_hat), "diverged": self.diverged, "inf_quotient": _num(self.inf_quotient),
                "schedule": {_num(k): _num(v) for k, v in self.schedule_quotients.items()},
                "witness": _pair_json(self.witness)}


def hypomonotonicity_estimate(T, samples, close_pair_schedule=DEFAULT_SCHEDULE, ball=None) -> HypoEstimate:
    """Empirical modulus ``r`` with ``T + rI`` monotone on sampled and close pairs.

    Close pairs sit at distances from the schedule around each sample,
    along the coordinate axes, with the worst admissible values.  The
    quotient of a non-hypomonotone operator blows up like ``-c/eps``;
    divergence is declared when the worst quotient is at most ``-1/(2 eps)``
    at the two smallest distances (or is minus infinity anywhere).
    ``ball = (center, radius)`` keeps every point inside a closed ball.
    """
    pts = list(samples)
    if len(pts) < 2:
        raise TooFewSamples("hypomonotonicity estimation needs at least two graph points")
    pw = pairwise_monotone_test(T, pts)
    worst_q, wit = pw.inf_quotient, pw.quotient_witness
    neg_pair = pw.witness if pw.inf_product < 0 else None
    schedule = sorted((q(e) for e in close_pair_schedule), reverse=True)
    per_eps = {e: float("inf") for e in schedule}
    minus_inf = False
    us = list(dict.fromkeys(vec(p.u) for p in pts))
    n = len(us[0])

    def inside(x):
        if ball is None:
            return True
        c, r = ball
        return norm2(sub(x, c)) <= r * r

    for u in us:
        for e in schedule:
            for d in axis_directions(n):
                if not inside(add(u, scale(e, d))):
                    continue
                res = close_pair(T, u, d, e)
                if res is None:
                    continue
                quo, prod, pair = res
                if prod < 0 and neg_pair is None:
                    neg_pair = pair
                if quo is None:
                    minus_inf = True
                    per_eps[e] = None
                    wit = pair
                    worst_q = None
                    continue
                if per_eps[e] is not None and quo < per_eps[e]:
                    per_eps[e] = quo
                if worst_q is not None and quo < worst_q:
                    worst_q, wit = quo, pair
    tail = schedule[-2:]
    blowup = all(per_eps[e] is None or (per_eps[e] != float("inf") and per_eps[e] <= -1 / (2 * e)) for e in tail)
    diverged = minus_inf or blowup
    if diverged:
        r_hat = float("inf")
    else:
        r_hat = max(ZERO, -worst_q) if worst_q != float("inf") else ZERO
    return HypoEstimate(r_hat, diverged, worst_q, per_eps, wit, neg_pair)


@dataclass
class SemilocalWindow:
    center: tuple
    radius: Fraction
    modulus: object

    def contains(self, u) -> bool:
        return norm2(sub(vec(u), self.center)) <= self.radius ** 2

    def to_json(self) -> dict:
        return {"center": to_json_vec(self.center), "radius": _num(self.radius), "modulus": _num(self.modulus)}


def ball_samples(T, center, radius, density=5, seed=0):
    n = len(center)
    cfg = SampleConfig.make([(c - radius, c + radius) for c in center], density, seed)
    try:
        pts = graph_sample(T, cfg)
    except Exception:
        pts = []
    pts = [p for p in pts if norm2(sub(p.u, center)) <= radius ** 2]
    val = evaluate(T, center)
    if not val.is_empty():
        pts.append(GraphPoint(center, vec(val.any_point()), "center"))
    return pts


def semilocal_hypomonotonicity(T, center, radii=DEFAULT_RADII, density=5, seed=0):
    """First radius (in the given order) whose closed ball gives a finite modulus, else None."""
    center = vec(center)
    if not in_domain(T, center):
        raise NotInDomain(f"{[str(x) for x in center]} is not in the domain")
    for r in radii:
        r = q(r)
        pts = ball_samples(T, center, r, density, seed)
        if len(pts) < 2:
            continue
        est = hypomonotonicity_estimate(T, pts, ball=(center, r))
        if not est.diverged:
            return SemilocalWindow(center, r, est.r_hat)
    return None


# --------------------------------------------------------------------------
# PSD coderivative condition


@dataclass
class QueryPlan:
    points: tuple
    directions: tuple
    exhaustive: bool = True


def default_directions(n):
    dirs = [tuple([ZERO] * n)]
    dirs += axis_directions(n)
    for i, j in itertools.combinations(range(n), 2):
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            w = [ZERO] * n
            w[i], w[j] = Fraction(si), Fraction(sj)
            dirs.append(tuple(w))
    return tuple(dirs)


def default_plan(T, cfg: SampleConfig, exhaustive=True) -> QueryPlan:
    return QueryPlan(tuple(graph_sample(T, cfg)), default_directions(T.dim), exhaustive)


@dataclass
class PSDReport:
    kind: str
    kappa: Fraction
    worst_margin: object
    witness: dict | None
    exact: bool
    queries: int
    method: str
    strata: int = 0

    @property
    def passed(self) -> bool:
        m = self.worst_margin
        if m is None:
            return False
        return m >= 0 if self.exact and not isinstance(m, float) else m >= -TOL

    def to_json(self) -> dict:
        return {"kind": self.kind, "kappa": _num(self.kappa), "worst_margin": _num(self.worst_margin),
                "passed": self.passed, "exact": self.exact, "queries": self.queries, "method": self.method,
                "strata": self.strata, "witness": self.witness}


def _query_margin(val, w, kappa):
    """Normalized margin ``(inf <z, w> - kappa |w|^2) / |w|^2`` and its minimizer."""
    if val.is_empty():
        return float("inf"), None
    nw = norm2(w)
    m, z = val.support_min(w)
    if nw == 0:
        return ZERO, z
    if m is None:
        return None, z
    return (m - kappa * nw) / nw, z


def _witness_json(u, v, w, z, margin, exact):
    return {"u": to_json_vec(u), "v": to_json_vec(v), "w": to_json_vec(w),
            "z": None if z is None else to_json_vec(z), "margin": _num(margin), "exact": exact}


def _less(a, b):
    """Order on margins where None is minus infinity."""
    if a is None:
        return b is not None
    if b is None:
        return False
    return a < b


def copositivity_witness(cone: PolyCone, n, kappa):
    """A point ``(a, b)`` of the cone with ``-<a, b> - kappa |b|^2 < 0``, or None.

    With generators ``g_k`` (lineality both ways) the form is copositive on
    the cone iff ``M = G^T S G`` is copositive.  The minimum of
    ``lam^T M lam`` on the simplex sits at a point with ``M_II lam = mu 1``
    on its support ``I``, and ``mu`` is then the value, so checking every
    support by one exact LP decides copositivity.
    """
    gens = list(cone.generators.rays) + list(cone.generators.lineality) + [neg(l) for l in cone.generators.lineality]
    if not gens:
        return None

    def form(x, y):
        a, b = x[:n], x[n:]
        c, d = y[:n], y[n:]
        return -(dot(a, d) + dot(b, c)) / 2 - kappa * dot(b, d)

    k = len(gens)
    M = [[form(gens[i], gens[j]) for j in range(k)] for i in range(k)]
    if all(x >= 0 for r in M for x in r):
        return None
    if is_psd(M):
        return None
    for size in range(1, k + 1):
        for I in itertools.combinations(range(k), size):
            sub_m = [[M[i][j] for j in I] for i in I]
            if all(x >= 0 for r in sub_m for x in r):
                continue
            if size == 1:
                lam = {I[0]: ONE}
            else:
                if is_psd(sub_m):
                    continue
                # variables: lam_I, mu ; minimize mu
                A_eq = [list(r) + [-ONE] for r in sub_m] + [[ONE] * size + [ZERO]]
                b_eq = [ZERO] * size + [ONE]
                A_ub = [[-ONE if c == r else ZERO for c in range(size)] + [ZERO] for r in range(size)]
                res = lp.linprog([ZERO] * size + [ONE], A_ub, [ZERO] * size, A_eq, b_eq, nvars=size + 1)
                if not res.ok or res.value >= 0:
                    continue
                lam = {i: res.x[t] for t, i in enumerate(I)}
            x = tuple([ZERO] * (2 * n))
            for i, l in lam.items():
                x = add(x, scale(l, gens[i]))
            a, b = x[:n], x[n:]
            if -dot(a, b) - kappa * norm2(b) < 0:
                return a, b
    return None


@functools.lru_cache(maxsize=256)
def _strata_cones(pieces):
    strata = global_strata(pieces)
    return strata, [st.normal_cone(pieces) for st in strata]


@functools.lru_cache(maxsize=256)
def _slice_minima(pieces, n, directions):
    """Per stratum and direction: ``(inf <z, w>, minimizer)`` over the cone
    slice, or ``(inf, None)`` for an empty slice; independent of kappa."""
    _, cones = _strata_cones(pieces)
    out = []
    for cone in cones:
        row = []
        for w in directions:
            val = ValueSet.simplified([cone_slice(cone, w, n)])
            row.append((float("inf"), None) if val.is_empty() else val.support_min(w))
        out.append(tuple(row))
    return tuple(out)


def _shifted_margin(inf, z, w, kappa):
    # same normalization as _query_margin
    if inf == float("inf") and z is None:
        return float("inf")
    nw = norm2(w)
    if nw == 0:
        return ZERO
    if inf is None:
        return None
    return (inf - kappa * nw) / nw


@functools.lru_cache(maxsize=256)
def _exhaustive(pieces, n, kappa, directions):
    """Stratum-exhaustive margin; the same for both kinds, since every
    regular cone and every cone of a limiting family is the cone of some
    global stratum."""
    strata, cones = _strata_cones(pieces)
    results = pmap(lambda c: copositivity_witness(c, n, kappa), cones)
    worst, witness, queries = float("inf"), None, 0
    for st, row in zip(strata, _slice_minima(pieces, n, directions)):
        u, v = st.witness[:n], st.witness[n:]
        for w, (inf, z) in zip(directions, row):
            queries += 1
            m = _shifted_margin(inf, z, w, kappa)
            if witness is None or _less(m, worst):
                worst = m
                witness = _witness_json(u, v, w, z, m, True)
    for st, res in zip(strata, results):
        if res is None:
            continue
        a, b = res
        w = neg(b)
        m = (dot(a, w) - kappa * norm2(w)) / norm2(w)
        u, v = st.witness[:n], st.witness[n:]
        if witness is None or _less(m, worst):
            worst = m
            witness = _witness_json(u, v, w, a, m, True)
    return worst, witness, queries, len(strata)


def psd_coderivative_check(T, kind=REGULAR, kappa=0, plan: QueryPlan | None = None, cfg=None) -> PSDReport:
    """Check ``<z, w> >= kappa |w|^2`` for ``z`` in the coderivative values.

    Margins are normalized by ``|w|^2``; the zero direction contributes 0
    whenever the value is nonempty.  ``exact`` means the verdict covers the
    whole graph: stratum-exhaustive copositivity for polyhedral graphs, an
    exact polynomial certificate for one-dimensional rational maps.
    """
    kappa = q(kappa)
    n = T.dim
    if plan is None:
        if is_compilable(T):  # the exhaustive path needs directions only
            plan = QueryPlan((), default_directions(n), True)
        else:
            plan = default_plan(T, cfg or SampleConfig.make([(-2, 2)] * n, 5), True)
    worst, witness, queries = float("inf"), None, 0

    def visit(u, v, w, exact_value=True):
        nonlocal worst, witness, queries
        try:
            val = coderivative(T, (u, v), w, kind)
        except UnsupportedVariant:
            return
        queries += 1
        m, z = _query_margin(val.value, w, kappa)
        ex = exact_value and val.exact
        if witness is None or _less(m, worst):
            worst = m
            witness = _witness_json(u, v, w, z, m, ex)
            witness["_exact"] = ex

    if is_compilable(T) and plan.exhaustive:
        worst, witness, queries, nstrata = _exhaustive(graph_pieces(T), n, kappa, tuple(plan.directions))
        return PSDReport(kind, kappa, worst, dict(witness) if witness else None, True, queries,
                         "stratum-exhaustive copositivity", nstrata)

    F = smooth_form(T)
    if F is not None and not is_compilable(T) and n == 1:
        for p in plan.points:
            for w in plan.directions:
                visit(p.u, p.v, w)
        cert, wit = _univariate_certificate(F, kappa)
        if wit is not None:
            u0 = wit
            v0 = F((u0,))
            visit((u0,), v0, (ONE,))
        _strip(witness)
        if cert and (worst is None or (worst != float("inf") and worst < 0)):
            raise AssertionError("polynomial certificate contradicts a probe")
        exact = cert or wit is not None
        return PSDReport(kind, kappa, worst, witness, exact, queries, "univariate polynomial nonnegativity")

    for p in plan.points:
        for w in plan.directions:
            visit(p.u, p.v, w)
    _strip(witness)
    return PSDReport(kind, kappa, worst, witness, False, queries, "sampled queries")


def _strip(witness):
    if witness is not None:
        witness.pop("_exact", None)


def _univariate_certificate(F, kappa):
    """Whether ``F' >= kappa`` on the whole domain, else a rational point where it fails.

    With ``F = N/D`` the derivative is ``(N'D - ND')/D^2`` and ``D^2 > 0`` on
    the domain, so the condition is ``P = N'D - ND' - kappa D^2 >= 0`` away
    from the finitely many poles, hence everywhere by continuity.
    """
    f = F.funcs[0]
    x = F.xs[0]
    N, D = f.num_poly, f.den_poly
    P = N.diff(x) * D - N * D.diff(x) - D * D * sp.Rational(kappa.numerator, kappa.denominator)
    if univariate_nonnegative(P):
        return True, None
    # a rational point between consecutive real roots where P < 0
    roots = sorted({float(r) for r in (P * D).real_roots()}) if not (P * D).is_ground else []
    cands = []
    if roots:
        cands.append(roots[0] - 1)
        cands.append(roots[-1] + 1)
        cands += [(a + b) / 2 for a, b in zip(roots, roots[1:])]
    else:
        cands.append(0.0)
    for c in cands:
        r = Fraction(c).limit_denominator(10 ** 6)
        rr = sp.Rational(r.numerator, r.denominator)
        if D.eval(rr) != 0 and P.eval(rr) < 0:
            return False, r
    return False, None


# --------------------------------------------------------------------------
# domain convexity and segment chains


@dataclass
class DomainProbe:
    passed: bool
    witness: tuple | None = None
    pair: tuple | None = None
    checked: int = 0

    def to_json(self) -> dict:
        d = {"passed": self.passed, "checked": self.checked}
        if self.witness is not None:
            d["witness"] = to_json_vec(self.witness)
            d["pair"] = [to_json_vec(self.pair[0]), to_json_vec(self.pair[1])]
        return d


def dyadic_parameters(depth):
    """``k / 2^j`` for ``j = 1..depth``, coarse levels first."""
    out = []
    for j in range(1, depth + 1):
        for k in range(1, 2 ** j, 2):
            out.append(Fraction(k, 2 ** j))
    return out


def domain_convexity_probe(T, samples, depth=4) -> DomainProbe:
    us = list(dict.fromkeys(vec(p.u) if isinstance(p, GraphPoint) else vec(p) for p in samples))
    if len(us) < 2:
        raise TooFewSamples("the domain probe needs at least two domain points")
    ts = dyadic_parameters(depth)
    checked = 0
    for u1, u2 in itertools.combinations(us, 2):
        for t in ts:
            x = add(u1, scale(t, sub(u2, u1)))
            checked += 1
            if not in_domain(T, x):
                return DomainProbe(False, x, (u1, u2), checked)
    return DomainProbe(True, None, None, checked)


@dataclass
class ChainCertificate:
    ts: tuple
    points: tuple  # (u_j, v_j)
    products: tuple
    total: Fraction
    windows: tuple

    @property
    def links(self):
        return len(self.products)

    def to_json(self) -> dict:
        return {"t": [_num(t) for t in self.ts],
                "points": [{"u": to_json_vec(u), "v": to_json_vec(v)} for u, v in self.points],
                "products": [_num(p) for p in self.products], "total": _num(self.total),
                "windows": [w.to_json() for w in self.windows]}


def _pick_value(T, u, d, mode):
    val = evaluate(T, u)
    if val.is_empty():
        return None
    if mode == "low":
        m, z = val.support_min(d)
    else:
        m, z = val.support_min(neg(d))
    if m is None:
        return vec(val.any_point())
    return vec(z)


def segment_chain_monotonicity(T, u1, u2, window_supplier=None, v1=None, v2=None, depth=6) -> ChainCertificate:
    """Chain semilocal monotonicity windows along ``[u1, u2]``.

    Each link ``[u_j, u_{j+1}]`` lies in one window with modulus 0, so
    ``<v_{j+1} - v_j, u2 - u1> >= 0``; the products telescope to
    ``<v2 - v1, u2 - u1>``.
    """
    u1, u2 = vec(u1), vec(u2)
    d = sub(u2, u1)
    for t in [ZERO, ONE] + dyadic_parameters(depth):
        x = add(u1, scale(t, d))
        if not in_domain(T, x):
            raise SegmentLeavesDomain(f"segment leaves the domain at t={t}", t, x)
    if window_supplier is None:
        def window_supplier(u):
            return semilocal_hypomonotonicity(T, u)
    L2 = norm2(d)
    ts, windows = [ZERO], []
    t = ZERO
    while t < 1:
        x = add(u1, scale(t, d))
        win = window_supplier(x)
        if win is None or win.modulus != 0:
            raise WindowNotFound(f"no monotone window at t={t}", x)
        windows.append(win)
        # largest dyadic step that stays inside the closed ball
        step = ONE - t
        while step * step * L2 > win.radius ** 2:
            step /= 2
        t = min(ONE, t + step)
        ts.append(t)
    pts = []
    for k, t in enumerate(ts):
        x = add(u1, scale(t, d))
        if k == 0 and v1 is not None:
            v = vec(v1)
        elif k == len(ts) - 1 and v2 is not None:
            v = vec(v2)
        else:
            v = _pick_value(T, x, d, "low")
        pts.append((x, v))
    prods = tuple(dot(sub(pts[k + 1][1], pts[k][1]), d) for k in range(len(pts) - 1))
    total = sum(prods, ZERO)
    return ChainCertificate(tuple(ts), tuple(pts), prods, total, tuple(windows))


# --------------------------------------------------------------------------
# Minty resolvent test


@dataclass
class MintyReport:
    s: Fraction
    r_hat: Fraction
    coverage: float
    solutions: tuple  # (y, [u, ...])
    multivalued: tuple
    lipschitz_ratio: float
    lipschitz_bound: float
    lipschitz_ok: bool

    @property
    def single_valued(self) -> bool:
        return not self.multivalued

    def to_json(self) -> dict:
        return {"s": _num(self.s), "r_hat": _num(self.r_hat), "coverage": self.coverage,
                "single_valued": self.single_valued,
                "multivalued": [{"y": to_json_vec(y), "u": [to_json_vec(u) for u in us]} for y, us in self.multivalued],
                "lipschitz_ratio": self.lipschitz_ratio, "lipschitz_bound": self.lipschitz_bound,
                "lipschitz_ok": self.lipschitz_ok, "grid": len(self.solutions)}


def default_shift(r_hat):
    return max(2 * r_hat, r_hat + 1)


def resolvent_points(T, s, y):
    """All ``u`` with ``y in T(u) + s u``; a non-singleton piece gives ``[None]``."""
    y = vec(y)
    n = T.dim
    F = smooth_form(T)
    if F is not None and not is_compilable(T):
        val = _invert_smooth(F.shifted(s), y)
        return list(val.points)
    if not is_compilable(T):
        raise UnsupportedVariant("resolvent needs a compilable operator or a 1-D rational map")
    out = []
    for P in shift_pieces(graph_pieces(T), n, s):
        S = P.fix(list(range(n, 2 * n)), y)
        if S.is_empty():
            continue
        pt = S.as_point()
        out.append(pt)
    uniq = list(dict.fromkeys(out))
    return uniq


def minty_surjectivity_test(T, s, y_grid, r_hat=ZERO) -> MintyReport:
    s, r_hat = q(s), q(r_hat)
    if s <= r_hat:
        raise ShiftTooSmall(f"s={s} must exceed the modulus r={r_hat}")
    ys = [vec(y) for y in y_grid]
    sols = pmap(lambda y: (y, resolvent_points(T, s, y)), ys)
    solved = [(y, us) for y, us in sols if us]
    multi = tuple((y, [u for u in us if u is not None]) for y, us in solved if len(us) > 1 or None in us)
    single = [(np.array([float(x) for x in y]), np.array([float(x) for x in us[0]]))
              for y, us in solved if len(us) == 1 and us[0] is not None]
    bound = 1.0 / float(s - r_hat)
    ratio = 0.0
    for (y1, x1), (y2, x2) in itertools.combinations(single, 2):
        dy = float(np.linalg.norm(y1 - y2))
        if dy > 0:
            ratio = max(ratio, float(np.linalg.norm(x1 - x2)) / dy)
    coverage = len(solved) / len(ys) if ys else 0.0
    return MintyReport(s, r_hat, coverage, tuple(sols), multi, ratio, bound,
                       ratio <= bound * (1 + 1e-9))


# --------------------------------------------------------------------------
# decision


@dataclass
class Verdict:
    verdict: str
    route: str | None = None
    kappa: object = None
    reason: str | None = None
    qualifier: str | None = None
    exactness: str = EXACT
    certificates: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {"verdict": self.verdict}
        if self.route is not None:
            d["route"] = self.route
        if self.kappa is not None:
            d["kappa"] = _num(self.kappa)
        if self.reason is not None:
            d["reason"] = self.reason
        if self.qualifier is not None:
            d["qualifier"] = self.qualifier
        d["exactness"] = self.exactness
        d["certificates"] = self.certificates
        d["witnesses"] = self.witnesses
        return d


@dataclass(frozen=True)
class DecisionConfig:
    region: tuple = ((-2, 2),)
    density: int = 5
    seed: int = 0
    jitter: float = 0.0
    kind: str = REGULAR
    kappa: Fraction = ZERO
    route: str = "auto"  # or "semilocal"
    radii: tuple = DEFAULT_RADII
    schedule: tuple = DEFAULT_SCHEDULE

    def sample_config(self, n) -> SampleConfig:
        region = self.region if len(self.region) == n else tuple(self.region[:1]) * n
        return SampleConfig.make(region, self.density, self.seed, self.jitter)


def local_pair_search(T, u, directions, radii=(Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000))):
    """A pair with negative product near ``u`` along the given directions."""
    for d in directions:
        if norm2(d) == 0:
            continue
        for t in radii:
            for sgn in (1, -1):
                res = close_pair(T, u, scale(sgn, d), t)
                if res is not None and res[1] < 0:
                    return res[2]
    return None


def _recheck_negative(pair):
    (u1, v1), (u2, v2) = pair
    return dot(sub(v1, v2), sub(u1, u2)) < 0


def maximality_decision(T, config: DecisionConfig = DecisionConfig()) -> Verdict:
    """Maximal monotonicity via the coderivative characterizations.

    Refutations come first: any pair with a negative product settles
    NotMonotone.  A failed coderivative condition with an exact witness
    settles NotMaximalMonotone.  Positive verdicts need exact PSD evidence
    plus a finite hypomonotonicity estimate (global route), or semilocal
    windows and a convex domain (semilocal route).
    """
    n = T.dim
    cfg = config.sample_config(n)
    samples = graph_sample(T, cfg)
    pw = pairwise_monotone_test(T, samples)
    hy = hypomonotonicity_estimate(T, samples, config.schedule)
    psd = psd_coderivative_check(T, config.kind, 0, default_plan(T, cfg, True))
    F = smooth_form(T)
    qualifier = "certified-on-region" if F is not None and not is_compilable(T) else None
    certs = {"pairwise": pw.to_json(), "hypomonotonicity": hy.to_json(), "psd": psd.to_json(),
             "samples": len(samples), "config": cfg.to_json()}
    exactness = EXACT if psd.exact else "sampled"

    pair = pw.witness if not pw.monotone else None
    if pair is None and hy.negative_pair is not None and _recheck_negative(hy.negative_pair):
        pair = hy.negative_pair
    if pair is None and not psd.passed and psd.witness is not None:
        u = vec(psd.witness["u"])
        w = vec(psd.witness["w"])
        pair = local_pair_search(T, u, [w] + axis_directions(n))
    if pair is not None and _recheck_negative(pair):
        (u1, v1), (u2, v2) = pair
        prod = dot(sub(v1, v2), sub(u1, u2))
        if hy.diverged:
            certs["not_hypomonotone"] = True
        return Verdict("NotMonotone", exactness=EXACT, certificates=certs,
                       witnesses={"pair": _pair_json(pair), "product": _num(prod)})
    if not psd.passed:
        if psd.exact:
            return Verdict("NotMaximalMonotone", reason="coderivative condition fails at an exact witness",
                           exactness=EXACT, certificates=certs, witnesses={"psd": psd.witness})
        return Verdict("Inconclusive", reason="coderivative condition fails on sampled values only",
                       exactness="sampled", certificates=certs, witnesses={"psd": psd.witness})
    if hy.diverged:
        return Verdict("NotHypomonotone", reason="close-pair quotients diverge", exactness=exactness,
                       certificates=certs, witnesses={"pair": _pair_json(hy.witness)})
    if not psd.exact:
        return Verdict("Inconclusive", reason="coderivative condition checked on samples only",
                       exactness="sampled", certificates=certs)

    verdict = None
    if config.route == "auto":
        verdict = Verdict("MaximalMonotone", route="global", qualifier=qualifier, exactness=EXACT,
                          certificates=certs)
    else:
        probe = domain_convexity_probe(T, samples)
        certs["domain_probe"] = probe.to_json()
        centers = list(dict.fromkeys(vec(p.u) for p in samples))
        windows = [semilocal_hypomonotonicity(T, c, config.radii) for c in centers]
        certs["windows"] = [w.to_json() if w is not None else None for w in windows]
        if not probe.passed:
            return Verdict("Inconclusive", reason="domain is not convex", exactness=EXACT, certificates=certs,
                           witnesses={"domain": probe.to_json()})
        if any(w is None for w in windows):
            return Verdict("Inconclusive", reason="no semilocal window at some probed point",
                           exactness=EXACT, certificates=certs)
        verdict = Verdict("MaximalMonotone", route="semilocal-convex-domain", qualifier=qualifier,
                          exactness=EXACT, certificates=certs)
    kappa = q(config.kappa)
    if kappa > 0:
        strong = psd_coderivative_check(T, config.kind, kappa, default_plan(T, cfg, True))
        certs["strong_psd"] = strong.to_json()
        if strong.passed and strong.exact:
            verdict.verdict = "StronglyMaximalMonotone"
            verdict.kappa = kappa
    return verdict
