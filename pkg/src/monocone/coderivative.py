"""Regular and limiting coderivatives.

``z`` is in the coderivative of ``T`` at ``(u, v)`` in direction ``w`` iff
``(z, -w)`` is normal to gph T at ``(u, v)``.  For a polyhedral graph the
normal cone is a polyhedral cone in R^{2n}; fixing the second block at
``-w`` leaves a polyhedron of ``z``.  In R^n the mixed and normal limiting
coderivatives coincide, so there is a single limiting kind.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotCompilable, NotOnGraph, UnsupportedVariant
from .maxquad import MaxQuadFunction
from .operators import (
    GraphPoint, MaxQuadSubdiff, ValueSet, evaluate, graph_pieces, is_compilable, smooth_form,
)
from .polyhedral import HPolyhedron, PolyCone, regular_normal_cone_union
from .rational import ZERO, add, dot, matvec, q, scale, sub, to_json_vec, transpose, vec
from .strata import limiting_family

REGULAR = "regular"
LIMITING = "limiting"
EXACT = "exact"
SAMPLED = "sampled"

# sampled fallback schedule
R0 = Fraction(1, 10)
HALVINGS = 12
SHELL_DIRECTIONS = 64
DEDUP_TOL = 1e-8


@dataclass(frozen=True)
class CoderivativeValue:
    w: tuple
    kind: str
    value: ValueSet
    exactness: str = EXACT
    schedule: dict | None = None

    @property
    def exact(self) -> bool:
        return self.exactness == EXACT

    def is_empty(self) -> bool:
        return self.value.is_empty()

    def contains(self, z, tol=0) -> bool:
        return self.value.contains(z, tol)

    def support_min(self, w):
        return self.value.support_min(w)

    def to_json(self) -> dict:
        d = {"w": to_json_vec(self.w), "kind": self.kind, "value": self.value.to_json(),
             "exactness": self.exactness}
        if self.schedule is not None:
            d["schedule"] = self.schedule
        return d


SecondOrderValue = CoderivativeValue


def _point(p):
    if isinstance(p, GraphPoint):
        return vec(p.u), vec(p.v)
    u, v = p
    return vec(u), vec(v)


def cone_slice(cone: PolyCone, w, n) -> HPolyhedron:
    """``{z : (z, -w) in cone}``."""
    A = tuple(g[:n] for g in cone.G)
    b = tuple(dot(g[n:], w) for g in cone.G)
    E = tuple(h[:n] for h in cone.H)
    f = tuple(dot(h[n:], w) for h in cone.H)
    return HPolyhedron(n, A, b, E, f).clean()


def _check_on_graph(T, u, v):
    if not evaluate(T, u).contains(v):
        raise NotOnGraph(f"({[str(x) for x in u]}, {[str(x) for x in v]}) is not on the graph")


def _smooth_value(F, u, w):
    J = F.jacobian(u)
    return ValueSet.of_points([matvec(transpose(J), w)])


def regular_coderivative(T, p, w) -> CoderivativeValue:
    u, v = _point(p)
    w = vec(w)
    n = T.dim
    F = smooth_form(T)
    if F is not None and not is_compilable(T):
        if F(u) is None or any(abs(float(a) - float(b)) > 1e-12 for a, b in zip(F(u), v)):
            raise NotOnGraph("point is not on the graph of the smooth map")
        return CoderivativeValue(w, REGULAR, _smooth_value(F, u, w))
    if is_compilable(T):
        _check_on_graph(T, u, v)
        cone = regular_normal_cone_union(graph_pieces(T), u + v)
        return CoderivativeValue(w, REGULAR, ValueSet.simplified([cone_slice(cone, w, n)]))
    if isinstance(T, MaxQuadSubdiff):
        _check_on_graph(T, u, v)
        f = T.function
        act = f.active(u)
        if len(act) == 1:
            # locally f is the single smooth piece
            return CoderivativeValue(w, REGULAR, ValueSet.of_points([matvec(f.pieces[act[0]].Q, w)]))
        raise UnsupportedVariant("regular coderivative at a kink of a non-compilable max-of-quadratics")
    raise UnsupportedVariant(f"no regular coderivative for {type(T).__name__}")


def limiting_coderivative(T, p, w, seed=0) -> CoderivativeValue:
    u, v = _point(p)
    w = vec(w)
    n = T.dim
    F = smooth_form(T)
    if F is not None and not is_compilable(T):
        val = regular_coderivative(T, (u, v), w)
        return CoderivativeValue(w, LIMITING, val.value)
    if is_compilable(T):
        _check_on_graph(T, u, v)
        slices = [cone_slice(c, w, n) for _, c in limiting_family(graph_pieces(T), u + v)]
        return CoderivativeValue(w, LIMITING, ValueSet.simplified(slices))
    if isinstance(T, MaxQuadSubdiff):
        _check_on_graph(T, u, v)
        return _sampled_limiting(T.function, u, v, w, seed)
    raise UnsupportedVariant(f"no limiting coderivative for {type(T).__name__}")


def shell_directions(n, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = rng.normal(size=n)
        d /= np.linalg.norm(d)
        out.append(tuple(Fraction(round(x * 2 ** 20), 2 ** 20) for x in d))
    return out


def _sampled_limiting(f: MaxQuadFunction, u, v, w, seed) -> CoderivativeValue:
    """Union of regular values at graph points approaching ``(u, v)``.

    Near ``u`` almost every point has one active piece ``i``; its graph point
    ``grad f_i(u')`` tends to ``grad f_i(u)``, so piece ``i`` contributes only
    when that limit equals ``v``.
    """
    n = f.dim
    dirs = shell_directions(n, SHELL_DIRECTIONS, seed)
    found = []
    for k in range(HALVINGS + 1):
        r = R0 / 2 ** k
        for d in dirs:
            x = add(u, scale(r, d))
            act = f.active(x)
            if len(act) != 1:
                continue
            i = act[0]
            if f.pieces[i].gradient(u) != v:
                continue
            z = matvec(f.pieces[i].Q, w)
            if not any(max(abs(float(a - b)) for a, b in zip(z, y)) <= DEDUP_TOL for y in found):
                found.append(z)
    exact_pts = found
    schedule = {"r0": float(R0), "halvings": HALVINGS, "directions": SHELL_DIRECTIONS, "seed": seed,
                "dedup_tol": DEDUP_TOL}
    return CoderivativeValue(w, LIMITING, ValueSet.of_points(exact_pts), SAMPLED, schedule)


def coderivative(T, p, w, kind=REGULAR, seed=0) -> CoderivativeValue:
    if kind == REGULAR:
        return regular_coderivative(T, p, w)
    if kind == LIMITING:
        return limiting_coderivative(T, p, w, seed)
    raise ValueError(f"unknown coderivative kind {kind!r}")


def coderivative_shift(T, s, p, w, kind=REGULAR) -> CoderivativeValue:
    """Coderivative of ``T + sI`` at ``(u, v)`` via the value of ``T`` at ``(u, v - s u)`` plus ``s w``."""
    u, v = _point(p)
    s = q(s)
    w = vec(w)
    base = coderivative(T, (u, sub(v, scale(s, u))), w, kind)
    return CoderivativeValue(w, base.kind, base.value.translate(scale(s, w)), base.exactness, base.schedule)


def second_order_combined(f: MaxQuadFunction, p, w) -> SecondOrderValue:
    """Regular coderivative of the subdifferential mapping."""
    return regular_coderivative(MaxQuadSubdiff(f), p, w)


def second_order_limiting(f: MaxQuadFunction, p, w, seed=0) -> SecondOrderValue:
    return limiting_coderivative(MaxQuadSubdiff(f), p, w, seed)
