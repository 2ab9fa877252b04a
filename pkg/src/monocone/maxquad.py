"""Finite maxima of quadratics and their subdifferential graphs.

``f(x) = max_i  1/2 x^T Q_i x + c_i^T x + d_i``.  Such functions are
lower-C2, their regular and limiting subdifferentials agree, and at a point
they equal the convex hull of the active pieces' gradients.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy as sp

from . import lp
from .errors import NotCompilable, SpecFormatError
from .polyhedral import HPolyhedron, polytope_from_vertices
from .rational import (
    ZERO, ONE, add, dot, identity, mat, matvec, q, sub, to_json_number, to_json_vec, transpose, unit, vec,
)

FLOAT_ACTIVITY_TOL = 1e-10


@dataclass(frozen=True)
class QuadPiece:
    Q: tuple
    c: tuple
    d: Fraction

    def value(self, x):
        return dot(x, matvec(self.Q, x)) / 2 + dot(self.c, x) + self.d

    def gradient(self, x):
        return add(matvec(self.Q, x), self.c)


@dataclass(frozen=True)
class MaxQuadFunction:
    dim: int
    pieces: tuple

    @classmethod
    def make(cls, pieces, dim=None) -> "MaxQuadFunction":
        out = []
        for p in pieces:
            if isinstance(p, QuadPiece):
                out.append(p)
                continue
            if isinstance(p, dict):
                Q, c, d = p.get("Q"), p.get("c"), p.get("d", 0)
            else:
                Q, c, d = p
            c = vec(c)
            n = len(c)
            Q = mat(Q) if Q is not None else tuple((ZERO,) * n for _ in range(n))
            out.append(QuadPiece(Q, c, q(d)))
        if not out:
            raise SpecFormatError("a max-of-quadratics needs at least one piece")
        n = len(out[0].c) if dim is None else int(dim)
        for p in out:
            if len(p.c) != n or len(p.Q) != n or any(len(r) != n for r in p.Q):
                raise SpecFormatError(f"piece dimensions do not match n={n}")
            if any(p.Q[i][j] != p.Q[j][i] for i in range(n) for j in range(n)):
                raise SpecFormatError("quadratic parts must be symmetric")
        return cls(n, tuple(out))

    @classmethod
    def from_json(cls, d) -> "MaxQuadFunction":
        if "pieces" not in d:
            raise SpecFormatError("function spec needs a 'pieces' list")
        return cls.make(d["pieces"], d.get("dim"))

    def to_json(self) -> dict:
        return {"dim": self.dim, "pieces": [
            {"Q": [to_json_vec(r) for r in p.Q], "c": to_json_vec(p.c), "d": to_json_number(p.d)}
            for p in self.pieces]}

    # -- evaluation -------------------------------------------------------
    def piece_values(self, x):
        x = vec(x)
        return [p.value(x) for p in self.pieces]

    def value(self, x):
        return max(self.piece_values(x))

    def active(self, x, tol=None) -> tuple:
        """Indices of active pieces; exact (tol 0) unless a tolerance is given."""
        vals = self.piece_values(x)
        m = max(vals)
        if tol is None or tol == 0:
            return tuple(i for i, v in enumerate(vals) if v == m)
        return tuple(i for i, v in enumerate(vals) if v >= m - q(tol))

    def gradients(self, x, idx=None):
        x = vec(x)
        idx = range(len(self.pieces)) if idx is None else idx
        return [self.pieces[i].gradient(x) for i in idx]

    @property
    def shared_Q(self):
        Q0 = self.pieces[0].Q
        return Q0 if all(p.Q == Q0 for p in self.pieces) else None

    def shifted(self, kappa) -> "MaxQuadFunction":
        """``f - kappa/2 |x|^2``."""
        k = q(kappa)
        n = self.dim
        return MaxQuadFunction(n, tuple(
            QuadPiece(tuple(tuple(p.Q[i][j] - (k if i == j else 0) for j in range(n)) for i in range(n)), p.c, p.d)
            for p in self.pieces))

    # -- float path for sweeps ---------------------------------------------
    @property
    def _arrays(self):
        Qs = np.array([[[float(x) for x in r] for r in p.Q] for p in self.pieces])
        cs = np.array([[float(x) for x in p.c] for p in self.pieces])
        ds = np.array([float(p.d) for p in self.pieces])
        return Qs, cs, ds

    def values_np(self, X):
        """Vectorized values at the rows of ``X`` (float)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Qs, cs, ds = self._arrays
        quad = 0.5 * np.einsum("ni,kij,nj->nk", X, Qs, X)
        return np.max(quad + X @ cs.T + ds, axis=1)

    def lipschitz_gradient_bound(self) -> float:
        """Upper bound on the gradient Lipschitz moduli of all pieces."""
        Qs, _, _ = self._arrays
        return float(max(np.linalg.norm(Qk, 2) for Qk in Qs))


@dataclass(frozen=True)
class ShiftedFunction:
    """``g(x) = f(x) - kappa/2 |x|^2``."""

    base: MaxQuadFunction
    kappa: Fraction

    @property
    def function(self) -> MaxQuadFunction:
        return self.base.shifted(self.kappa)


def as_function(f) -> MaxQuadFunction:
    return f.function if isinstance(f, ShiftedFunction) else f


class Polytope:
    """Convex hull of finitely many points, with an H-form on demand."""

    def __init__(self, vertices):
        self.vertices = tuple(dict.fromkeys(vec(v) for v in vertices))

    @property
    def hull(self) -> HPolyhedron:
        return polytope_from_vertices(self.vertices)

    def is_singleton(self) -> bool:
        return len(self.vertices) == 1

    def __repr__(self):
        return f"Polytope({[tuple(map(str, v)) for v in self.vertices]})"


def subdifferential(f, x, activity_tol=None) -> Polytope:
    """``conv{grad f_i(x) : i active}``; exact for rational ``x`` and tol 0."""
    f = as_function(f)
    if activity_tol is None and any(isinstance(t, float) for t in x):
        activity_tol = FLOAT_ACTIVITY_TOL
    idx = f.active(x, activity_tol)
    return Polytope(f.gradients(x, idx))


# --------------------------------------------------------------------------
# compiling gph of the subdifferential


def compile_subdifferential_graph(f) -> list:
    """Pieces of gph(subdifferential of f) in (u, v) coordinates, exactly.

    Supported: n = 1 with rational breakpoints, or any n with one shared
    quadratic part.
    """
    f = as_function(f)
    if f.dim == 1:
        return _compile_1d(f)
    if f.shared_Q is not None:
        return _compile_shared(f)
    raise NotCompilable("distinct quadratic parts in dimension >= 2 have no polyhedral graph")


def _compile_shared(f: MaxQuadFunction) -> list:
    n = f.dim
    Q = f.shared_Q
    aff = list(dict.fromkeys((p.c, p.d) for p in f.pieces))
    m = len(aff)
    out = []
    for k in range(1, m + 1):
        for A in itertools.combinations(range(m), k):
            i0 = A[0]
            c0, d0 = aff[i0]
            E = [sub(aff[j][0], c0) for j in A[1:]]
            fr = [d0 - aff[j][1] for j in A[1:]]
            rest = [j for j in range(m) if j not in A]
            S = [sub(aff[j][0], c0) for j in rest]
            sb = [d0 - aff[j][1] for j in rest]
            # keep only exact active sets: the others strictly below
            t, _ = lp.max_slack(S, sb, (), (), E, fr, nvars=n)
            if t is None or (rest and t <= 0):
                continue
            region = HPolyhedron.make(S, sb, E, fr, dim=n)
            hull = polytope_from_vertices([aff[j][0] for j in A])
            # (x, y) in region x hull, graph point (x, Qx + y): pull back along y = v - Qx
            M = [unit(2 * n, i) for i in range(n)]
            for i in range(n):
                M.append(tuple([-Q[i][j] for j in range(n)] + [ONE if j == i else ZERO for j in range(n)]))
            out.append(region.product(hull).pullback(M))
    return out


def _breakpoints_1d(f: MaxQuadFunction) -> list:
    x = sp.Symbol("x")
    pts = set()
    for p1, p2 in itertools.combinations(f.pieces, 2):
        a = (p1.Q[0][0] - p2.Q[0][0]) / 2
        b = p1.c[0] - p2.c[0]
        c = p1.d - p2.d
        poly = sp.Poly(sp.Rational(a.numerator, a.denominator) * x ** 2
                       + sp.Rational(b.numerator, b.denominator) * x
                       + sp.Rational(c.numerator, c.denominator), x)
        if poly.is_zero or poly.is_ground:
            continue
        for r in poly.real_roots():
            if not r.is_Rational:
                raise NotCompilable(f"irrational breakpoint {r} between pieces")
            pts.add(Fraction(int(r.p), int(r.q)))
    return sorted(pts)


def _compile_1d(f: MaxQuadFunction) -> list:
    bps = _breakpoints_1d(f)
    # test points inside each open interval
    if bps:
        tests = [bps[0] - 1] + [(a + b) / 2 for a, b in zip(bps, bps[1:])] + [bps[-1] + 1]
    else:
        tests = [ZERO]
    bounds = [None] + bps + [None]
    out = []
    for k, t in enumerate(tests):
        i = f.active((t,))[0]
        p = f.pieces[i]
        a, c = p.Q[0][0], p.c[0]
        lo, hi = bounds[k], bounds[k + 1]
        A, b = [], []
        if lo is not None:
            A.append((-ONE, ZERO))
            b.append(-lo)
        if hi is not None:
            A.append((ONE, ZERO))
            b.append(hi)
        # v = a u + c
        out.append(HPolyhedron.make(A, b, [(-a, ONE)], [c], dim=2))
    for x0 in bps:
        grads = sorted(set(g[0] for g in f.gradients((x0,), f.active((x0,)))))
        if len(grads) > 1:
            out.append(HPolyhedron.make([(ZERO, -ONE), (ZERO, ONE)], [-grads[0], grads[-1]],
                                        [(ONE, ZERO)], [x0], dim=2))
    return out
