"""Exact polyhedra and polyhedral cones over the rationals.

``HPolyhedron`` is ``{x : A x <= b, E x = f}``.  ``PolyCone`` keeps the
halfspace form ``{x : G x <= 0, H x = 0}`` and converts to generators
(rays plus a lineality basis) on demand by exact enumeration, which is
brute force over row subsets and therefore meant for small dimensions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

from . import lp
from .errors import DimensionMismatch, DimensionTooLarge, EmptySet, NotMember
from .rational import (
    ZERO, ONE, Vec, add, canonical_direction, canonical_line, dot, is_zero,
    matvec, neg, nullspace, q, rank, scale, to_json_vec, unit, vec,
)

# Generator enumeration is combinatorial in the number of rows; it is only
# offered for small ambient dimension.
MAX_ENUM_DIM = 4
MAX_CONE_DIM = 8


@dataclass(frozen=True)
class HPolyhedron:
    """``{x in Q^dim : A x <= b, E x = f}`` with exact rational data."""

    dim: int
    A: tuple = ()
    b: tuple = ()
    E: tuple = ()
    f: tuple = ()

    @classmethod
    def make(cls, A=(), b=(), E=(), f=(), dim=None) -> "HPolyhedron":
        A = tuple(vec(r) for r in A)
        E = tuple(vec(r) for r in E)
        b, f = vec(b), vec(f)
        if dim is None:
            rows = A or E
            if not rows:
                raise ValueError("dimension needed for a polyhedron without rows")
            dim = len(rows[0])
        if len(A) != len(b) or len(E) != len(f):
            raise DimensionMismatch("row count and right-hand side length differ")
        for r in A + E:
            if len(r) != dim:
                raise DimensionMismatch(f"row of length {len(r)} in dimension {dim}")
        return cls(dim, A, b, E, f)

    @classmethod
    def whole(cls, dim) -> "HPolyhedron":
        return cls(dim)

    @classmethod
    def point(cls, x) -> "HPolyhedron":
        x = vec(x)
        n = len(x)
        return cls(n, (), (), tuple(unit(n, i) for i in range(n)), x)

    @classmethod
    def box(cls, lo, hi) -> "HPolyhedron":
        """Axis box; ``None`` entries are infinite bounds and drop their row."""
        n = len(lo)
        A, b = [], []
        for i in range(n):
            if hi[i] is not None:
                A.append(unit(n, i))
                b.append(q(hi[i]))
            if lo[i] is not None:
                A.append(unit(n, i, -1))
                b.append(-q(lo[i]))
        return cls.make(A, b, dim=n)

    # -- membership -------------------------------------------------------
    def check_dim(self, x):
        if len(x) != self.dim:
            raise DimensionMismatch(f"point of length {len(x)} for a polyhedron in dimension {self.dim}")

    def contains(self, x) -> bool:
        x = vec(x)
        self.check_dim(x)
        return (all(dot(a, x) <= bi for a, bi in zip(self.A, self.b))
                and all(dot(e, x) == fi for e, fi in zip(self.E, self.f)))

    def tight_rows(self, x) -> frozenset:
        x = vec(x)
        return frozenset(i for i, (a, bi) in enumerate(zip(self.A, self.b)) if dot(a, x) == bi)

    # -- LP-backed queries --------------------------------------------------
    def feasible_point(self):
        return _feasible_point(self)

    def is_empty(self) -> bool:
        return self.feasible_point() is None

    def support_min(self, w):
        """``(value, argmin_or_ray)``; value is ``None`` for minus infinity."""
        w = vec(w)
        self.check_dim(w)
        res = lp.linprog(w, self.A, self.b, self.E, self.f, nvars=self.dim)
        if res.status == lp.INFEASIBLE:
            raise EmptySet("support_min over an empty polyhedron")
        if res.status == lp.UNBOUNDED:
            return None, res.ray
        return res.value, res.x

    def implicit_equalities(self) -> frozenset:
        """Inequality rows that hold with equality on the whole polyhedron."""
        return _implicit_equalities(self)

    def relint_point(self):
        """A point in the relative interior, or None if empty."""
        return _relint_point(self)

    def as_point(self):
        """The unique point if this polyhedron is a singleton, else None."""
        x0 = self.feasible_point()
        if x0 is None:
            return None
        for i in range(self.dim):
            e = unit(self.dim, i)
            lo, _ = self.support_min(e)
            hi, _ = self.support_min(neg(e))
            if lo is None or hi is None or lo != -hi:
                return None
        return tuple(self.support_min(unit(self.dim, i))[0] for i in range(self.dim))

    def is_bounded(self) -> bool:
        for i in range(self.dim):
            for s in (1, -1):
                v, _ = self.support_min(unit(self.dim, i, s))
                if v is None:
                    return False
        return True

    # -- constructions -----------------------------------------------------
    def intersect(self, other: "HPolyhedron") -> "HPolyhedron":
        if other.dim != self.dim:
            raise DimensionMismatch("intersecting polyhedra of different dimension")
        return HPolyhedron(self.dim, self.A + other.A, self.b + other.b,
                           self.E + other.E, self.f + other.f)

    def translate(self, t) -> "HPolyhedron":
        """``self + t``."""
        t = vec(t)
        return HPolyhedron(self.dim, self.A, tuple(bi + dot(a, t) for a, bi in zip(self.A, self.b)),
                           self.E, tuple(fi + dot(e, t) for e, fi in zip(self.E, self.f)))

    def pullback(self, M, c=None) -> "HPolyhedron":
        """``{y : M y + c in self}`` for a ``dim x k`` matrix ``M``."""
        M = tuple(vec(r) for r in M)
        k = len(M[0]) if M else 0
        c = vec(c) if c is not None else (ZERO,) * self.dim

        def row(a):
            return tuple(sum((a[i] * M[i][j] for i in range(self.dim)), ZERO) for j in range(k))

        A = tuple(row(a) for a in self.A)
        b = tuple(bi - dot(a, c) for a, bi in zip(self.A, self.b))
        E = tuple(row(e) for e in self.E)
        f = tuple(fi - dot(e, c) for e, fi in zip(self.E, self.f))
        return HPolyhedron(k, A, b, E, f)

    def fix(self, coords: Sequence[int], values) -> "HPolyhedron":
        """Slice by fixing ``x[coords] = values``; result lives on the other coordinates."""
        values = vec(values)
        keep = [i for i in range(self.dim) if i not in coords]
        fixed = dict(zip(coords, values))

        def split(a):
            return (tuple(a[i] for i in keep), sum((a[i] * v for i, v in fixed.items()), ZERO))

        A, b, E, f = [], [], [], []
        for a, bi in zip(self.A, self.b):
            r, s = split(a)
            if is_zero(r) and bi - s >= 0:
                continue
            A.append(r)
            b.append(bi - s)
        for e, fi in zip(self.E, self.f):
            r, s = split(e)
            if is_zero(r) and fi == s:
                continue
            E.append(r)
            f.append(fi - s)
        return HPolyhedron(len(keep), tuple(A), tuple(b), tuple(E), tuple(f))

    def clean(self) -> "HPolyhedron":
        """Drop rows with zero coefficients that every point satisfies."""
        keep = [i for i, (a, bi) in enumerate(zip(self.A, self.b)) if not (is_zero(a) and bi >= 0)]
        keep_e = [i for i, (e, fi) in enumerate(zip(self.E, self.f)) if not (is_zero(e) and fi == 0)]
        return HPolyhedron(self.dim, tuple(self.A[i] for i in keep), tuple(self.b[i] for i in keep),
                           tuple(self.E[i] for i in keep_e), tuple(self.f[i] for i in keep_e))

    def product(self, other: "HPolyhedron") -> "HPolyhedron":
        z1, z2 = (ZERO,) * other.dim, (ZERO,) * self.dim
        A = tuple(a + z1 for a in self.A) + tuple(z2 + a for a in other.A)
        E = tuple(e + z1 for e in self.E) + tuple(z2 + e for e in other.E)
        return HPolyhedron(self.dim + other.dim, A, self.b + other.b, E, self.f + other.f)

    def to_json(self) -> dict:
        d = {"dim": self.dim, "A": [to_json_vec(r) for r in self.A], "b": to_json_vec(self.b)}
        if self.E:
            d["E"] = [to_json_vec(r) for r in self.E]
            d["f"] = to_json_vec(self.f)
        return d

    @classmethod
    def from_json(cls, d) -> "HPolyhedron":
        return cls.make(d.get("A", ()), d.get("b", ()), d.get("E", ()), d.get("f", ()), dim=d.get("dim"))


@lru_cache(maxsize=65536)
def _feasible_point(P: HPolyhedron):
    return lp.feasible_point(P.A, P.b, P.E, P.f, nvars=P.dim)


@lru_cache(maxsize=16384)
def _implicit_equalities(P: HPolyhedron) -> frozenset:
    if P.is_empty():
        return frozenset(range(len(P.A)))
    eq = set()
    for i, (a, bi) in enumerate(zip(P.A, P.b)):
        res = lp.linprog(a, P.A, P.b, P.E, P.f, nvars=P.dim)  # min a.x
        if res.ok and res.value == bi:
            eq.add(i)
    return frozenset(eq)


@lru_cache(maxsize=16384)
def _relint_point(P: HPolyhedron):
    if P.is_empty():
        return None
    eq = P.implicit_equalities()
    strict = [i for i in range(len(P.A)) if i not in eq]
    E = P.E + tuple(P.A[i] for i in eq)
    f = P.f + tuple(P.b[i] for i in eq)
    t, x = lp.max_slack([P.A[i] for i in strict], [P.b[i] for i in strict], (), (), E, f, nvars=P.dim)
    return x


# --------------------------------------------------------------------------
# cones


class Generators(NamedTuple):
    rays: tuple
    lineality: tuple


@lru_cache(maxsize=32768)
def _cone_generators(G: tuple, H: tuple, dim: int) -> Generators:
    if dim > MAX_CONE_DIM:
        raise DimensionTooLarge(f"cone enumeration limited to dimension {MAX_CONE_DIM}, got {dim}")
    G = tuple(dict.fromkeys(canonical_direction(g) for g in G if not is_zero(g)))
    H = tuple(h for h in H if not is_zero(h))
    rows = list(G) + list(H)
    lin = nullspace(rows, dim) if rows else [unit(dim, i) for i in range(dim)]
    lin = tuple(canonical_direction(v) for v in lin)
    Hp = list(H) + list(lin)
    r0 = rank(Hp) if Hp else 0
    k = dim - r0
    rays = []
    if k >= 1:
        seen = set()
        for I in itertools.combinations(range(len(G)), k - 1):
            M = Hp + [G[i] for i in I]
            if M and rank(M) != dim - 1:
                continue
            ns = nullspace(M, dim) if M else [unit(dim, 0)]
            if len(ns) != 1:
                continue
            r = ns[0]
            for cand in (r, neg(r)):
                if all(dot(g, cand) <= 0 for g in G):
                    c = canonical_direction(cand)
                    if c not in seen:
                        seen.add(c)
                        rays.append(c)
    return Generators(tuple(rays), lin)


@dataclass(frozen=True)
class PolyCone:
    """Polyhedral cone ``{x : G x <= 0, H x = 0}`` in ``Q^dim``."""

    dim: int
    G: tuple = ()
    H: tuple = ()

    @classmethod
    def from_halfspaces(cls, G=(), H=(), dim=None) -> "PolyCone":
        G = tuple(canonical_direction(g) for g in map(vec, G))
        H = tuple(canonical_line(h) for h in map(vec, H))
        if dim is None:
            dim = len((G or H)[0])
        G = tuple(sorted(set(g for g in G if not is_zero(g))))
        H = tuple(sorted(set(h for h in H if not is_zero(h))))
        return cls(dim, G, H)

    @classmethod
    def from_generators(cls, rays=(), lineality=(), dim=None) -> "PolyCone":
        """``cone(rays) + span(lineality)``."""
        rays = tuple(map(vec, rays))
        lineality = tuple(map(vec, lineality))
        if dim is None:
            dim = len((rays or lineality)[0])
        # the polar of the target cone is {y : R y <= 0, L y = 0}; its
        # generators are the halfspace rows of the target
        polar_gens = _cone_generators(tuple(canonical_direction(r) for r in rays if not is_zero(r)),
                                      tuple(l for l in lineality if not is_zero(l)), dim)
        return cls.from_halfspaces(polar_gens.rays, polar_gens.lineality, dim)

    @classmethod
    def zero(cls, dim) -> "PolyCone":
        return cls.from_halfspaces((), [unit(dim, i) for i in range(dim)], dim)

    @classmethod
    def whole(cls, dim) -> "PolyCone":
        return cls(dim)

    @cached_property
    def generators(self) -> Generators:
        return _cone_generators(self.G, self.H, self.dim)

    def contains(self, z) -> bool:
        z = vec(z)
        if len(z) != self.dim:
            raise DimensionMismatch("point and cone dimension differ")
        return all(dot(g, z) <= 0 for g in self.G) and all(dot(h, z) == 0 for h in self.H)

    def intersect(self, other: "PolyCone") -> "PolyCone":
        return PolyCone.from_halfspaces(self.G + other.G, self.H + other.H, self.dim)

    def contains_cone(self, other: "PolyCone") -> bool:
        gens = other.generators
        return all(self.contains(r) for r in gens.rays) and all(
            self.contains(l) and self.contains(neg(l)) for l in gens.lineality)

    def same_as(self, other: "PolyCone") -> bool:
        return self.dim == other.dim and self.contains_cone(other) and other.contains_cone(self)

    def is_zero_cone(self) -> bool:
        g = self.generators
        return not g.rays and not g.lineality

    def to_polyhedron(self) -> HPolyhedron:
        z = (ZERO,) * len(self.G)
        return HPolyhedron(self.dim, self.G, z, self.H, (ZERO,) * len(self.H))

    def to_json(self) -> dict:
        return {"dim": self.dim, "halfspaces": [to_json_vec(g) for g in self.G],
                "equalities": [to_json_vec(h) for h in self.H]}


def cone_polar(C: PolyCone) -> PolyCone:
    """Polar cone ``{y : <y, x> <= 0 for all x in C}``."""
    return PolyCone.from_generators(C.G, C.H, C.dim)


def cone_contains(C: PolyCone, z) -> bool:
    return C.contains(z)


class VertexRays(NamedTuple):
    vertices: tuple
    rays: tuple
    lineality: tuple


def vertex_ray_enumerate(P: HPolyhedron) -> VertexRays:
    """Vertices and extreme rays of ``P`` (of ``P`` modulo lineality if any)."""
    if P.dim > MAX_ENUM_DIM:
        raise DimensionTooLarge(f"vertex enumeration limited to dimension {MAX_ENUM_DIM}, got {P.dim}")
    return _vertex_ray_enumerate(P)


@lru_cache(maxsize=16384)
def _vertex_ray_enumerate(P: HPolyhedron) -> VertexRays:
    d = P.dim
    if P.is_empty():
        return VertexRays((), (), ())
    G = [tuple(a) + (-bi,) for a, bi in zip(P.A, P.b)] + [(ZERO,) * d + (-ONE,)]
    H = [tuple(e) + (-fi,) for e, fi in zip(P.E, P.f)]
    gens = _cone_generators(tuple(G), tuple(H), d + 1)
    verts, rays = [], []
    for r in gens.rays:
        if r[-1] > 0:
            verts.append(tuple(x / r[-1] for x in r[:-1]))
        else:
            rays.append(canonical_direction(r[:-1]))
    lin = tuple(canonical_direction(l[:-1]) for l in gens.lineality)
    return VertexRays(tuple(sorted(set(verts))), tuple(sorted(set(rays))), lin)


def polytope_from_vertices(points) -> HPolyhedron:
    """H-representation of ``conv(points)`` via the homogenizing cone."""
    pts = [vec(p) for p in points]
    if not pts:
        raise EmptySet("convex hull of no points")
    d = len(pts[0])
    pts = list(dict.fromkeys(pts))
    if len(pts) == 1:
        return HPolyhedron.point(pts[0])
    C = PolyCone.from_generators([p + (ONE,) for p in pts], (), d + 1)
    A = tuple(g[:-1] for g in C.G)
    b = tuple(-g[-1] for g in C.G)
    E = tuple(h[:-1] for h in C.H)
    f = tuple(-h[-1] for h in C.H)
    return HPolyhedron(d, A, b, E, f)


def support_min(S, w):
    """Exact ``inf <z, w>`` over a polyhedron or cone.

    Returns ``(value, witness)``: the value is ``None`` for minus infinity,
    in which case the witness is a recession ray with ``<ray, w> < 0``;
    otherwise it is a minimizer.
    """
    if isinstance(S, PolyCone):
        S = S.to_polyhedron()
    return S.support_min(w)


# --------------------------------------------------------------------------
# normal cones


def regular_normal_cone(P: HPolyhedron, x) -> PolyCone:
    """Normal cone of the convex polyhedron ``P`` at ``x`` (active-row normals)."""
    x = vec(x)
    if not P.contains(x):
        raise NotMember(f"{x} is not in the polyhedron")
    return normal_cone_from_rows(P, P.tight_rows(x))


def tangent_generators(P: HPolyhedron, tight: frozenset) -> Generators:
    """Generators of the tangent cone ``{d : A_J d <= 0, E d = 0}``."""
    return _cone_generators(tuple(canonical_direction(P.A[i]) for i in sorted(tight)), P.E, P.dim)


def normal_cone_from_rows(P: HPolyhedron, tight: frozenset) -> PolyCone:
    T = tangent_generators(P, tight)
    return PolyCone.from_halfspaces(T.rays, T.lineality, P.dim)


def normal_cone_of_pieces(pieces: Sequence[HPolyhedron], status) -> PolyCone:
    """Intersection of the pieces' normal cones for a (piece -> tight set) map.

    ``status`` maps piece index to the tight row set; pieces not listed
    are not active.
    """
    G, H = [], []
    dim = pieces[0].dim
    for i, tight in status.items():
        T = tangent_generators(pieces[i], tight)
        G.extend(T.rays)
        H.extend(T.lineality)
    return PolyCone.from_halfspaces(G, H, dim)


def active_pieces(pieces: Sequence[HPolyhedron], x) -> dict:
    x = vec(x)
    return {i: P.tight_rows(x) for i, P in enumerate(pieces) if P.contains(x)}


def regular_normal_cone_union(pieces: Sequence[HPolyhedron], x) -> PolyCone:
    """Regular normal cone of a finite union of polyhedra at ``x``.

    The tangent cone of the union is the union of the pieces' tangent cones,
    so its polar is the intersection of the active pieces' normal cones.
    """
    act = active_pieces(pieces, x)
    if not act:
        raise NotMember(f"{tuple(vec(x))} lies in no piece")
    return normal_cone_of_pieces(pieces, act)
