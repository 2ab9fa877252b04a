"""Set-valued operators on R^n: variants, evaluation, sampling, compilation.

Graphs live in R^{2n} with coordinates ``(u, v)``.  Every variant except a
nonlinear ``RationalMap`` and a max-of-quadratics with distinct quadratic
parts in n >= 2 compiles to a finite union of H-polyhedra, which is what
the exact engines consume.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch, EmptySample, NotCompilable, SpecFormatError, UnsupportedVariant,
)
from .maxquad import MaxQuadFunction, compile_subdifferential_graph, subdifferential
from .polyhedral import HPolyhedron, MAX_ENUM_DIM, vertex_ray_enumerate
from .rational import (
    ZERO, ONE, add, dot, is_zero, mat, matvec, parse_bound, q, scale, sub, to_json_number, to_json_vec, unit, vec,
)
from .smooth import RationalMap

log = logging.getLogger(__name__)

POINT_TOL = 1e-12


# --------------------------------------------------------------------------
# variants


@dataclass(frozen=True)
class AffineBox:
    """``T(x) = A x + b + [lo, hi]``; ``None`` bounds are infinite."""

    A: tuple
    b: tuple
    lo: tuple
    hi: tuple

    @classmethod
    def make(cls, A, b=None, lo=None, hi=None) -> "AffineBox":
        A = mat(A)
        n = len(A)
        if any(len(r) != n for r in A):
            raise SpecFormatError("AffineBox matrix must be square")
        b = vec(b) if b is not None else (ZERO,) * n
        lo = tuple(parse_bound(x) for x in lo) if lo is not None else (ZERO,) * n
        hi = tuple(parse_bound(x) for x in hi) if hi is not None else (ZERO,) * n
        if len(b) != n or len(lo) != n or len(hi) != n:
            raise SpecFormatError(f"AffineBox vectors must have length {n}")
        for l, h in zip(lo, hi):
            if l is not None and h is not None and l > h:
                raise SpecFormatError("AffineBox needs lo <= hi componentwise")
        return cls(A, b, lo, hi)

    @property
    def dim(self):
        return len(self.A)

    def box(self) -> HPolyhedron:
        return HPolyhedron.box(self.lo, self.hi)

    def is_single_valued(self):
        return all(l is not None and l == h for l, h in zip(self.lo, self.hi))


@dataclass(frozen=True)
class PolyhedralGraphUnion:
    dim: int
    pieces: tuple

    @classmethod
    def make(cls, pieces, dim=None) -> "PolyhedralGraphUnion":
        pieces = [p if isinstance(p, HPolyhedron) else HPolyhedron.from_json(p) for p in pieces]
        if not pieces:
            raise SpecFormatError("a polyhedral graph union needs at least one piece")
        d = pieces[0].dim
        if dim is None:
            if d % 2:
                raise SpecFormatError("graph pieces must live in an even dimension")
            dim = d // 2
        kept = []
        for i, P in enumerate(pieces):
            if P.dim != 2 * dim:
                raise DimensionMismatch(f"piece {i} has dimension {P.dim}, expected {2 * dim}")
            if P.is_empty():
                log.warning("dropping empty graph piece %d", i)
                continue
            kept.append(P)
        if not kept:
            raise SpecFormatError("every graph piece is empty")
        return cls(dim, tuple(kept))


@dataclass(frozen=True)
class MaxQuadSubdiff:
    function: MaxQuadFunction

    @property
    def dim(self):
        return self.function.dim


@dataclass(frozen=True)
class ShiftIdentity:
    """``base + s I``."""

    base: object
    s: Fraction

    @property
    def dim(self):
        return self.base.dim


@dataclass(frozen=True)
class ShiftDown:
    """``base - kappa I`` with kappa >= 0."""

    base: object
    kappa: Fraction

    @property
    def dim(self):
        return self.base.dim


@dataclass(frozen=True)
class Inverse:
    base: object

    @property
    def dim(self):
        return self.base.dim


VARIANTS = (RationalMap, AffineBox, PolyhedralGraphUnion, MaxQuadSubdiff, ShiftIdentity, ShiftDown, Inverse)


def shift(T, s):
    return ShiftIdentity(T, q(s))


def shift_down(T, kappa):
    kappa = q(kappa)
    if kappa < 0:
        raise SpecFormatError("ShiftDown needs kappa >= 0")
    return ShiftDown(T, kappa)


def variant_name(T) -> str:
    return type(T).__name__


def total_shift(T):
    """Peel identity shifts: ``T = core + s I``; returns ``(core, s)``."""
    s = ZERO
    while isinstance(T, (ShiftIdentity, ShiftDown)):
        s += T.s if isinstance(T, ShiftIdentity) else -T.kappa
        T = T.base
    return T, s


def smooth_form(T):
    """The operator as a single ``RationalMap`` if it is one up to shifts."""
    core, s = total_shift(T)
    if isinstance(core, RationalMap):
        return core.shifted(s) if s else core
    return None


# --------------------------------------------------------------------------
# value sets


@dataclass(frozen=True)
class ValueSet:
    """Empty set, finite point list, or finite union of H-polyhedra."""

    kind: str
    points: tuple = ()
    polyhedra: tuple = ()

    @classmethod
    def empty(cls) -> "ValueSet":
        return cls("empty")

    @classmethod
    def of_points(cls, pts) -> "ValueSet":
        pts = tuple(dict.fromkeys(tuple(p) for p in pts))
        return cls("points", pts) if pts else cls.empty()

    @classmethod
    def of_polyhedra(cls, polys) -> "ValueSet":
        polys = tuple(dict.fromkeys(p for p in polys if not p.is_empty()))
        return cls("polyhedra", (), polys) if polys else cls.empty()

    @classmethod
    def simplified(cls, polys) -> "ValueSet":
        """Points when every nonempty polyhedron is a singleton."""
        polys = [p for p in polys if not p.is_empty()]
        if not polys:
            return cls.empty()
        singles = [p.as_point() for p in polys]
        if all(s is not None for s in singles):
            return cls.of_points(singles)
        return cls.of_polyhedra(polys)

    def is_empty(self) -> bool:
        return self.kind == "empty"

    def as_polyhedra(self) -> tuple:
        if self.kind == "points":
            return tuple(HPolyhedron.point(p) for p in self.points)
        return self.polyhedra

    def contains(self, v, tol=0) -> bool:
        if self.kind == "empty":
            return False
        if any(isinstance(x, float) for x in v) and tol == 0:
            tol = POINT_TOL
        if self.kind == "points":
            if tol:
                return any(max(abs(float(a) - float(b)) for a, b in zip(p, v)) <= tol for p in self.points)
            v = vec(v)
            return v in self.points
        v = vec(v)
        if tol:
            return any(_near_polyhedron(P, v, tol) for P in self.polyhedra)
        return any(P.contains(v) for P in self.polyhedra)

    def translate(self, t) -> "ValueSet":
        t = vec(t)
        if is_zero(t) or self.kind == "empty":
            return self
        if self.kind == "points":
            return ValueSet.of_points(add(p, t) for p in self.points)
        return ValueSet("polyhedra", (), tuple(P.translate(t) for P in self.polyhedra))

    def union(self, other: "ValueSet") -> "ValueSet":
        if self.is_empty():
            return other
        if other.is_empty():
            return self
        if self.kind == other.kind == "points":
            return ValueSet.of_points(self.points + other.points)
        return ValueSet.of_polyhedra(self.as_polyhedra() + other.as_polyhedra())

    def support_min(self, w):
        """``(inf <z, w>, witness)``; value None means minus infinity."""
        if self.kind == "empty":
            return float("inf"), None
        w = vec(w)
        if self.kind == "points":
            best = min(self.points, key=lambda p: dot(p, w))
            return dot(best, w), best
        best = None
        for P in self.polyhedra:
            val, x = P.support_min(w)
            if val is None:
                return None, x
            if best is None or val < best[0]:
                best = (val, x)
        return best

    def any_point(self):
        if self.kind == "points":
            return self.points[0]
        if self.kind == "polyhedra":
            return self.polyhedra[0].relint_point()
        return None

    def to_json(self) -> dict:
        if self.kind == "empty":
            return {"type": "empty"}
        if self.kind == "points":
            return {"type": "points", "points": [to_json_vec(p) for p in self.points]}
        return {"type": "polyhedra", "polyhedra": [P.to_json() for P in self.polyhedra]}


def _near_polyhedron(P: HPolyhedron, v, tol) -> bool:
    tol = q(tol)
    return (all(dot(a, v) <= bi + tol for a, bi in zip(P.A, P.b))
            and all(abs(dot(e, v) - fi) <= tol for e, fi in zip(P.E, P.f)))


# --------------------------------------------------------------------------
# compilation


def _shift_map(n, s):
    """Matrix of ``(u, v) -> (u, v - s u)``."""
    M = [unit(2 * n, i) for i in range(n)]
    for i in range(n):
        M.append(tuple([-s if j == i else ZERO for j in range(n)] + [ONE if j == i else ZERO for j in range(n)]))
    return M


def _swap_map(n):
    return [unit(2 * n, n + i) for i in range(n)] + [unit(2 * n, i) for i in range(n)]


def shift_pieces(pieces, n, s):
    """Pieces of gph(T + sI) from pieces of gph T."""
    if s == 0:
        return tuple(pieces)
    M = _shift_map(n, q(s))
    return tuple(P.pullback(M) for P in pieces)


def swap_pieces(pieces, n):
    M = _swap_map(n)
    return tuple(P.pullback(M) for P in pieces)


def compile_to_polyhedral(T) -> PolyhedralGraphUnion:
    """Exact polyhedral description of gph T."""
    return PolyhedralGraphUnion(T.dim, _compile(T))


@lru_cache(maxsize=512)
def _compile(T) -> tuple:
    n = T.dim
    if isinstance(T, PolyhedralGraphUnion):
        return T.pieces
    if isinstance(T, AffineBox):
        # lo <= v - A u - b <= hi
        M = []
        for i in range(n):
            M.append(tuple([-a for a in T.A[i]] + [ONE if j == i else ZERO for j in range(n)]))
        return (T.box().pullback(M, [-x for x in T.b]),)
    if isinstance(T, MaxQuadSubdiff):
        return tuple(compile_subdifferential_graph(T.function))
    if isinstance(T, (ShiftIdentity, ShiftDown)):
        s = T.s if isinstance(T, ShiftIdentity) else -T.kappa
        return shift_pieces(_compile(T.base), n, s)
    if isinstance(T, Inverse):
        return swap_pieces(_compile(T.base), n)
    if isinstance(T, RationalMap):
        if all(f.den_poly.is_ground and f.num_poly.total_degree() <= 1 for f in T.funcs):
            J = T.jacobian((ZERO,) * n)
            c = T((ZERO,) * n)
            E = [tuple([-x for x in J[i]] + [ONE if j == i else ZERO for j in range(n)]) for i in range(n)]
            return (HPolyhedron.make((), (), E, c, dim=2 * n),)
        raise NotCompilable("nonlinear rational map has a curved graph")
    raise UnsupportedVariant(f"unknown operator variant {variant_name(T)}")


def is_compilable(T) -> bool:
    try:
        _compile(T)
        return True
    except NotCompilable:
        return False


def graph_pieces(T) -> tuple:
    return _compile(T)


# --------------------------------------------------------------------------
# evaluation


def _check_dim(T, u):
    if len(u) != T.dim:
        raise DimensionMismatch(f"point of length {len(u)} for an operator on R^{T.dim}")


def evaluate(T, u) -> ValueSet:
    """Exact description of ``T(u)``."""
    u = vec(u)
    _check_dim(T, u)
    return _evaluate(T, u)


@lru_cache(maxsize=65536)
def _evaluate(T, u) -> ValueSet:
    sm = smooth_form(T)
    if sm is not None:
        val = sm(u)
        return ValueSet.of_points([val]) if val is not None else ValueSet.empty()
    if isinstance(T, AffineBox):
        c = add(matvec(T.A, u), T.b)
        if T.is_single_valued():
            return ValueSet.of_points([add(c, T.lo)])
        return ValueSet.of_polyhedra([T.box().translate(c)])
    if isinstance(T, MaxQuadSubdiff):
        sd = subdifferential(T.function, u)
        if sd.is_singleton():
            return ValueSet.of_points(sd.vertices)
        return ValueSet.of_polyhedra([sd.hull])
    if isinstance(T, (ShiftIdentity, ShiftDown)):
        s = T.s if isinstance(T, ShiftIdentity) else -T.kappa
        return evaluate(T.base, u).translate(scale(s, u))
    if isinstance(T, Inverse):
        base_smooth = smooth_form(T.base)
        if base_smooth is not None and not is_compilable(T.base):
            return _invert_smooth(base_smooth, u)
    pieces = _compile(T)
    return slice_pieces(pieces, T.dim, u)


def slice_pieces(pieces, n, u) -> ValueSet:
    coords = list(range(n))
    return ValueSet.of_polyhedra([P.fix(coords, u) for P in pieces])


def _invert_smooth(F: RationalMap, y) -> ValueSet:
    if F.dim != 1:
        raise UnsupportedVariant("inverse of a nonlinear rational map is only supported for n = 1")
    from .smooth import real_roots_in
    import sympy as sp
    f = F.funcs[0]
    yy = sp.Rational(y[0].numerator, y[0].denominator)
    poly = (f.num_poly - f.den_poly * yy)
    if poly.is_zero:
        raise UnsupportedVariant("constant rational map has no pointwise inverse")
    pts = []
    for r in real_roots_in(poly):
        if f.den_poly.eval(r) == 0:
            continue
        if r.is_Rational:
            pts.append((Fraction(int(r.p), int(r.q)),))
        else:
            pts.append((float(r),))
    return ValueSet.of_points(pts)


def contains(T, u, v) -> bool:
    return evaluate(T, u).contains(v)


def in_domain(T, u) -> bool:
    return not evaluate(T, u).is_empty()


# --------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class GraphPoint:
    u: tuple
    v: tuple
    provenance: str = ""

    def to_json(self) -> dict:
        return {"u": to_json_vec(self.u), "v": to_json_vec(self.v), "provenance": self.provenance}


@dataclass(frozen=True)
class SampleConfig:
    region: tuple  # ((lo_1, hi_1), ..., (lo_n, hi_n))
    density: int = 5
    seed: int = 0
    jitter: float = 0.0

    def __post_init__(self):
        if self.density < 2:
            raise SpecFormatError("sample density must be at least 2")
        if not 0 <= self.jitter < 0.5:
            raise SpecFormatError("jitter must lie in [0, 0.5)")
        for lo, hi in self.region:
            if q(lo) > q(hi):
                raise SpecFormatError("region bounds must satisfy lo <= hi")

    @classmethod
    def make(cls, region, density=5, seed=0, jitter=0.0) -> "SampleConfig":
        return cls(tuple((q(lo), q(hi)) for lo, hi in region), int(density), int(seed), float(jitter))

    @property
    def dim(self):
        return len(self.region)

    def box(self) -> HPolyhedron:
        return HPolyhedron.box([lo for lo, _ in self.region], [hi for _, hi in self.region])

    def contains(self, u) -> bool:
        return all(lo <= x <= hi for x, (lo, hi) in zip(u, self.region))

    def grid(self) -> list:
        """Grid nodes with seeded jitter, rounded to dyadic rationals."""
        rng = np.random.default_rng(self.seed)
        axes = []
        for lo, hi in self.region:
            step = (hi - lo) / (self.density - 1)
            axes.append([lo + k * step for k in range(self.density)])
        nodes = [()]
        for ax in axes:
            nodes = [p + (x,) for p in nodes for x in ax]
        if self.jitter == 0:
            return nodes
        out = []
        for p in nodes:
            r = rng.uniform(-1, 1, size=len(p))
            pt = []
            for x, ri, (lo, hi) in zip(p, r, self.region):
                step = (hi - lo) / (self.density - 1)
                off = Fraction(round(ri * self.jitter * 2 ** 20), 2 ** 20) * step
                pt.append(min(max(x + off, lo), hi))
            out.append(tuple(pt))
        return out

    def to_json(self) -> dict:
        return {"region": [[to_json_number(lo), to_json_number(hi)] for lo, hi in self.region],
                "density": self.density, "seed": self.seed, "jitter": self.jitter}


def _box_points(lo, hi, center):
    """Lower corner, upper corner and midpoint of a (possibly unbounded) box."""
    low, high, mid = [], [], []
    for l, h in zip(lo, hi):
        if l is None and h is None:
            l, h = -ONE, ONE
        elif l is None:
            l = h - 1
        elif h is None:
            h = l + 1
        low.append(l)
        high.append(h)
        mid.append((l + h) / 2)
    return [add(center, low), add(center, high), add(center, mid)]


def graph_sample(T, cfg: SampleConfig) -> list:
    """Deterministic sample of gph T over the region (points exact)."""
    if cfg.dim != T.dim:
        raise DimensionMismatch(f"region of dimension {cfg.dim} for an operator on R^{T.dim}")
    pts = []
    sm = smooth_form(T)
    grid = cfg.grid()
    if sm is not None and not is_compilable(T):
        for u in grid:
            v = sm(u)
            if v is not None:
                pts.append(GraphPoint(u, v, "smooth"))
    elif isinstance(T, AffineBox) and not T.is_single_valued():
        for u in grid:
            c = add(matvec(T.A, u), T.b)
            for tag, v in zip(("lower", "upper", "mid"), _box_points(T.lo, T.hi, c)):
                pts.append(GraphPoint(u, v, f"box-{tag}"))
    elif isinstance(T, MaxQuadSubdiff) and not is_compilable(T):
        for u in grid:
            sd = subdifferential(T.function, u)
            for k, g in enumerate(sd.vertices):
                pts.append(GraphPoint(u, g, f"gradient-{k}"))
            if len(sd.vertices) > 1:
                n = len(sd.vertices)
                pts.append(GraphPoint(u, tuple(sum(c) / n for c in zip(*sd.vertices)), "gradient-mean"))
    else:
        pts.extend(_sample_pieces(T, cfg, grid))
    pts = list(dict.fromkeys(p for p in pts if cfg.contains(p.u)))
    seen, out = set(), []
    for p in pts:
        key = (p.u, p.v)
        if key not in seen:
            seen.add(key)
            out.append(p)
    if not out:
        raise EmptySample("the sampling region misses the domain")
    return out


def _sample_pieces(T, cfg, grid):
    n = T.dim
    pieces = _compile(T)
    region = cfg.box().product(HPolyhedron.whole(n))
    out = []
    for i, P in enumerate(pieces):
        C = P.intersect(region)
        if C.is_empty():
            continue
        x = C.relint_point()
        out.append(GraphPoint(x[:n], x[n:], f"piece-{i}-relint"))
        if C.dim <= MAX_ENUM_DIM:
            vr = vertex_ray_enumerate(C)
            for k, vtx in enumerate(vr.vertices):
                out.append(GraphPoint(vtx[:n], vtx[n:], f"piece-{i}-vertex"))
                for r in vr.rays:
                    y = add(vtx, r)
                    if cfg.contains(y[:n]):
                        out.append(GraphPoint(y[:n], y[n:], f"piece-{i}-ray"))
    for u in grid:
        for i, P in enumerate(pieces):
            S = P.fix(list(range(n)), u)
            if S.is_empty():
                continue
            if S.dim <= MAX_ENUM_DIM:
                vr = vertex_ray_enumerate(S)
                for vtx in vr.vertices:
                    out.append(GraphPoint(u, vtx, f"piece-{i}-slice"))
                if vr.rays or vr.lineality or len(vr.vertices) != 1:
                    out.append(GraphPoint(u, S.relint_point(), f"piece-{i}-slice"))
            else:
                out.append(GraphPoint(u, S.relint_point(), f"piece-{i}-slice"))
    return out


# --------------------------------------------------------------------------
# JSON


def _number(x, where):
    try:
        return q(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecFormatError(f"{where}: not a number: {x!r}") from exc


def from_json(d, where="spec"):
    if not isinstance(d, dict):
        raise SpecFormatError(f"{where}: expected an object")
    variant = d.get("variant")
    dim = d.get("dim")
    try:
        if variant == "RationalMap":
            T = RationalMap(d["components"], dim)
        elif variant == "AffineBox":
            T = AffineBox.make(d["A"], d.get("b"), d.get("lo"), d.get("hi"))
        elif variant == "PolyhedralGraphUnion":
            T = PolyhedralGraphUnion.make(d["pieces"], dim)
        elif variant == "MaxQuadSubdiff":
            fd = d["function"]
            T = MaxQuadSubdiff(MaxQuadFunction.from_json(fd))
        elif variant == "ShiftIdentity":
            T = ShiftIdentity(from_json(d["base"], where + ".base"), _number(d["s"], where + ".s"))
        elif variant == "ShiftDown":
            kappa = _number(d["kappa"], where + ".kappa")
            if kappa < 0:
                raise SpecFormatError(f"{where}.kappa must be >= 0")
            T = ShiftDown(from_json(d["base"], where + ".base"), kappa)
        elif variant == "Inverse":
            T = Inverse(from_json(d["base"], where + ".base"))
        else:
            raise SpecFormatError(f"{where}.variant: unknown variant {variant!r}")
    except KeyError as exc:
        raise SpecFormatError(f"{where}: missing field {exc.args[0]!r} for {variant}") from exc
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, SpecFormatError):
            raise
        raise SpecFormatError(f"{where}: {exc}") from exc
    if dim is not None and int(dim) != T.dim:
        raise DimensionMismatch(f"{where}.dim is {dim} but the payload has dimension {T.dim}")
    return T


def _bound_json(x, sign):
    if x is None:
        return sign + "inf" if sign == "-" else "inf"
    return to_json_number(x)


def to_json(T) -> dict:
    if isinstance(T, RationalMap):
        return T.to_json()
    if isinstance(T, AffineBox):
        return {"dim": T.dim, "variant": "AffineBox", "A": [to_json_vec(r) for r in T.A], "b": to_json_vec(T.b),
                "lo": [_bound_json(x, "-") for x in T.lo], "hi": [_bound_json(x, "+") for x in T.hi]}
    if isinstance(T, PolyhedralGraphUnion):
        return {"dim": T.dim, "variant": "PolyhedralGraphUnion", "pieces": [P.to_json() for P in T.pieces]}
    if isinstance(T, MaxQuadSubdiff):
        return {"dim": T.dim, "variant": "MaxQuadSubdiff", "function": T.function.to_json()}
    if isinstance(T, ShiftIdentity):
        return {"dim": T.dim, "variant": "ShiftIdentity", "s": to_json_number(T.s), "base": to_json(T.base)}
    if isinstance(T, ShiftDown):
        return {"dim": T.dim, "variant": "ShiftDown", "kappa": to_json_number(T.kappa), "base": to_json(T.base)}
    if isinstance(T, Inverse):
        return {"dim": T.dim, "variant": "Inverse", "base": to_json(T.base)}
    raise UnsupportedVariant(f"unknown operator variant {variant_name(T)}")


def load_json(path):
    """Parse a JSON file, reporting the line and column of syntax errors."""
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load(path):
    return from_json(load_json(path), where=str(path))


def dumps(T) -> str:
    return json.dumps(to_json(T), indent=2)
