"""Stratification of finite unions of polyhedra.

Every point ``y`` of a union ``P_1 u ... u P_k`` has a *face signature*:
for each piece, either "not containing y" or "containing y with tight row
set J_i".  The regular normal cone of the union at ``y`` depends only on
that signature, so the (nonconvex) limiting normal cone at ``x`` is the
finite union of the cones of the signatures realizable arbitrarily close to
``x``.  Signatures are found by walking the arrangement of all the pieces'
hyperplanes with exact LPs; strict sign conditions are certified by
maximizing a common slack.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from . import lp
from .errors import NotMember
from .polyhedral import HPolyhedron, PolyCone, normal_cone_of_pieces
from .rational import ZERO, add, canonical_line, dot, is_zero, neg, scale, sub, vec

EQ_TIGHT = "eq"


@dataclass(frozen=True)
class FaceSignature:
    """Per piece: ``None`` (point not in the piece) or its tight inequality rows."""

    status: tuple

    @classmethod
    def of(cls, pieces: Sequence[HPolyhedron], y) -> "FaceSignature":
        y = vec(y)
        return cls(tuple(P.tight_rows(y) if P.contains(y) else None for P in pieces))

    @property
    def active(self) -> dict:
        return {i: s for i, s in enumerate(self.status) if s is not None}

    def normal_cone(self, pieces) -> PolyCone:
        return _signature_cone(tuple(pieces), self)

    def to_json(self) -> list:
        return [None if s is None else sorted(s) for s in self.status]


@lru_cache(maxsize=65536)
def _signature_cone(pieces: tuple, sig: FaceSignature) -> PolyCone:
    return normal_cone_of_pieces(pieces, sig.active)


class Arrangement:
    """Distinct hyperplanes of a family of pieces with per-row orientation.

    Row ``a.y <= beta`` of a piece is stored as ``(h, o)`` meaning
    ``o * (n_h . y - c_h) <= 0`` for the canonical hyperplane ``h``.
    """

    def __init__(self, pieces: Sequence[HPolyhedron]):
        self.pieces = tuple(pieces)
        self.dim = pieces[0].dim
        self.normals, self.offsets = [], []
        index = {}
        self.ineq = []   # per piece: list of (h, o)
        self.eqs = []    # per piece: list of h
        self.dead = []   # pieces with an infeasible constant row
        for P in pieces:
            rows, eqs, dead = [], [], False
            for a, b in zip(P.A, P.b):
                if is_zero(a):
                    rows.append((None, 0))
                    dead |= b < 0
                    continue
                h, o = self._hyperplane(a, b, index)
                rows.append((h, o))
            for e, f in zip(P.E, P.f):
                if is_zero(e):
                    dead |= f != 0
                    continue
                eqs.append(self._hyperplane(e, f, index)[0])
            self.ineq.append(rows)
            self.eqs.append(eqs)
            self.dead.append(dead)

    def _hyperplane(self, a, b, index):
        c = canonical_line(tuple(a) + (b,))
        o = 1 if next(x for x in tuple(a) + (b,) if x != 0) * next(x for x in c if x != 0) > 0 else -1
        if c not in index:
            index[c] = len(self.normals)
            self.normals.append(c[:-1])
            self.offsets.append(c[-1])
        return index[c], o

    def __len__(self):
        return len(self.normals)

    def value(self, h, y):
        return dot(self.normals[h], y) - self.offsets[h]

    def signature_from_signs(self, signs: dict) -> FaceSignature:
        status = []
        for i in range(len(self.pieces)):
            status.append(self._piece_status(i, signs))
        return FaceSignature(tuple(status))

    def _piece_status(self, i, signs):
        if self.dead[i]:
            return None
        if any(signs.get(h) != 0 for h in self.eqs[i]):
            return None
        tight = []
        for r, (h, o) in enumerate(self.ineq[i]):
            if h is None:
                continue
            s = signs.get(h)
            if s is None or o * s > 0:
                return None
            if s == 0:
                tight.append(r)
        return frozenset(tight)

    def _alive(self, i, signs):
        """Whether piece ``i`` can still contain the cell given partial signs."""
        if self.dead[i]:
            return False
        if any(signs.get(h, 0) != 0 for h in self.eqs[i]):
            return False
        return all(h is None or h not in signs or o * signs[h] <= 0 for h, o in self.ineq[i])

    def cells(self, pieces_subset=None, homogeneous=False, hyperplanes=None):
        """Realizable sign vectors of cells lying in at least one piece.

        Yields ``(signs, witness)`` where ``signs`` maps each hyperplane used
        by a containing piece to -1/0/+1.  With ``homogeneous`` the offsets
        are dropped (cells of the local cone at a point on all hyperplanes).
        """
        pieces = list(range(len(self.pieces))) if pieces_subset is None else list(pieces_subset)
        hs = list(range(len(self))) if hyperplanes is None else list(hyperplanes)
        # equality hyperplanes first: they cut the search to the pieces' hulls
        eq_first = {h for i in pieces for h in self.eqs[i]}
        hs.sort(key=lambda h: (h not in eq_first, h))
        relevant = {i: {h for h, _ in self.ineq[i] if h is not None} | set(self.eqs[i]) for i in pieces}
        out = []

        def offset(h):
            return ZERO if homogeneous else self.offsets[h]

        def feasible(signs):
            strict_A, strict_b, E, f = [], [], [], []
            for h, s in signs.items():
                n, c = self.normals[h], offset(h)
                if s == 0:
                    E.append(n)
                    f.append(c)
                elif s < 0:
                    strict_A.append(n)
                    strict_b.append(c)
                else:
                    strict_A.append(neg(n))
                    strict_b.append(-c)
            t, x = lp.max_slack(strict_A, strict_b, (), (), E, f, nvars=self.dim)
            if t is None or t <= 0:
                return None
            return x

        def rec(k, signs, witness):
            alive = [i for i in pieces if self._alive(i, signs)]
            if not alive:
                return
            needed = set().union(*(relevant[i] for i in alive))
            while k < len(hs) and hs[k] not in needed:
                k += 1
            if k == len(hs):
                out.append((dict(signs), witness))
                return
            h = hs[k]
            here = None
            if witness is not None:
                val = dot(self.normals[h], witness) - offset(h)
                here = (val > 0) - (val < 0)
            for s in (0, -1, 1):
                signs[h] = s
                # the current witness already lies in this cell
                x = witness if s == here else feasible(signs)
                if x is not None:
                    rec(k + 1, signs, x)
                del signs[h]

        rec(0, {}, None)
        return out


@lru_cache(maxsize=256)
def _arrangement(pieces: tuple) -> Arrangement:
    return Arrangement(pieces)


def arrangement(pieces) -> Arrangement:
    return _arrangement(tuple(pieces))


@dataclass(frozen=True)
class Stratum:
    signature: FaceSignature
    witness: tuple  # an exact point carrying this signature

    def normal_cone(self, pieces) -> PolyCone:
        return self.signature.normal_cone(pieces)


def global_strata(pieces: Sequence[HPolyhedron]) -> list[Stratum]:
    """All face signatures realized anywhere on the union, with witness points."""
    return list(_global_strata(tuple(pieces)))


@lru_cache(maxsize=256)
def _global_strata(pieces: tuple) -> tuple:
    arr = arrangement(pieces)
    found = {}
    for signs, x in arr.cells():
        y = x if x is not None else arr_point(arr, signs)
        sig = FaceSignature.of(pieces, y)
        if sig.active and sig not in found:
            found[sig] = Stratum(sig, tuple(y))
    return tuple(found.values())


def arr_point(arr, signs):
    # only reached when no hyperplane constrains the cell
    return (ZERO,) * arr.dim


def _local_problem(pieces, x):
    x = vec(x)
    act = {i: P.tight_rows(x) for i, P in enumerate(pieces) if P.contains(x)}
    if not act:
        raise NotMember(f"{x} lies in no piece")
    return x, act


def local_strata(pieces: Sequence[HPolyhedron], x, witness_radius=Fraction(1, 10**7)) -> list[Stratum]:
    """Signatures realizable arbitrarily close to ``x``, each with a nearby witness.

    Only hyperplanes through ``x`` matter locally; rows slack at ``x`` stay
    slack in a neighbourhood.  Cells of the local cone are enumerated and a
    witness ``x + t d`` with ``|t d|_inf <= witness_radius`` is produced and
    re-checked exactly for each.
    """
    return list(_local_strata(tuple(pieces), vec(x), Fraction(witness_radius)))


@lru_cache(maxsize=8192)
def _local_strata(pieces, x, radius):
    x, act = _local_problem(pieces, x)
    key = tuple(sorted(act.items(), key=lambda kv: kv[0]))
    found = {}
    for d in _local_directions(pieces, key):
        y = _nearby_point(pieces, x, d, radius)
        sig = FaceSignature.of(pieces, y)
        if sig not in found:
            found[sig] = Stratum(sig, y)
    return tuple(found.values())


@lru_cache(maxsize=4096)
def _local_directions(pieces, act_key):
    """Cell directions of the local cone; depends only on the tight rows."""
    dim = pieces[0].dim
    local = []
    for i, tight in act_key:
        P = pieces[i]
        A = tuple(P.A[r] for r in sorted(tight))
        local.append(HPolyhedron(dim, A, (ZERO,) * len(A), P.E, (ZERO,) * len(P.E)))
    dirs = []
    for _, d in Arrangement(local).cells(homogeneous=True):
        dirs.append(d if d is not None else (ZERO,) * dim)
    return tuple(dirs)


def _nearby_point(pieces, x, d, radius):
    m = max((abs(v) for v in d), default=ZERO)
    if m == 0:
        return x
    t = radius / m
    # shrink until no row slack at x changes sign
    while True:
        y = add(x, scale(t, d))
        ok = True
        for P in pieces:
            for a, b in zip(P.A, P.b):
                ax = dot(a, x)
                if ax != b and (dot(a, y) - b) * (ax - b) <= 0:
                    ok = False
            for e, f in zip(P.E, P.f):
                ex = dot(e, x)
                if ex != f and (dot(e, y) - f) * (ex - f) <= 0:
                    ok = False
        if ok:
            return y
        t /= 2


def limiting_normal_cone_union(pieces: Sequence[HPolyhedron], x) -> list[PolyCone]:
    """Limiting normal cone at ``x`` as a finite (nonconvex) union of cones."""
    return [c for _, c in limiting_family(pieces, x)]


def limiting_family(pieces, x):
    """``[(stratum, cone)]`` with duplicate cones removed."""
    return list(_limiting_family(tuple(pieces), vec(x)))


@lru_cache(maxsize=8192)
def _limiting_family(pieces, x):
    fam = []
    for st in local_strata(pieces, x):
        cone = st.normal_cone(pieces)
        if not any(cone == c or cone.same_as(c) for _, c in fam):
            fam.append((st, cone))
    return tuple(fam)


def signature_realizable_near(pieces: Sequence[HPolyhedron], x, sigma: FaceSignature) -> bool:
    """Whether points with exactly signature ``sigma`` accumulate at ``x``.

    Direct two-LP test on the local cone ``d = y - x``: the closed relaxation
    must be feasible and the strict conditions must admit a positive common
    slack.  A piece marked absent but containing ``x`` must be left through
    one of its rows tight at ``x``; each such choice is tried in turn.
    """
    x = vec(x)
    if len(sigma.status) != len(pieces):
        return False
    dim = pieces[0].dim
    E, strict_A, must_leave = [], [], []
    for i, (P, st) in enumerate(zip(pieces, sigma.status)):
        inside = P.contains(x)
        if st is None:
            if inside:
                must_leave.append(i)
            continue
        if not inside:
            return False
        tight_x = P.tight_rows(x)
        if not st <= tight_x:
            return False
        E.extend(P.E)
        for r in tight_x:
            if r in st:
                E.append(P.A[r])
            else:
                strict_A.append(P.A[r])
    options = []
    for i in must_leave:
        P = pieces[i]
        opts = [P.A[r] for r in sorted(P.tight_rows(x))]
        for e in P.E:
            opts.extend([e, neg(e)])
        opts = [neg(o) for o in opts]  # a.d > 0  <=>  -a.d < 0
        if not opts:
            return False
        options.append(opts)
    zeros_E = [ZERO] * len(E)
    for choice in itertools.product(*options) if options else [()]:
        rows = strict_A + list(choice)
        closed = lp.feasible_point(rows, [ZERO] * len(rows), E, zeros_E, nvars=dim)
        if closed is None:
            continue
        t, _ = lp.max_slack(rows, [ZERO] * len(rows), (), (), E, zeros_E, nvars=dim)
        if t is not None and t > 0:
            return True
    return False
