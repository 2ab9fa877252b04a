"""Exact rational linear programming.

A dense two-phase tableau simplex over :class:`fractions.Fraction` with
Bland's anti-cycling rule.  There are no tolerances anywhere: every
comparison is exact.  Problems are posed over free variables::

    minimize    c . x
    subject to  A_ub x <= b_ub,  A_eq x == b_eq

Tableau entries are GMP rationals (``gmpy2.mpq``), several times faster
than :class:`fractions.Fraction`; inputs and results stay ``Fraction``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from .rational import ONE, ZERO, q

MZERO = mpq(0)
MONE = mpq(1)


def _m(x):
    return mpq(q(x))


def _f(x):
    return Fraction(int(x.numerator), int(x.denominator))

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: tuple | None = None
    value: Fraction | None = None
    ray: tuple | None = None  # recession direction with c . ray < 0 when unbounded

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.T = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols

    def pivot(self, r, j):
        T, rhs = self.T, self.rhs
        pr = T[r]
        pv = pr[j]
        if pv != 1:
            inv = 1 / pv
            pr = [x * inv for x in pr]
            T[r] = pr
            rhs[r] *= inv
        nz = [k for k, x in enumerate(pr) if x != 0]
        for i in range(len(T)):
            if i == r:
                continue
            f = T[i][j]
            if f != 0:
                row = T[i]
                for k in nz:
                    row[k] -= f * pr[k]
                rhs[i] -= f * rhs[r]
        self.basis[r] = j

    def reduced_costs(self, cost):
        cb = [cost[b] for b in self.basis]
        r = list(cost)
        for i, row in enumerate(self.T):
            if cb[i] != 0:
                f = cb[i]
                for k, x in enumerate(row):
                    if x != 0:
                        r[k] -= f * x
        return r

    def run(self, cost, allowed):
        """Bland-rule simplex on the current basis. Returns (status, column)."""
        while True:
            red = self.reduced_costs(cost)
            j = next((k for k in range(self.ncols) if allowed[k] and red[k] < 0), None)
            if j is None:
                return OPTIMAL, None
            best = None
            for i, row in enumerate(self.T):
                a = row[j]
                if a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED, j
            self.pivot(best[1], j)


def linprog(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
            A_eq: Sequence[Sequence] = (), b_eq: Sequence = (),
            nvars: int | None = None) -> LPResult:
    """Minimize ``c . x`` over free ``x`` exactly; see the module docstring."""
    c = [_m(x) for x in c]
    n = len(c) if nvars is None else nvars
    if len(c) != n:
        raise ValueError("cost vector length does not match nvars")
    A_ub = [[_m(x) for x in r] for r in A_ub]
    A_eq = [[_m(x) for x in r] for r in A_eq]
    b_ub = [_m(x) for x in b_ub]
    b_eq = [_m(x) for x in b_eq]
    for r in A_ub + A_eq:
        if len(r) != n:
            raise ValueError("constraint row length does not match nvars")
    m_ub, m_eq = len(A_ub), len(A_eq)
    m = m_ub + m_eq

    # columns: x+ (n) | x- (n) | slacks (m_ub) | artificials (as needed)
    n_struct = 2 * n + m_ub
    rows, rhs, basis, art_rows = [], [], [], []
    for i in range(m):
        if i < m_ub:
            a, b = A_ub[i], b_ub[i]
        else:
            a, b = A_eq[i - m_ub], b_eq[i - m_ub]
        row = list(a) + [-x for x in a] + [MZERO] * m_ub
        if i < m_ub:
            row[2 * n + i] = MONE
        if b < 0:
            row = [-x for x in row]
            b = -b
        rows.append(row)
        rhs.append(b)
        if i < m_ub and row[2 * n + i] == 1:
            basis.append(2 * n + i)
        else:
            basis.append(None)
            art_rows.append(i)
    n_art = len(art_rows)
    ncols = n_struct + n_art
    for row in rows:
        row.extend([MZERO] * n_art)
    for k, i in enumerate(art_rows):
        rows[i][n_struct + k] = MONE
        basis[i] = n_struct + k
    tab = _Tableau(rows, rhs, basis, ncols)

    if n_art:
        cost1 = [MZERO] * n_struct + [MONE] * n_art
        tab.run(cost1, [True] * ncols)
        if sum((tab.rhs[i] for i, b in enumerate(tab.basis) if b >= n_struct), MZERO) > 0:
            return LPResult(INFEASIBLE)
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(tab.T):
            if tab.basis[i] >= n_struct:
                j = next((k for k in range(n_struct) if tab.T[i][k] != 0), None)
                if j is None:
                    del tab.T[i], tab.rhs[i], tab.basis[i]
                    continue
                tab.pivot(i, j)
            i += 1

    cost2 = list(c) + [-x for x in c] + [MZERO] * (ncols - 2 * n)
    allowed = [k < n_struct for k in range(ncols)]
    status, j = tab.run(cost2, allowed)
    x = [MZERO] * ncols
    for i, b in enumerate(tab.basis):
        x[b] = tab.rhs[i]
    xs = tuple(x[k] - x[n + k] for k in range(n))
    if status == UNBOUNDED:
        d = [MZERO] * ncols
        d[j] = MONE
        for i, b in enumerate(tab.basis):
            d[b] = -tab.T[i][j]
        ray = tuple(d[k] - d[n + k] for k in range(n))
        return LPResult(UNBOUNDED, x=tuple(map(_f, xs)), ray=tuple(map(_f, ray)))
    value = sum((ci * xi for ci, xi in zip(c, xs)), MZERO)
    return LPResult(OPTIMAL, x=tuple(map(_f, xs)), value=_f(value))


def feasible_point(A_ub=(), b_ub=(), A_eq=(), b_eq=(), nvars=None):
    """Some point of the polyhedron, or None if it is empty."""
    res = linprog([ZERO] * nvars, A_ub, b_ub, A_eq, b_eq, nvars=nvars)
    return res.x if res.ok else None


def max_slack(A_strict, b_strict, A_ub=(), b_ub=(), A_eq=(), b_eq=(), nvars=None, cap=ONE):
    """Largest t <= cap with A_strict x + t <= b_strict and the other rows.

    The strict system ``A_strict x < b_strict`` (with the closed rows) is
    nonempty exactly when the returned slack is positive.  Returns
    ``(t, x)`` or ``(None, None)`` when even the closed relaxation is empty.
    """
    n = nvars
    A1 = [list(r) + [ONE] for r in A_strict] + [list(r) + [ZERO] for r in A_ub]
    A1.append([ZERO] * n + [ONE])
    b1 = list(b_strict) + list(b_ub) + [cap]
    Ae = [list(r) + [ZERO] for r in A_eq]
    res = linprog([ZERO] * n + [-ONE], A1, b1, Ae, b_eq, nvars=n + 1)
    if res.status == INFEASIBLE:
        return None, None
    # the objective is bounded below by -cap, so this is optimal
    return res.x[-1], res.x[:-1]
