"""Exact rational vectors, matrices and small dense linear algebra.

Everything here works on tuples of :class:`fractions.Fraction`.  Floats are
accepted on input and converted through their shortest decimal repr, so
``0.1`` becomes ``1/10`` rather than the nearest dyadic rational.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Vec = tuple  # tuple[Fraction, ...]
Mat = tuple  # tuple[Vec, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def q(x) -> Fraction:
    """Convert ``x`` to a Fraction (ints, Fractions, floats, 'p/q' strings)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x.strip())
    # numpy scalars and sympy Rationals
    if hasattr(x, "p") and hasattr(x, "q"):
        return Fraction(int(x.p), int(x.q))
    if hasattr(x, "item"):
        return q(x.item())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def parse_bound(x) -> Fraction | None:
    """Parse a box bound; ``None`` stands for an infinite bound."""
    if x is None:
        return None
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "-inf", "infinity", "-infinity"):
        return None
    if isinstance(x, float) and math.isinf(x):
        return None
    return q(x)


def vec(xs: Iterable) -> Vec:
    return tuple(q(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(vec(r) for r in rows)


def zeros(n: int) -> Vec:
    return (ZERO,) * n


def unit(n: int, i: int, s=1) -> Vec:
    return tuple(Fraction(s) if k == i else ZERO for k in range(n))


def identity(n: int) -> Mat:
    return tuple(unit(n, i) for i in range(n))


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), ZERO)


def add(a: Sequence, b: Sequence) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def scale(s, a: Sequence) -> Vec:
    return tuple(s * x for x in a)


def neg(a: Sequence) -> Vec:
    return tuple(-x for x in a)


def norm2(a: Sequence):
    """Squared Euclidean norm (exact)."""
    return dot(a, a)


def matvec(A: Sequence[Sequence], x: Sequence) -> Vec:
    return tuple(dot(row, x) for row in A)


def transpose(A: Sequence[Sequence]) -> Mat:
    if not A:
        return ()
    return tuple(tuple(col) for col in zip(*A))


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Mat:
    Bt = transpose(B)
    return tuple(tuple(dot(r, c) for c in Bt) for r in A)


def is_zero(a: Sequence) -> bool:
    return all(x == 0 for x in a)


def to_float(a: Sequence) -> tuple:
    return tuple(float(x) for x in a)


def canonical_direction(a: Sequence) -> Vec:
    """Positive rescaling of a nonzero rational vector to coprime integers."""
    a = vec(a)
    if is_zero(a):
        return a
    den = 1
    for x in a:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in a]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    return tuple(Fraction(x // g) for x in ints)


def canonical_line(a: Sequence) -> Vec:
    """Canonical representative of the line through ``a`` (sign fixed)."""
    c = canonical_direction(a)
    for x in c:
        if x != 0:
            return c if x > 0 else neg(c)
    return c


def rref(A: Sequence[Sequence]):
    """Reduced row echelon form. Returns (rows, pivot_columns)."""
    M = [list(map(q, r)) for r in A]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(A: Sequence[Sequence]) -> int:
    return len(rref(A)[1]) if A else 0


def nullspace(A: Sequence[Sequence], ncols: int | None = None) -> list[Vec]:
    """Basis of {x : A x = 0} (exact)."""
    if not A:
        if ncols is None:
            raise ValueError("ncols needed for an empty matrix")
        return [unit(ncols, i) for i in range(ncols)]
    ncols = len(A[0])
    R, piv = rref(A)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [ZERO] * ncols
        x[f] = ONE
        for row, pc in zip(R, piv):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(A: Sequence[Sequence], b: Sequence):
    """Some exact solution of A x = b, or None when inconsistent."""
    if not A:
        return None
    ncols = len(A[0])
    aug = [list(r) + [q(bi)] for r, bi in zip(A, b)]
    R, piv = rref(aug)
    if ncols in piv:
        return None
    x = [ZERO] * ncols
    for row, pc in zip(R, piv):
        x[pc] = row[-1]
    return tuple(x)


def is_psd(M: Sequence[Sequence]) -> bool:
    """Exact positive-semidefiniteness test for a symmetric rational matrix.

    Symmetric Gaussian elimination with diagonal pivoting: a negative pivot,
    or a zero diagonal with a nonzero off-diagonal entry in its row, refutes
    semidefiniteness.
    """
    S = [list(map(q, r)) for r in M]
    n = len(S)
    active = list(range(n))
    while active:
        if any(S[i][i] < 0 for i in active):
            return False
        k = next((i for i in active if S[i][i] > 0), None)
        if k is None:
            return all(S[i][j] == 0 for i in active for j in active)
        active.remove(k)
        pv = S[k][k]
        for i in active:
            f = S[i][k] / pv
            if f:
                for j in active:
                    S[i][j] -= f * S[k][j]
    return True


def fmt(x) -> str:
    x = q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_json_number(x):
    """Exact rationals become ints or 'p/q' strings; floats pass through."""
    if isinstance(x, float):
        return x
    x = q(x)
    return x.numerator if x.denominator == 1 else fmt(x)


def to_json_vec(a: Sequence) -> list:
    return [to_json_number(x) for x in a]
