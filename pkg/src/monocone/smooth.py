"""Rational maps with exact evaluation and exact Jacobians.

Components are parsed with sympy from strings in the variables
``x1, ..., xn`` (``x`` is accepted as an alias when n = 1), brought to a
single fraction ``num/den`` with rational coefficients, and stored as
monomial term lists so evaluation at rational points stays exact without
touching sympy again.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property

import numpy as np
import sympy as sp

from .errors import SpecFormatError
from .rational import ZERO, q, vec


def symbols(n):
    return sp.symbols(" ".join(f"x{i + 1}" for i in range(n)), seq=True)


def _terms(poly: sp.Poly) -> tuple:
    return tuple((tuple(m), Fraction(int(c.p), int(c.q))) for m, c in poly.terms())


def _eval_terms(terms, x):
    total = ZERO
    for mono, c in terms:
        t = c
        for xi, e in zip(x, mono):
            if e:
                t *= xi ** e
        total += t
    return total


class RationalFunction:
    """``num/den`` over the rationals in fixed variables."""

    def __init__(self, expr, xs):
        self.xs = tuple(xs)
        expr = sp.together(sp.sympify(expr))
        num, den = sp.fraction(expr)
        try:
            pn = sp.Poly(sp.expand(num), *self.xs, domain=sp.QQ)
            pd = sp.Poly(sp.expand(den), *self.xs, domain=sp.QQ)
        except (sp.PolynomialError, sp.CoercionFailed, sp.GeneratorsNeeded) as exc:
            raise SpecFormatError(f"not a rational function with rational coefficients: {expr}") from exc
        if pd.is_zero:
            raise SpecFormatError(f"denominator identically zero in {expr}")
        self.num_poly, self.den_poly = pn, pd
        self.num = _terms(pn)
        self.den = _terms(pd)
        self.expr = pn.as_expr() / pd.as_expr()

    def __call__(self, x):
        d = _eval_terms(self.den, x)
        if d == 0:
            return None
        return _eval_terms(self.num, x) / d

    def diff(self, j) -> "RationalFunction":
        N, D = self.num_poly, self.den_poly
        xj = self.xs[j]
        expr = (N.diff(xj) * D - N * D.diff(xj)).as_expr() / (D ** 2).as_expr()
        return RationalFunction(sp.cancel(expr), self.xs)

    def den_is_constant(self) -> bool:
        return self.den_poly.is_ground


class RationalMap:
    """Smooth map ``R^n -> R^n`` whose components are rational functions."""

    def __init__(self, components, dim=None):
        comps = [str(c) for c in components]
        n = len(comps) if dim is None else int(dim)
        if len(comps) != n or n < 1:
            raise SpecFormatError(f"RationalMap needs {n} components, got {len(comps)}")
        self.dim = n
        self.components = tuple(comps)
        self.xs = symbols(n)
        local = {f"x{i + 1}": s for i, s in enumerate(self.xs)}
        if n == 1:
            local["x"] = self.xs[0]
        funcs = []
        for c in comps:
            try:
                expr = sp.sympify(c, locals=local, rational=True)
            except (sp.SympifyError, SyntaxError, TypeError) as exc:
                raise SpecFormatError(f"cannot parse component {c!r}") from exc
            extra = expr.free_symbols - set(self.xs)
            if extra:
                raise SpecFormatError(f"unknown symbols {sorted(map(str, extra))} in {c!r}")
            funcs.append(RationalFunction(expr, self.xs))
        self.funcs = tuple(funcs)

    def __eq__(self, other):
        return isinstance(other, RationalMap) and self.components == other.components

    def __hash__(self):
        return hash(("RationalMap", self.components))

    def __repr__(self):
        return f"RationalMap({list(self.components)!r})"

    @cached_property
    def jacobian_funcs(self):
        return tuple(tuple(f.diff(j) for j in range(self.dim)) for f in self.funcs)

    def in_domain(self, x) -> bool:
        x = vec(x)
        return all(_eval_terms(f.den, x) != 0 for f in self.funcs)

    def __call__(self, x):
        """Exact value at a rational point, or None outside the domain."""
        x = vec(x)
        out = []
        for f in self.funcs:
            v = f(x)
            if v is None:
                return None
            out.append(v)
        return tuple(out)

    def jacobian(self, x):
        x = vec(x)
        if not self.in_domain(x):
            return None
        return tuple(tuple(g(x) for g in row) for row in self.jacobian_funcs)

    @cached_property
    def _numeric(self):
        return sp.lambdify(self.xs, [f.expr for f in self.funcs], modules="numpy")

    @cached_property
    def _den_numeric(self):
        return sp.lambdify(self.xs, [f.den_poly.as_expr() for f in self.funcs], modules="numpy")

    def eval_float(self, x):
        x = np.asarray(x, dtype=float)
        dens = np.atleast_1d(np.asarray(self._den_numeric(*x), dtype=float))
        if np.any(dens == 0):
            return None
        return np.asarray(self._numeric(*x), dtype=float)

    @cached_property
    def denominators(self):
        """Distinct non-constant denominator polynomials."""
        out = []
        for f in self.funcs:
            if not f.den_poly.is_ground and f.den_poly not in out:
                out.append(f.den_poly)
        return tuple(out)

    def shifted(self, s) -> "RationalMap":
        """``x -> self(x) + s x``."""
        s = q(s)
        comps = []
        for i, f in enumerate(self.funcs):
            comps.append(str(sp.together(f.expr + sp.Rational(s.numerator, s.denominator) * self.xs[i])))
        return RationalMap(comps, self.dim)

    def to_json(self) -> dict:
        return {"dim": self.dim, "variant": "RationalMap", "components": list(self.components)}


def univariate_nonnegative(poly: sp.Poly) -> bool:
    """Exact test that a univariate rational polynomial is >= 0 on all of R.

    Nonnegative iff the leading coefficient is positive (or the polynomial
    is the zero polynomial / a nonnegative constant) and every real root
    has even multiplicity.
    """
    if poly.is_zero:
        return True
    if poly.degree() <= 0:
        return poly.LC() >= 0
    if poly.LC() < 0 or poly.degree() % 2:
        return False
    _, factors = poly.sqf_list()
    for fac, mult in factors:
        if mult % 2 and fac.count_roots() > 0:
            return False
    return True


def real_roots_in(poly: sp.Poly, lo=None, hi=None):
    """Exact real roots (sympy algebraic numbers) in the closed interval."""
    if poly.is_ground:
        return []
    roots = poly.real_roots()
    out = []
    for r in roots:
        if lo is not None and r < lo:
            continue
        if hi is not None and r > hi:
            continue
        out.append(r)
    return sorted(set(out), key=lambda r: float(r))
