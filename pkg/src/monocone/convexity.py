"""Convexity and strong convexity of finite maxima of quadratics.

A max-of-quadratics is convex iff its subdifferential mapping satisfies the
coderivative PSD condition, i.e. ``<z, w> >= 0`` for every ``z`` in the
second-order subdifferential ``(D* df)(u, v)(w)``; it is strongly convex
with modulus ``kappa`` iff the threshold ``kappa |w|^2`` holds, equivalently
iff ``f - kappa/2 |x|^2`` is convex.  Function-value oracles are provided
as independent checks.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coderivative import LIMITING, REGULAR
from .errors import RoutesDisagree
from .maxquad import MaxQuadFunction, ShiftedFunction, as_function, subdifferential
from .monotonicity import PSDReport, _num, psd_coderivative_check, semilocal_hypomonotonicity
from .operators import MaxQuadSubdiff, SampleConfig, is_compilable
from .rational import ZERO, ONE, add, dot, is_psd, matvec, norm2, q, scale, sub, to_json_vec, unit, vec

__all__ = [
    "ConvexityVerdict", "OracleResult", "MeanValueReport", "subdifferential", "convexity_check_second_order",
    "strong_convexity_check", "strong_modulus_estimate", "convexity_oracle_sampling",
    "mean_value_inequality_test", "midpoint_search",
]

ORACLE_TOL = 1e-10


@dataclass
class ConvexityVerdict:
    verdict: str  # Convex | NotConvex | StronglyConvex | NotStronglyConvex | Inconclusive
    exact: bool
    kappa: object = None
    reason: str | None = None
    witnesses: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        return self.verdict in ("Convex", "StronglyConvex")

    def to_json(self) -> dict:
        d = {"verdict": self.verdict, "exactness": "exact" if self.exact else "sampled"}
        if self.kappa is not None:
            d["kappa"] = _num(self.kappa)
        if self.reason is not None:
            d["reason"] = self.reason
        d["certificates"] = self.certificates
        d["witnesses"] = self.witnesses
        return d


# --------------------------------------------------------------------------
# function-value oracles


def _gap(f, x, y, lam, kappa):
    """``f(lam x + (1-lam) y) - lam f(x) - (1-lam) f(y) + kappa/2 lam (1-lam) |x-y|^2`` (exact)."""
    m = add(scale(lam, x), scale(1 - lam, y))
    return (f.value(m) - lam * f.value(x) - (1 - lam) * f.value(y)
            + kappa / 2 * lam * (1 - lam) * norm2(sub(x, y)))


@dataclass
class OracleResult:
    passed: bool
    checked: int
    witness: dict | None = None
    min_margin: float = 0.0

    def to_json(self) -> dict:
        return {"passed": self.passed, "checked": self.checked, "min_margin": self.min_margin,
                "witness": self.witness}


def convexity_oracle_sampling(f, triple_count=1000, seed=0, kappa=0, box=3) -> OracleResult:
    """Seeded random triples ``(x, y, lam)`` checked against the (strong) convexity inequality.

    The sweep runs in floats; the first violation beyond the tolerance is
    converted to exact rationals and re-checked before it is reported.
    """
    f = as_function(f)
    kappa = q(kappa)
    rng = np.random.default_rng(seed)
    n = f.dim
    X = rng.uniform(-box, box, size=(triple_count, n))
    Y = rng.uniform(-box, box, size=(triple_count, n))
    L = rng.uniform(0, 1, size=triple_count)
    M = L[:, None] * X + (1 - L[:, None]) * Y
    lhs = f.values_np(M)
    rhs = L * f.values_np(X) + (1 - L) * f.values_np(Y) - float(kappa) / 2 * L * (1 - L) * np.sum((X - Y) ** 2, axis=1)
    margin = rhs - lhs
    bad = np.nonzero(margin < -ORACLE_TOL)[0]
    for k in bad:
        x, y, lam = vec(X[k]), vec(Y[k]), q(float(L[k]))
        g = _gap(f, x, y, lam, kappa)
        if g > 0:
            return OracleResult(False, int(k) + 1, {"x": to_json_vec(x), "y": to_json_vec(y),
                                                   "lambda": _num(lam), "gap": _num(g)}, float(margin.min()))
    return OracleResult(True, triple_count, None, float(margin.min()) if triple_count else 0.0)


def midpoint_search(f, u, w, kappa=0, depth=24):
    """Midpoint violation ``x = u - t w``, ``y = u + t w`` for dyadic ``t``."""
    f = as_function(f)
    u, w = vec(u), vec(w)
    kappa = q(kappa)
    if norm2(w) == 0:
        return None
    half = Fraction(1, 2)
    for k in range(depth):
        t = Fraction(1, 2 ** k)
        x, y = sub(u, scale(t, w)), add(u, scale(t, w))
        g = _gap(f, x, y, half, kappa)
        if g > 0:
            return {"x": to_json_vec(x), "y": to_json_vec(y), "lambda": _num(half), "gap": _num(g)}
    return None


# --------------------------------------------------------------------------
# second-order characterization


def _default_cfg(f, region=None, density=5):
    region = region or [(-2, 2)] * f.dim
    return SampleConfig.make(region, density)


def _negative_direction(Q):
    """Rational ``w`` with ``w^T Q w < 0``, or None."""
    n = len(Q)
    cands = [unit(n, i) for i in range(n)]
    cands += [add(unit(n, i), unit(n, j, s)) for i, j in itertools.combinations(range(n), 2) for s in (1, -1)]
    for w in cands:
        if dot(w, matvec(Q, w)) < 0:
            return w
    vals, vecs = np.linalg.eigh(np.array([[float(x) for x in r] for r in Q]))
    if vals[0] < 0:
        for den in (2 ** 10, 2 ** 20, 2 ** 30):
            w = tuple(Fraction(round(x * den), den) for x in vecs[:, 0])
            if dot(w, matvec(Q, w)) < 0:
                return w
    return None


def _sampled_second_order(f: MaxQuadFunction, cfg: SampleConfig, kappa):
    """Smooth strata of a non-compilable function: at a point with one active
    piece the second-order value is ``{Q_i w}``, so an indefinite active
    ``Q_i - kappa I`` gives an exact witness there."""
    n = f.dim
    for x in cfg.grid():
        act = f.active(x)
        if len(act) != 1:
            continue
        p = f.pieces[act[0]]
        Qk = tuple(tuple(p.Q[i][j] - (kappa if i == j else 0) for j in range(n)) for i in range(n))
        if is_psd(Qk):
            continue
        w = _negative_direction(Qk)
        if w is None:
            continue
        z = matvec(p.Q, w)
        return {"u": to_json_vec(x), "v": to_json_vec(p.gradient(x)), "w": to_json_vec(w), "z": to_json_vec(z),
                "margin": _num((dot(z, w) - kappa * norm2(w)) / norm2(w)), "exact": True}
    return None


def _psd_both(f, kappa, cfg):
    T = MaxQuadSubdiff(as_function(f))
    reg = psd_coderivative_check(T, REGULAR, kappa, cfg=cfg)
    lim = psd_coderivative_check(T, LIMITING, kappa, cfg=cfg)
    return reg, lim


def _second_order_verdict(f, kappa, cfg, positive, negative, primal=True):
    f = as_function(f)
    kappa = q(kappa)
    T = MaxQuadSubdiff(f)
    if is_compilable(T):
        reg, lim = _psd_both(f, kappa, cfg)
        certs = {"combined": reg.to_json(), "limiting": lim.to_json()}
        if lim.passed and not reg.passed:
            raise RoutesDisagree("limiting condition passes while the combined condition fails")
        if reg.passed and lim.passed:
            return ConvexityVerdict(positive, True, kappa if kappa else None, certificates=certs)
        bad = lim if not lim.passed else reg
        return _negative(f, kappa, bad.witness, True, certs, negative, primal)
    certs = {"mode": "sampled", "reason": "distinct quadratic parts in dimension >= 2"}
    wit = _sampled_second_order(f, cfg, kappa)
    if wit is not None:
        return _negative(f, kappa, wit, True, certs, negative, primal)
    return ConvexityVerdict("Inconclusive", False, kappa if kappa else None,
                            reason="second-order condition holds on samples only", certificates=certs)


def _negative(f, kappa, witness, exact, certs, verdict, primal):
    witnesses = {"second_order": witness}
    if primal:
        mp = midpoint_search(f, vec(witness["u"]), vec(witness["w"]), kappa)
        if mp is None:
            orc = convexity_oracle_sampling(f, 1000, 0, kappa)
            mp = orc.witness
        witnesses["primal"] = mp
        witnesses["primal_witness_missing"] = mp is None
    return ConvexityVerdict(verdict, exact, kappa if kappa else None, witnesses=witnesses, certificates=certs)


def convexity_check_second_order(f, cfg: SampleConfig | None = None) -> ConvexityVerdict:
    """Convex iff ``<z, w> >= 0`` on every second-order value, combined and limiting.

    Exact for compilable functions (one dimension, or a shared quadratic
    part); otherwise only refutations are reported.
    """
    fn = as_function(f)
    return _second_order_verdict(fn, ZERO, cfg or _default_cfg(fn), "Convex", "NotConvex")


def semilocal_spot_check(f, center=None, radius=Fraction(1, 2)):
    """Semilocal hypomonotonicity window of the subdifferential at a point."""
    fn = as_function(f)
    center = vec(center) if center is not None else tuple([ZERO] * fn.dim)
    win = semilocal_hypomonotonicity(MaxQuadSubdiff(fn), center, (radius,), density=3)
    return None if win is None else win.to_json()


def strong_convexity_check(f, kappa, cfg: SampleConfig | None = None) -> ConvexityVerdict:
    """Threshold route and shifted-function route; they must agree."""
    fn = as_function(f)
    kappa = q(kappa)
    cfg = cfg or _default_cfg(fn)
    direct = _second_order_verdict(fn, kappa, cfg, "StronglyConvex", "NotStronglyConvex", primal=False)
    shifted = _second_order_verdict(ShiftedFunction(fn, kappa), ZERO, cfg, "Convex", "NotConvex", primal=False)
    if direct.exact and shifted.exact and direct.positive != shifted.positive:
        raise RoutesDisagree(f"threshold route says {direct.verdict}, shifted route says {shifted.verdict}")
    certs = {"threshold": direct.certificates, "shifted": shifted.certificates}
    if direct.positive:
        return ConvexityVerdict("StronglyConvex", True, kappa, certificates=certs)
    if direct.verdict == "Inconclusive":
        return ConvexityVerdict("Inconclusive", False, kappa, reason=direct.reason, certificates=certs)
    wit = direct.witnesses["second_order"]
    primal = midpoint_search(fn, vec(wit["u"]), vec(wit["w"]), kappa)
    if primal is None:
        primal = convexity_oracle_sampling(fn, 1000, 0, kappa).witness
    return ConvexityVerdict("NotStronglyConvex", direct.exact, kappa, certificates=certs,
                            witnesses={"second_order": wit, "shifted": shifted.witnesses.get("second_order"),
                                       "primal": primal, "primal_witness_missing": primal is None})


def strong_modulus_estimate(f, kappa_grid, cfg=None):
    """Largest grid value passing the strong convexity check, or None.

    The passing set is an initial segment of the sorted grid (a modulus
    that works makes every smaller one work), so the scan stops at the
    first failure.
    """
    best = None
    for k in sorted(q(x) for x in kappa_grid):
        v = strong_convexity_check(f, k, cfg) if k > 0 else convexity_check_second_order(f, cfg)
        if not v.positive:
            break
        best = k
    return best


# --------------------------------------------------------------------------
# mean-value inequality


@dataclass
class MeanValueReport:
    lhs: float
    grid_sup: float
    bound: float
    spacing: float
    points: int

    @property
    def passed(self) -> bool:
        return self.lhs <= self.bound * (1 + 1e-12) + 1e-12

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "grid_sup": self.grid_sup, "bound": self.bound, "spacing": self.spacing,
                "points": self.points, "passed": self.passed}


def mean_value_inequality_test(f, a, b, eps, grid_density=41) -> MeanValueReport:
    """``|f(b) - f(a)| <= |b - a| sup{|v| : v in df(c), c in [a, b] + eps B}``.

    The sup is taken over a cubic grid of spacing ``h`` covering the inflated
    segment, with pieces counted as active when within ``2 G r`` of the max
    (``G`` a bound on the gradients, ``r = h sqrt(n)/2`` the covering radius),
    then inflated by ``L r`` with ``L`` the pieces' gradient Lipschitz bound.
    That makes the right-hand side a rigorous upper bound.
    """
    fn = as_function(f)
    a = np.asarray([float(x) for x in a])
    b = np.asarray([float(x) for x in b])
    eps = float(eps)
    n = fn.dim
    lo = np.minimum(a, b) - eps
    hi = np.maximum(a, b) + eps
    h = float(np.max(hi - lo)) / (grid_density - 1)
    r = h * math.sqrt(n) / 2
    axes = [np.arange(lo[i], hi[i] + h / 2, h) for i in range(n)]
    P = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    d = b - a
    L2 = float(d @ d)
    t = np.clip(((P - a) @ d) / L2, 0, 1) if L2 > 0 else np.zeros(len(P))
    dist = np.linalg.norm(P - (a + t[:, None] * d), axis=1)
    P = P[dist <= eps + r]
    Qs, cs, ds = fn._arrays
    vals = 0.5 * np.einsum("ni,kij,nj->nk", P, Qs, P) + P @ cs.T + ds
    grads = np.einsum("kij,nj->nki", Qs, P) + cs[None, :, :]
    gnorm = np.linalg.norm(grads, axis=2)
    L = fn.lipschitz_gradient_bound()
    G = float(gnorm.max()) + L * r
    fmax = vals.max(axis=1, keepdims=True)
    active = vals >= fmax - 2 * G * r - 1e-12
    sup = float(np.max(np.where(active, gnorm, 0.0)))
    fa, fb = fn.values_np(a[None, :])[0], fn.values_np(b[None, :])[0]
    lhs = abs(float(fb - fa))
    bound = math.sqrt(L2) * (sup + L * r)
    return MeanValueReport(lhs, sup, bound, h, len(P))
