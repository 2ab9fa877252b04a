"""Named operators and functions with their expected verdicts."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .maxquad import MaxQuadFunction

CHECK_MAXIMAL = "check-maximal"
CHECK_CONVEX = "check-convex"


@dataclass(frozen=True)
class Fixture:
    name: str
    analysis: str
    spec: dict
    expected: tuple  # acceptable verdicts
    note: str
    options: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "analysis": self.analysis, "expected": list(self.expected), "note": self.note,
                "options": self.options, "spec": self.spec}


def kx_box(kappa):
    return {"dim": 1, "variant": "AffineBox", "A": [[kappa]], "b": [0], "lo": [0], "hi": [1]}


def _abs_function():
    return {"dim": 1, "pieces": [{"Q": [[0]], "c": [1], "d": 0}, {"Q": [[0]], "c": [-1], "d": 0}]}


def _quad_l1(Q):
    n = len(Q)
    pieces = []
    for signs in ([1, 1], [1, -1], [-1, 1], [-1, -1]):
        pieces.append({"Q": Q, "c": signs[:n], "d": 0})
    return {"dim": n, "pieces": pieces}


def _fn(pieces, dim=None):
    dim = dim or len(pieces[0][1])
    return {"dim": dim, "pieces": [{"Q": Q, "c": c, "d": d} for Q, c, d in pieces]}


# 1-D pieces are (a, c, d) for a/2 x^2 + c x + d
def _fn1(*pieces):
    return _fn([([[a]], [c], d) for a, c, d in pieces], 1)


# (name, function, convex?)  all compile exactly: 1-D with rational
# breakpoints, or n = 2 with one shared quadratic part
CATALOG = (
    ("abs", _fn1((0, 1, 0), (0, -1, 0)), True),
    ("square", _fn1((2, 0, 0)), True),
    ("hinge-square", _fn1((2, 0, -1), (0, 0, 0)), True),
    ("tangent-max", _fn1((2, 0, 0), (0, 2, -1)), True),
    ("three-lines", _fn1((0, 1, 0), (0, 2, -1), (0, -1, 0)), True),
    ("half-square-plus-abs", _fn1((1, 1, 0), (1, -1, 0)), True),
    ("quad-diag-2-4", _fn([([[2, 0], [0, 4]], [0, 0], 0)]), True),
    ("l1-norm", _quad_l1([[0, 0], [0, 0]]), True),
    ("coupled-quad-max", _fn([([[2, 1], [1, 2]], [1, 0], 0), ([[2, 1], [1, 2]], [0, 1], 0)]), True),
    ("planar-hinge", _fn([([[0, 0], [0, 0]], c, 0) for c in ([1, 1], [1, -1], [0, 0])]), True),
    ("neg-square", _fn1((-2, 0, 0)), False),
    ("cap-and-line", _fn1((-2, 0, 0), (0, 1, -2)), False),
    ("abs-square-minus-one", _fn1((2, 0, -1), (-2, 0, 1)), False),
    ("neg-square-plus-abs", _fn1((-2, 1, 0), (-2, -1, 0)), False),
    ("cap-and-steep-line", _fn1((-2, 0, 0), (0, 2, -3)), False),
    ("narrow-cap", _fn1((-4, 0, 0), (0, 1, -1)), False),
    ("saddle", _fn([([[2, 0], [0, -2]], [0, 0], 0)]), False),
    ("concave-plus-abs", _fn([([[-2, 0], [0, -2]], [1, 0], 0), ([[-2, 0], [0, -2]], [-1, 0], 0)]), False),
    ("indefinite-max", _fn([([[1, 2], [2, 1]], [1, 0], 0), ([[1, 2], [2, 1]], [0, -1], 0)]), False),
    ("semidefinite-negative-max", _fn([([[0, 0], [0, -1]], c, 0) for c in ([1, 0], [0, 1], [0, 0])]), False),
)


def catalog_functions():
    return [(name, MaxQuadFunction.from_json(spec), convex) for name, spec, convex in CATALOG]


FIXTURES = (
    Fixture("identity", CHECK_MAXIMAL, {"dim": 1, "variant": "RationalMap", "components": ["x"]},
            ("MaximalMonotone",), "identity map"),
    Fixture("negative-identity", CHECK_MAXIMAL, {"dim": 1, "variant": "RationalMap", "components": ["-x"]},
            ("NotMonotone",), "negative definite linear map"),
    Fixture("absval-subdiff", CHECK_MAXIMAL,
            {"dim": 1, "variant": "MaxQuadSubdiff", "function": _abs_function()},
            ("MaximalMonotone",), "subdifferential of the absolute value"),
    Fixture("kx-box", CHECK_MAXIMAL, kx_box(1), ("NotMonotone",),
            "kappa x + [0,1]: coderivative condition holds but the map is not hypomonotone"),
    Fixture("kx-box-0", CHECK_MAXIMAL, kx_box(0), ("NotMonotone",), "constant interval map"),
    Fixture("kx-box-2", CHECK_MAXIMAL, kx_box(2), ("NotMonotone",), "kappa x + [0,1] with kappa 2"),
    Fixture("neg-reciprocal", CHECK_MAXIMAL, {"dim": 1, "variant": "RationalMap", "components": ["-1/x"]},
            ("NotMonotone", "Inconclusive"), "-1/x: semilocally monotone on a nonconvex domain"),
    Fixture("affine-psd-box", CHECK_MAXIMAL,
            {"dim": 2, "variant": "AffineBox", "A": [[2, 1], [1, 1]], "b": [1, 0], "lo": [0, 0], "hi": [0, 0]},
            ("MaximalMonotone",), "affine map with positive semidefinite matrix"),
    Fixture("quad-l1-subdiff", CHECK_MAXIMAL,
            {"dim": 2, "variant": "MaxQuadSubdiff", "function": _quad_l1([[2, 0], [0, 4]])},
            ("StronglyMaximalMonotone",), "diag(2,4) x + subdifferential of the l1 norm", {"kappa": 2}),
    Fixture("abs-convex", CHECK_CONVEX, _abs_function(), ("Convex",), "absolute value"),
    Fixture("neg-square-convex", CHECK_CONVEX, _fn1((-2, 0, 0)), ("NotConvex",), "concave quadratic"),
    Fixture("hinge-square-convex", CHECK_CONVEX, _fn1((2, 0, -1), (0, 0, 0)), ("Convex",), "max{x^2 - 1, 0}"),
    Fixture("quad-diag-strong", CHECK_CONVEX, _fn([([[2, 0], [0, 4]], [0, 0], 0)]), ("StronglyConvex",),
            "quadratic with smallest eigenvalue 2", {"kappa": 2}),
    Fixture("abs-not-strong", CHECK_CONVEX, _abs_function(), ("NotStronglyConvex",),
            "absolute value has flat pieces", {"kappa": "1/2"}),
)


def get(name) -> Fixture:
    for fx in FIXTURES:
        if fx.name == name:
            return fx
    raise KeyError(name)


def export(directory) -> list:
    """Write each fixture spec to ``<directory>/<name>.json``; returns the paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    for fx in FIXTURES:
        p = d / f"{fx.name}.json"
        p.write_text(json.dumps(fx.spec, indent=2) + "\n")
        out.append(p)
    return out
