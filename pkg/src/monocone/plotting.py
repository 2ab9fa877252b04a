"""Figures for CLI reports, rendered straight to files (no display needed)."""
from __future__ import annotations

import numpy as np
from matplotlib.figure import Figure

from .maxquad import as_function


def _floats(xs):
    return [float(x) for x in xs]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def operator_figure(samples, path, pair=None, marker=None, title=""):
    """Sampled graph points; in one dimension the graph itself, else the
    domain points with their values as arrows."""
    fig = Figure(figsize=(5.0, 4.0))
    ax = fig.add_subplot()
    U = np.array([_floats(p.u) for p in samples])
    V = np.array([_floats(p.v) for p in samples])
    if U.shape[1] == 1:
        ax.scatter(U[:, 0], V[:, 0], s=10, color="#377eb8", label="graph samples")
        ax.set_xlabel("u")
        ax.set_ylabel("v")
        if pair is not None:
            pts = [(_num(pair["u1"][0]), _num(pair["v1"][0])), (_num(pair["u2"][0]), _num(pair["v2"][0]))]
            ax.plot(*zip(*pts), "o-", color="#e41a1c", label="witness pair")
        if marker is not None:
            ax.plot([marker[0]], [marker[1]], "s", color="#ff7f00", label="query point")
    else:
        ax.quiver(U[:, 0], U[:, 1], V[:, 0], V[:, 1], angles="xy", color="#377eb8", width=0.004)
        ax.set_xlabel("u1")
        ax.set_ylabel("u2")
        if pair is not None:
            a = [_num(x) for x in pair["u1"][:2]]
            b = [_num(x) for x in pair["u2"][:2]]
            ax.plot([a[0], b[0]], [a[1], b[1]], "o-", color="#e41a1c", label="witness pair")
    if title:
        ax.set_title(title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def _num(x):
    if isinstance(x, str):
        if x.endswith("inf"):
            return float(x)
        p, _, q = x.partition("/")
        return float(p) / float(q or 1)
    return float(x)


def function_figure(f, path, region=(-3.0, 3.0), witness=None, title=""):
    """Graph (n = 1) or contour plot (n = 2) of a max-of-quadratics."""
    f = as_function(f)
    lo, hi = region
    fig = Figure(figsize=(5.0, 4.0))
    ax = fig.add_subplot()
    if f.dim == 1:
        x = np.linspace(lo, hi, 401)
        ax.plot(x, f.values_np(x[:, None]), color="#377eb8")
        ax.set_xlabel("x")
        ax.set_ylabel("f(x)")
        if witness is not None:
            xs = [_num(witness["x"][0]), _num(witness["y"][0])]
            ax.plot(xs, [float(f.values_np(np.array([[v]]))[0]) for v in xs], "o--", color="#e41a1c",
                    label="violating chord")
            ax.legend(loc="best", fontsize=8)
    else:
        g = np.linspace(lo, hi, 121)
        X, Y = np.meshgrid(g, g)
        pts = np.column_stack([X.ravel(), Y.ravel()] + [np.zeros(X.size)] * (f.dim - 2))
        Z = f.values_np(pts).reshape(X.shape)
        cs = ax.contour(X, Y, Z, levels=15, cmap="viridis")
        ax.clabel(cs, fontsize=6)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        if witness is not None:
            a = [_num(v) for v in witness["x"][:2]]
            b = [_num(v) for v in witness["y"][:2]]
            ax.plot([a[0], b[0]], [a[1], b[1]], "o--", color="#e41a1c")
    if title:
        ax.set_title(title)
    return _save(fig, path)
