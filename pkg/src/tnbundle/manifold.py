"""Single-chart Riemannian base manifolds and their exact geometry.

Charts carry expression-valued metric components; all derivatives (through the
covariant derivative of curvature, which needs three metric derivatives) come
from the jet evaluator and are exact to roundoff.

Curvature convention: R(X,Y)Z = D_X D_Y Z - D_Y D_X Z - D_[X,Y] Z, with
Rm(X,Y,Z,W) = g(R(X,Y)Z, W).  On the unit round sphere this makes sectional
curvature +1 and scalar curvature n(n-1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ChartDomainError, DegenerateMetricError
from .expr import Expression, eval_jet, parse
from .numeric import sample_box

_DET_FLOOR = 1e-10


@dataclass(frozen=True)
class RiemannianChart:
    """A base manifold (N, g) described on one coordinate box."""

    name: str
    n: int
    variables: tuple[str, ...]
    domain: np.ndarray  # (n, 2) open intervals
    metric: tuple[tuple[Expression, ...], ...]  # n x n, symmetric

    def contains(self, x: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Boolean mask of points (B, n) lying inside the (shaved) box."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lo = self.domain[:, 0] + margin
        hi = self.domain[:, 1] - margin
        return np.all((x > lo) & (x < hi), axis=1)

    def require_interior(self, x: np.ndarray) -> None:
        if not np.all(self.contains(x)):
            raise ChartDomainError(f"point outside the '{self.name}' chart box")

    def sample_points(self, count: int, seed: int = 42) -> np.ndarray:
        return sample_box(self.domain, count, seed)

    def metric_at(self, X: np.ndarray) -> np.ndarray:
        """Metric matrices g(x) at points X (B, n) -> (B, n, n)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        B = X.shape[0]
        g = np.empty((B, self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                g[:, i, j] = eval_jet(self.metric[i][j], X, order=0).value
                g[:, j, i] = g[:, i, j]
        return g


def make_chart(name: str, variables: Sequence[str], domain, metric_sources) -> RiemannianChart:
    """Build a chart from expression source strings (full symmetric grid)."""
    variables = tuple(variables)
    n = len(variables)
    domain = np.asarray(domain, dtype=float)
    if domain.shape != (n, 2) or np.any(domain[:, 1] <= domain[:, 0]):
        raise ValueError("domain must be an (n, 2) array of nonempty intervals")
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            src = metric_sources[i][j]
            row.append(src if isinstance(src, Expression) else parse(str(src), variables))
        rows.append(tuple(row))
    return RiemannianChart(name, n, variables, domain, tuple(rows))


def make_builtin(kind: str, **params) -> RiemannianChart:
    """Construct one of the fixture manifolds.

    Kinds: euclidean (n), sphere2 (radius), hyperbolic2, sphere3, warped3,
    custom (name, variables, domain, metric).
    """
    if kind == "euclidean":
        n = int(params.get("n", 2))
        if n < 1:
            raise ValueError("euclidean dimension must be >= 1")
        names = [f"x{i+1}" for i in range(n)]
        sources = [["1.0" if i == j else "0.0" for j in range(n)] for i in range(n)]
        return make_chart(f"euclidean{n}", names, [(-3.0, 3.0)] * n, sources)
    if kind == "sphere2":
        r = float(params.get("radius", 1.0))
        if r <= 0:
            raise ValueError("sphere radius must be positive")
        delta = float(params.get("delta", 1e-2))
        sources = [[f"{r * r}", "0.0"], ["0.0", f"{r * r}*sin(th)^2"]]
        return make_chart("sphere2", ("th", "ph"),
                          [(delta, math.pi - delta), (0.0, 2.0 * math.pi)], sources)
    if kind == "hyperbolic2":
        # Bounded sub-box of the upper half-plane; curvature is -2 everywhere.
        sources = [["1/x2^2", "0.0"], ["0.0", "1/x2^2"]]
        return make_chart("hyperbolic2", ("x1", "x2"),
                          [(-2.0, 2.0), (0.5, 2.5)], sources)
    if kind == "sphere3":
        delta = float(params.get("delta", 1e-2))
        sources = [["1.0", "0.0", "0.0"],
                   ["0.0", "sin(ps)^2", "0.0"],
                   ["0.0", "0.0", "sin(ps)^2*sin(th)^2"]]
        return make_chart("sphere3", ("ps", "th", "ph"),
                          [(delta, math.pi - delta), (delta, math.pi - delta),
                           (0.0, 2.0 * math.pi)], sources)
    if kind == "warped3":
        sources = [["1.0", "0.0", "0.0"],
                   ["0.0", "1.0", "0.0"],
                   ["0.0", "0.0", "(1+0.5*sin(x1))^2"]]
        return make_chart("warped3", ("x1", "x2", "x3"), [(-2.0, 2.0)] * 3, sources)
    if kind == "custom":
        return make_chart(params["name"], params["variables"], params["domain"],
                          params["metric"])
    raise ValueError(f"unknown manifold kind '{kind}'")


_BUILTIN_FACTORIES = {
    "euclidean2": lambda: make_builtin("euclidean", n=2),
    "euclidean3": lambda: make_builtin("euclidean", n=3),
    "sphere2": lambda: make_builtin("sphere2"),
    "hyperbolic2": lambda: make_builtin("hyperbolic2"),
    "sphere3": lambda: make_builtin("sphere3"),
    "warped3": lambda: make_builtin("warped3"),
}


def builtin_names() -> tuple[str, ...]:
    return tuple(_BUILTIN_FACTORIES)


def get_builtin(name: str) -> RiemannianChart:
    try:
        return _BUILTIN_FACTORIES[name]()
    except KeyError:
        raise ValueError(f"unknown builtin manifold '{name}'") from None


def chart_from_dict(data: dict) -> RiemannianChart:
    n = int(data["n"])
    variables = data.get("variables", [f"x{i+1}" for i in range(n)])
    return make_chart(str(data.get("name", "custom")), variables, data["domain"],
                      data["metric"])


def load_chart(path: str | Path) -> RiemannianChart:
    """Load a manifold definition file: JSON {name, n, domain, metric[, variables]}."""
    with open(path, "r", encoding="utf-8") as fh:
        return chart_from_dict(json.load(fh))


def resolve_manifold(spec: str) -> RiemannianChart:
    """Interpret a CLI-style manifold argument: builtin name or file path."""
    if spec in _BUILTIN_FACTORIES:
        return get_builtin(spec)
    if Path(spec).exists():
        return load_chart(spec)
    raise ValueError(f"'{spec}' is neither a builtin manifold nor an existing file")


# -- geometry ----------------------------------------------------------------


@dataclass
class GeometryBatch:
    """Connection and curvature data of the base metric at a batch of points.

    Index conventions: gamma[b,k,i,j] = Gamma^k_ij; riemann_mixed[b,l,i,j,k] =
    R^l_ijk (R(e_i,e_j)e_k = R^l_ijk e_l); riemann_lower[b,i,j,k,l] = Rm_ijkl;
    cov_riemann[b,m,l,i,j,k] = (D_m R)^l_ijk.
    """

    x: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray | None = None
    riemann_mixed: np.ndarray | None = None
    riemann_lower: np.ndarray | None = None
    ricci: np.ndarray | None = None
    scalar: np.ndarray | None = None
    cov_riemann: np.ndarray | None = None


@dataclass
class BaseGeometry:
    """Single-point view of GeometryBatch (the spec-facing record)."""

    x: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    riemann_lower: np.ndarray
    riemann_mixed: np.ndarray
    ricci: np.ndarray
    scalar: float
    cov_riemann: np.ndarray


_ORDER_RANK = {"gamma": 1, "curvature": 2, "full": 3}


def metric_jets(chart: RiemannianChart, X: np.ndarray, order: int):
    """Batched metric component jets: g, dg, d2g, d3g (None above `order`).

    dg[b,i,j,k] = d_k g_ij, d2g[b,i,j,k,l] = d_k d_l g_ij,
    d3g[b,i,j,k,l,m] = d_k d_l d_m g_ij.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    B, n = X.shape
    g = np.zeros((B, n, n))
    dg = np.zeros((B, n, n, n)) if order >= 1 else None
    d2g = np.zeros((B, n, n, n, n)) if order >= 2 else None
    d3g = np.zeros((B, n, n, n, n, n)) if order >= 3 else None
    for i in range(n):
        for j in range(i, n):
            jet = eval_jet(chart.metric[i][j], X, order=order)
            g[:, i, j] = g[:, j, i] = jet.value
            if order >= 1:
                dg[:, i, j] = dg[:, j, i] = jet.grad
            if order >= 2:
                d2g[:, i, j] = d2g[:, j, i] = jet.hess
            if order >= 3:
                d3g[:, i, j] = d3g[:, j, i] = jet.third
    return g, dg, d2g, d3g


def geometry_batch(chart: RiemannianChart, X: np.ndarray,
                   order: str = "curvature") -> GeometryBatch:
    """Compute connection/curvature data at points X (B, n).

    order: "gamma" (Christoffels only), "curvature" (adds Riemann/Ricci),
    "full" (adds the covariant derivative of curvature).
    """
    rank = _ORDER_RANK[order]
    X = np.atleast_2d(np.asarray(X, dtype=float))
    g, dg, d2g, d3g = metric_jets(chart, X, rank)

    det = np.linalg.det(g)
    bad = np.abs(det) <= _DET_FLOOR
    if np.any(bad):
        where = int(np.argmax(bad))
        raise DegenerateMetricError(f"degenerate metric on '{chart.name}'",
                                    float(det[where]), X[where].tolist())
    ginv = np.linalg.inv(g)

    # lower[b,s,i,j] = d_i g_js + d_j g_is - d_s g_ij
    lower = np.einsum('bjsi->bsij', dg) + np.einsum('bisj->bsij', dg) - np.einsum('bijs->bsij', dg)
    gamma = 0.5 * np.einsum('bks,bsij->bkij', ginv, lower)
    out = GeometryBatch(x=X, g=g, g_inv=ginv, gamma=gamma)
    if rank < 2:
        return out

    dginv = -np.einsum('bip,bpqm,bqj->bijm', ginv, dg, ginv)
    # dlower[b,s,i,j,m] = d_m lower[s,i,j]
    dlower = (np.einsum('bjsim->bsijm', d2g) + np.einsum('bisjm->bsijm', d2g)
              - np.einsum('bijsm->bsijm', d2g))
    dgamma = 0.5 * (np.einsum('bksm,bsij->bkijm', dginv, lower)
                    + np.einsum('bks,bsijm->bkijm', ginv, dlower))
    riem = (np.einsum('bljki->blijk', dgamma) - np.einsum('blikj->blijk', dgamma)
            + np.einsum('blis,bsjk->blijk', gamma, gamma)
            - np.einsum('bljs,bsik->blijk', gamma, gamma))
    rm = np.einsum('blm,bmijk->bijkl', g, riem)
    ricci = np.einsum('biijk->bjk', riem)
    scalar = np.einsum('bjk,bjk->b', ginv, ricci)
    out.dgamma = dgamma
    out.riemann_mixed = riem
    out.riemann_lower = rm
    out.ricci = ricci
    out.scalar = scalar
    if rank < 3:
        return out

    d2ginv = -(np.einsum('bipt,bpqm,bqj->bijmt', dginv, dg, ginv)
               + np.einsum('bip,bpqmt,bqj->bijmt', ginv, d2g, ginv)
               + np.einsum('bip,bpqm,bqjt->bijmt', ginv, dg, dginv))
    # d2lower[b,s,i,j,m,t] = d_m d_t lower[s,i,j]
    d2lower = (np.einsum('bjsimt->bsijmt', d3g) + np.einsum('bisjmt->bsijmt', d3g)
               - np.einsum('bijsmt->bsijmt', d3g))
    d2gamma = 0.5 * (np.einsum('bkamt,baij->bkijmt', d2ginv, lower)
                     + np.einsum('bkam,baijt->bkijmt', dginv, dlower)
                     + np.einsum('bkat,baijm->bkijmt', dginv, dlower)
                     + np.einsum('bka,baijmt->bkijmt', ginv, d2lower))
    # driem[b,l,i,j,k,m] = d_m R^l_ijk
    driem = (np.einsum('bljkim->blijkm', d2gamma) - np.einsum('blikjm->blijkm', d2gamma)
             + np.einsum('blism,bsjk->blijkm', dgamma, gamma)
             + np.einsum('blis,bsjkm->blijkm', gamma, dgamma)
             - np.einsum('bljsm,bsik->blijkm', dgamma, gamma)
             - np.einsum('bljs,bsikm->blijkm', gamma, dgamma))
    cov = (np.einsum('blijkm->bmlijk', driem)
           + np.einsum('blms,bsijk->bmlijk', gamma, riem)
           - np.einsum('bsmi,blsjk->bmlijk', gamma, riem)
           - np.einsum('bsmj,blisk->bmlijk', gamma, riem)
           - np.einsum('bsmk,blijs->bmlijk', gamma, riem))
    out.cov_riemann = cov
    return out


def geometry_at(chart: RiemannianChart, x: np.ndarray) -> BaseGeometry:
    """Full geometry record at a single interior point."""
    x = np.asarray(x, dtype=float)
    chart.require_interior(x)
    batch = geometry_batch(chart, x[None, :], order="full")
    return BaseGeometry(
        x=x,
        g=batch.g[0],
        g_inv=batch.g_inv[0],
        gamma=batch.gamma[0],
        riemann_lower=batch.riemann_lower[0],
        riemann_mixed=batch.riemann_mixed[0],
        ricci=batch.ricci[0],
        scalar=float(batch.scalar[0]),
        cov_riemann=batch.cov_riemann[0],
    )


def dv_riemann(chart: RiemannianChart, x: np.ndarray, V: np.ndarray) -> np.ndarray:
    """(D_V R)^l_ijk: covariant derivative of curvature contracted with V.

    Linear in V; vanishes identically on locally symmetric bases.
    """
    geom = geometry_at(chart, x)
    return np.einsum('m,mlijk->lijk', np.asarray(V, dtype=float), geom.cov_riemann)
