"""Finite-difference oracles and sampling utilities.

Everything here is deliberately independent of the closed-form geometry
routines: these are the brute-force comparators the test suite and the
verification suites check closed forms against.  Fields are batched callables
mapping points (B, m) to arrays (B, ...).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from scipy.stats import qmc


def thread_count() -> int:
    """Worker cap for batch scans, from TN_NEUTRAL_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("TN_NEUTRAL_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: list) -> list:
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sample_box(domain: np.ndarray, count: int, seed: int = 42,
               margin: np.ndarray | None = None) -> np.ndarray:
    """Quasi-random (Sobol) points in a box, shaved by a per-side margin.

    The default margin keeps samples at least max(1e-2, 5% of the side width)
    away from each boundary so finite-difference stencils of the oracles stay
    well inside the domain and away from chart degeneracies.
    """
    domain = np.asarray(domain, dtype=float)
    m = domain.shape[0]
    width = domain[:, 1] - domain[:, 0]
    if margin is None:
        margin = np.maximum(1e-2, 0.05 * width)
    lo = domain[:, 0] + margin
    hi = domain[:, 1] - margin
    if np.any(hi <= lo):
        raise ValueError("domain too small for the sampling margin")
    sampler = qmc.Sobol(d=m, scramble=True, seed=seed)
    unit = sampler.random(count)
    return lo + unit * (hi - lo)


def sample_fiber(count: int, n: int, seed: int = 42, scale: float = 2.0) -> np.ndarray:
    """Fiber vectors with components in [-scale, scale], deterministic per seed."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-scale, scale, size=(count, n))


# -- finite differences ----------------------------------------------------

_STENCIL_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_STENCIL_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def fd_jacobian(field: Callable[[np.ndarray], np.ndarray], Z: np.ndarray,
                h: float = 1e-3) -> np.ndarray:
    """All first partials of a batched field by 4th-order central differences.

    field maps (B, m) -> (B, *S); returns (B, m, *S) with [b, a, ...] = d_a field.
    """
    Z = np.asarray(Z, dtype=float)
    B, m = Z.shape
    points = np.repeat(Z[:, None, None, :], m, axis=1)
    points = np.repeat(points, 4, axis=2)  # (B, m, 4, m)
    for a in range(m):
        points[:, a, :, a] += _STENCIL_OFFSETS * h
    flat = points.reshape(B * m * 4, m)
    values = field(flat)
    values = values.reshape(B, m, 4, *values.shape[1:])
    weights = _STENCIL_WEIGHTS.reshape(1, 1, 4, *([1] * (values.ndim - 3)))
    return (values * weights).sum(axis=2) / h


def christoffels_of_field(metric_field: Callable[[np.ndarray], np.ndarray],
                          Z: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Brute-force Christoffel symbols of an arbitrary metric field.

    Returns (B, m, m, m) with [b, k, i, j] = Gamma^k_ij at Z[b].
    """
    Z = np.asarray(Z, dtype=float)
    g = metric_field(Z)
    dg = fd_jacobian(metric_field, Z, h)  # dg[b, a, i, j] = d_a g_ij
    ginv = np.linalg.inv(g)
    # lower[b, s, i, j] = d_i g_js + d_j g_is - d_s g_ij
    lower = np.einsum('bijs->bsij', dg) + np.einsum('bjis->bsij', dg) - dg
    return 0.5 * np.einsum('bks,bsij->bkij', ginv, lower)


def curvature_of_field(metric_field: Callable[[np.ndarray], np.ndarray],
                       Z: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Brute-force lowered curvature tensor of an arbitrary metric field.

    Returns (B, m, m, m, m) with [b, i, j, k, l] = Rm_ijkl = g(R(e_i, e_j) e_k, e_l),
    built from finite differences of the finite-difference Christoffels.
    """
    Z = np.asarray(Z, dtype=float)
    g = metric_field(Z)
    gamma = christoffels_of_field(metric_field, Z, h)
    dgamma = fd_jacobian(lambda pts: christoffels_of_field(metric_field, pts, h), Z, h)
    # dgamma[b, a, k, i, j] = d_a Gamma^k_ij
    riem = (np.einsum('biljk->blijk', dgamma)
            - np.einsum('bjlik->blijk', dgamma)
            + np.einsum('blis,bsjk->blijk', gamma, gamma)
            - np.einsum('bljs,bsik->blijk', gamma, gamma))
    return np.einsum('blm,bmijk->bijkl', g, riem)
