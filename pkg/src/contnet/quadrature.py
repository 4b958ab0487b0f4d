"""Vectorized adaptive Simpson quadrature over batches of cells.

Each cell is integrated to an absolute tolerance (default 1e-10) with the
classic halve-and-compare error estimate and Richardson extrapolation; all
active subsegments across all cells advance together as flat numpy arrays,
so the integrand is only ever evaluated in large batches.  Accepted segment
contributions are reduced per cell in a fixed deterministic order, so the
result does not depend on how the work was scheduled.
"""

from __future__ import annotations

import math

import numpy as np

from contnet.errors import QuadratureError

DEFAULT_TOL = 1e-10


def kahan_sum(values) -> float:
    """Compensated sum of a 1-D array, deterministic left-to-right."""
    return float(math.fsum(np.asarray(values, dtype=float).ravel()))


def integrate_panels(f, lo, hi, tol: float = DEFAULT_TOL, max_depth: int = 45) -> np.ndarray:
    """Adaptive Simpson integral of f over each [lo_i, hi_i] panel."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        raise ValueError("lo/hi shape mismatch")
    shape = lo.shape
    lo, hi = lo.ravel(), hi.ravel()
    n = lo.size

    mid = 0.5 * (lo + hi)
    fa = np.asarray(f(lo), dtype=float)
    fm = np.asarray(f(mid), dtype=float)
    fb = np.asarray(f(hi), dtype=float)
    estimate = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    cell = np.arange(n)
    seg_tol = np.full(n, tol, dtype=float)
    a, b = lo.copy(), hi.copy()
    depth = np.zeros(n, dtype=np.int32)

    done_cells: list[np.ndarray] = []
    done_vals: list[np.ndarray] = []

    while cell.size:
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = np.asarray(f(lm), dtype=float)
        frm = np.asarray(f(rm), dtype=float)
        h = b - a
        s_left = h / 12.0 * (fa + 4.0 * flm + fm)
        s_right = h / 12.0 * (fm + 4.0 * frm + fb)
        s2 = s_left + s_right
        err = (s2 - estimate) / 15.0
        # accept on tolerance, or when the segment width hits float granularity
        done = (np.abs(err) <= seg_tol) | (h <= np.abs(m) * 4e-16 + 5e-308)

        if np.any(done):
            done_cells.append(cell[done])
            done_vals.append((s2 + err)[done])

        keep = ~done
        if not np.any(keep):
            break
        if int(depth[keep].max()) >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge to tol={tol} within depth {max_depth}"
            )
        cell = np.concatenate([cell[keep], cell[keep]])
        seg_tol = np.concatenate([0.5 * seg_tol[keep], 0.5 * seg_tol[keep]])
        depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])
        ak, bk, mk = a[keep], b[keep], m[keep]
        fak, fmk, fbk = fa[keep], fm[keep], fb[keep]
        a, b = np.concatenate([ak, mk]), np.concatenate([mk, bk])
        fa = np.concatenate([fak, fmk])
        fb = np.concatenate([fmk, fbk])
        fm = np.concatenate([flm[keep], frm[keep]])
        estimate = np.concatenate([s_left[keep], s_right[keep]])

    out = np.zeros(n, dtype=float)
    if done_cells:
        idx = np.concatenate(done_cells)
        vals = np.concatenate(done_vals)
        order = np.argsort(idx, kind="stable")
        idx, vals = idx[order], vals[order]
        starts = np.searchsorted(idx, np.arange(n))
        present = np.zeros(n, dtype=bool)
        present[idx] = True
        sums = np.add.reduceat(vals, np.minimum(starts, vals.size - 1)) if vals.size else 0.0
        out[present] = np.asarray(sums)[present]
    return out.reshape(shape)


def integrate_cells(f, edges, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Per-cell integrals of f over consecutive [edges[i], edges[i+1]] cells."""
    edges = np.asarray(edges, dtype=float)
    return integrate_panels(f, edges[:-1], edges[1:], tol=tol)


def integrate_interval(f, lo: float, hi: float, tol: float = DEFAULT_TOL) -> float:
    """Adaptive Simpson integral of f over a single interval."""
    if not hi > lo:
        return 0.0
    return float(integrate_panels(f, [lo], [hi], tol=tol)[0])


def gauss_legendre_nodes(lo, hi, order: int = 8):
    """Nodes and weights of a fixed Gauss-Legendre rule on each [lo_i, hi_i].

    Returns arrays of shape (..., order); used where the integrand is known
    smooth and a fixed rule is cheaper than adaptivity.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo) + half * x
    weights = half * w
    return nodes, weights
