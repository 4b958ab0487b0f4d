"""Deterministic derivative-free minimization used by the worked examples.

Multi-start (seeded low-discrepancy-ish sampling) followed by cyclic
pattern search per coordinate.  No external solver; reproducible given the
seed and start grid.
"""

from __future__ import annotations

import numpy as np


def pattern_search(f, x0, lo, hi, step0=0.25, shrink=0.5, iters=60, tol=1e-10):
    """Cyclic coordinate pattern search within a box.

    Per sweep each coordinate is probed at +-step (relative to box width);
    the step shrinks when a full sweep makes no progress.
    """
    x = np.asarray(x0, dtype=float).copy()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = hi - lo
    best = f(x)
    step = step0
    for _ in range(iters):
        improved = False
        for k in range(x.size):
            for sgn in (1.0, -1.0):
                cand = x.copy()
                cand[k] = np.clip(x[k] + sgn * step * width[k], lo[k], hi[k])
                if cand[k] == x[k]:
                    continue
                val = f(cand)
                if val < best - tol:
                    x, best = cand, val
                    improved = True
        if not improved:
            step *= shrink
            if step * width.max() < 1e-12:
                break
    return x, best


def multistart_minimize(f, lo, hi, n_starts=64, top=6, seed=20240801,
                        extra_starts=(), **ps_kwargs):
    """Seeded uniform multi-start + pattern-search refinement of the best few."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    rng = np.random.default_rng(seed)
    starts = [np.asarray(s, dtype=float) for s in extra_starts]
    starts += [lo + rng.random(lo.size) * (hi - lo) for _ in range(n_starts)]
    scored = sorted(((f(s), i) for i, s in enumerate(starts)), key=lambda t: t[0])
    best_x, best_v = None, np.inf
    for _, i in scored[: max(top, 1)]:
        x, v = pattern_search(f, starts[i], lo, hi, **ps_kwargs)
        if v < best_v:
            best_x, best_v = x, v
    return best_x, best_v


def golden_min(f, lo: float, hi: float, tol: float = 1e-12, iters: int = 200):
    """Golden-section minimum of a scalar unimodal function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if abs(b - a) < tol * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)
