"""Empirical verification of the discretization convergence results.

Traces information quantities of the discretized chain along coarse-to-fine
parameter schedules and scores them against analytic oracles, and checks
the supporting inequalities (smoothing vanishing, the forced-Markov-chain
bound, the clipped-pair total-variation identity) on concrete instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from contnet.densities import Density1D, Gaussian2D, MarkovModel, Uniform
from contnet.discretize import (
    MarkovDiscretization,
    _adaptive_rows,
    discretize_markov,
    mi_of_joint,
)
from contnet.errors import MarkovViolationError
from contnet.grids import ClipSpec, GridSpec, SmoothSpec, alphabet, cell_edges
from contnet.pmf import JointPmf, l1_distance

LN2 = math.log(2.0)

MI_TAGS = ("xy", "xu", "yv", "uv", "su", "sv", "suy")

# pilot-calibrated default tolerances: pairwise source tags vs sum / 4-axis tags
TAG_TOLERANCE = {
    "xy": 5e-3,
    "xu": 5e-3,
    "yv": 5e-3,
    "uv": 1e-2,
    "su": 1e-2,
    "sv": 1e-2,
    "suy": 1e-2,
}


@dataclass(frozen=True)
class Schedule:
    """Coarse-to-fine (n, l, u, eps) tuples: n and the window grow, eps shrinks."""

    points: tuple[tuple[int, float, float, float], ...]

    def __init__(self, points):
        pts = tuple((int(n), float(l), float(u), float(e)) for n, l, u, e in points)
        if not pts:
            raise ValueError("schedule is empty")
        for a, b in zip(pts, pts[1:]):
            if b[0] < a[0] or b[1] < a[1] or b[2] < a[2] or b[3] > a[3]:
                raise ValueError("schedule must refine monotonically")
        object.__setattr__(self, "points", pts)

    @classmethod
    def dyadic(cls, n_values, window: float, eps_rule=None) -> "Schedule":
        """Fixed window, grid levels n_values, eps = quarter cell by default."""
        eps_rule = eps_rule or (lambda n: 2.0 ** (-(n + 2)))
        return cls([(n, window, window, eps_rule(n)) for n in n_values])


@dataclass(frozen=True)
class ConvergenceTrace:
    schedule: Schedule
    values: tuple[float, ...]
    target: float
    tolerance: float

    def __post_init__(self):
        if len(self.values) != len(self.schedule.points):
            raise ValueError("one value per schedule point required")

    @property
    def final_error(self) -> float:
        return abs(self.values[-1] - self.target)

    @property
    def first_error(self) -> float:
        return abs(self.values[0] - self.target)

    @property
    def converged(self) -> bool:
        return self.final_error <= self.tolerance

    @property
    def loosely_monotone(self) -> bool:
        """Error at the finest step no worse than at the coarsest (1e-3 slack)."""
        return self.final_error <= self.first_error + 1e-3

    @property
    def verdict(self) -> bool:
        return self.converged and self.loosely_monotone


def _discretize_at(
    m: MarkovModel, n: int, lo: float, up: float, eps: float, aux_window_scale: float
) -> MarkovDiscretization:
    g = GridSpec(n)
    src_clip = ClipSpec(lo, up, "redraw")
    aux_clip = ClipSpec(lo * aux_window_scale, up * aux_window_scale, "redraw")
    return discretize_markov(
        m,
        src_clip,
        src_clip,
        aux_clip,
        aux_clip,
        g,
        g,
        g,
        g,
        SmoothSpec(eps),
    )


def mi_trace(
    m: MarkovModel,
    which: str,
    s: Schedule,
    oracle: float,
    tolerance: float | None = None,
    aux_window_scale: float = 1.5,
) -> ConvergenceTrace:
    """Trace one tagged mutual information of the discretized chain.

    Tags: xy, xu, yv, uv, su (= I(U+V;U)), sv, suy (= I(U+V, Y; U)).
    Auxiliary windows are the source window scaled by `aux_window_scale`
    (auxiliaries have larger spread than the sources they track).
    """
    if which not in MI_TAGS:
        raise ValueError(f"unknown tag {which!r}; expected one of {MI_TAGS}")
    if not math.isfinite(oracle):
        raise ValueError("oracle must be finite")
    values = []
    for n, lo, up, eps in s.points:
        d = _discretize_at(m, n, lo, up, eps, aux_window_scale)
        values.append(d.mi(which))
    tol = TAG_TOLERANCE[which] if tolerance is None else float(tolerance)
    return ConvergenceTrace(s, tuple(values), float(oracle), tol)


def check_corollary10(
    m: MarkovModel,
    s: Schedule,
    oracle: float,
    tolerance: float | None = None,
    aux_window_scale: float = 1.5,
) -> ConvergenceTrace:
    """Trace of I(U+V, Y; U) against its analytic value."""
    return mi_trace(m, "suy", s, oracle, tolerance, aux_window_scale)


# ---------------------------------------------------------------------------
# smoothing noise becomes invisible as eps -> 0


def smoothing_mi(d: Density1D, eps: float) -> float:
    """I(quantized noise; quantized noisy sum) for uniform[-eps, eps] noise.

    The joint grid is chosen with cell width <= eps/4 per the fineness
    precondition.
    """
    lo, hi = d.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("smoothing check requires a bounded base density")
    n = max(0, math.ceil(math.log2(4.0 / eps)))
    g = GridSpec(min(n, 30))
    nclip = ClipSpec(eps, eps, "redraw")
    n_pts = alphabet(nclip, g)
    n_edges = cell_edges(nclip, g)
    n_lows = np.clip(n_edges[:-1], -eps, eps)
    n_highs = np.clip(n_edges[1:], -eps, eps)

    span = max(abs(lo - eps), abs(hi + eps))
    sclip = ClipSpec(span, span, "saturate")
    s_edges = cell_edges(sclip, g)
    s_eval = np.clip(s_edges, lo - 2 * eps - 1.0, hi + 2 * eps + 1.0)

    density = 1.0 / (2.0 * eps)

    def rows(nflat: np.ndarray) -> np.ndarray:
        cdf = np.asarray(d.cdf(s_eval[None, :] - nflat[:, None]), dtype=float)
        return np.diff(cdf, axis=1) * density

    joint = _adaptive_rows(rows, n_lows, n_highs, 1e-12)
    total = joint.sum()
    if not total > 0:
        raise ValueError("smoothing joint has no mass")
    return mi_of_joint(joint / total)


def check_smoothing(d: Density1D, eps_values, tolerance: float = 5e-2) -> ConvergenceTrace:
    """Decreasing-eps trace of the smoothing mutual information (target 0).

    For a base density that is flat on its support the continuous value is
    eps/(2 ln 2) bits, so the default tolerance is met once eps <= ~0.07.
    """
    eps_values = [float(e) for e in eps_values]
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("eps values must strictly decrease")
    values = [smoothing_mi(d, e) for e in eps_values]
    lo, hi = d.support
    span = max(abs(lo), abs(hi)) + eps_values[0]
    sched = Schedule(
        [
            (max(0, math.ceil(math.log2(4.0 / e))), span, span, e)
            for e in eps_values
        ]
    )
    return ConvergenceTrace(sched, tuple(values), 0.0, float(tolerance))


# ---------------------------------------------------------------------------
# forced Markov chain inequality


def check_mc_forced1(
    p: JointPmf, order=("A", "B", "C", "D", "E")
) -> tuple[float, float, bool]:
    """Verify I(A;C|B) + I(E;C|D) >= V^2(P_CAE, P_CAhatEhat) / (2 ln 2).

    The comparison pair (Ahat, Ehat) keeps the (B, A) and (D, E) marginals
    but is forced through the chain Ahat - B - C - D - Ehat.  Requires the
    input to factor as P_C P_{AB|C} P_{DE|C} (checked within 1e-9).
    """
    a, b, c, d, e = order
    gap = p.conditional_mi((a, b), (d, e), (c,))
    if gap > 1e-9:
        raise MarkovViolationError(f"(A,B) - C - (D,E) violated: {gap:.3e}")

    lhs = p.conditional_mi((a,), (c,), (b,)) + p.conditional_mi((e,), (c,), (d,))

    # dense tensors in canonical (a, b, c, d, e) order
    pj = p.marginal((a, b, c, d, e)).probs
    p_bcd = pj.sum(axis=(0, 4))  # (b, c, d)
    p_ab = pj.sum(axis=(2, 3, 4))  # (a, b)
    p_de = pj.sum(axis=(0, 1, 2))  # (d, e)
    pb = p_ab.sum(axis=0)
    pd = p_de.sum(axis=1)
    a_given_b = np.divide(p_ab, pb[None, :], out=np.zeros_like(p_ab), where=pb[None, :] > 0)
    e_given_d = np.divide(p_de, pd[:, None], out=np.zeros_like(p_de), where=pd[:, None] > 0)
    forced = np.einsum("bcd,ab,de->cae", p_bcd, a_given_b, e_given_d)
    actual = np.transpose(pj.sum(axis=(1, 3)), (1, 0, 2))  # (c, a, e)
    v = float(np.abs(actual - forced).sum())
    rhs = v * v / (2.0 * LN2)
    return lhs, rhs, lhs >= rhs - 1e-10


def random_mc_instance(rng: np.random.Generator, sizes=(2, 2, 2, 2, 2)) -> JointPmf:
    """Dirichlet(1,..,1) factors P_C, P_{AB|C}, P_{DE|C} assembled into a joint."""
    from contnet.pmf import Axis

    na, nb, nc, nd, ne = sizes
    p_c = rng.dirichlet(np.ones(nc))
    ab_given_c = np.stack([rng.dirichlet(np.ones(na * nb)).reshape(na, nb) for _ in range(nc)])
    de_given_c = np.stack([rng.dirichlet(np.ones(nd * ne)).reshape(nd, ne) for _ in range(nc)])
    joint = np.einsum("c,cab,cde->abcde", p_c, ab_given_c, de_given_c)
    axes = [
        Axis(name, tuple(float(i) for i in range(k)))
        for name, k in zip(("A", "B", "C", "D", "E"), sizes)
    ]
    return JointPmf(axes, joint, normalized=False)


# ---------------------------------------------------------------------------
# clipped-pair total variation identity


@dataclass(frozen=True)
class ClippedTvCheck:
    l1: float
    reference: float

    @property
    def identity_err(self) -> float:
        return abs(self.l1 - self.reference)


def _clipped_panels(edges: np.ndarray, lo: float, hi: float):
    """Preimage interval of each grid cell under the saturating clip onto
    [lo, hi]: the cell holding `lo` absorbs the lower tail, the cell holding
    `hi` the upper tail, and out-of-window cells become empty."""
    a = edges[:-1].copy()
    b = edges[1:].copy()
    contains_lo = (a < lo) & (lo <= b)
    contains_hi = (a < hi) & (hi <= b)
    empty = ((b <= lo) | (a >= hi)) & ~contains_lo & ~contains_hi
    plo = np.where(contains_lo, -np.inf, a)
    phi = np.where(contains_hi, np.inf, b)
    plo[empty] = 0.0
    phi[empty] = 0.0
    return plo, phi


def check_clipped_tv(
    src: Gaussian2D, window_x: tuple[float, float], window_y: tuple[float, float], n: int = 6
) -> ClippedTvCheck:
    """Compare V(clipped pair, original pair) with 2(1 - P[both in window]).

    Both laws are discretized on a shared wide partition (saturate semantics
    for the clipped pair, per the identity being checked).  The partition is
    the dyadic grid refined with hairline cells at the window edges so the
    boundary atoms of the clipped law are not cancelled against in-cell mass.
    """
    lx, ux = window_x
    ly, uy = window_y
    sx, sy = src.support
    wide = max(abs(sx[0]), sx[1], abs(sy[0]), sy[1], lx, ux, ly, uy) + 1.0
    clip_wide = ClipSpec(wide, wide, "saturate")
    g = GridSpec(n)
    delta = 1e-7
    base = cell_edges(clip_wide, g)
    edges = np.unique(
        np.concatenate([base, [-lx - delta, -lx, ux - delta, ux,
                               -ly - delta, -ly, uy - delta, uy]])
    )

    marg_x = src.marginal_x()
    y_eval = np.clip(edges, -1e300, 1e300)
    neg, pos = np.isneginf(edges), np.isposinf(edges)

    def rows_orig(xs: np.ndarray) -> np.ndarray:
        from scipy.special import ndtr

        mu, sg = src.conditional_y(xs)
        cdf = ndtr((y_eval[None, :] - mu[:, None]) / sg)
        cdf[:, neg] = 0.0
        cdf[:, pos] = 1.0
        return np.diff(cdf, axis=1) * np.asarray(marg_x.pdf(xs), dtype=float)[:, None]

    x_lows = np.clip(edges[:-1], sx[0], sx[1])
    x_highs = np.clip(edges[1:], sx[0], sx[1])
    m_orig = _adaptive_rows(rows_orig, x_lows, x_highs, 1e-11)

    # clipped pair: integrate over clip preimages instead
    pxlo, pxhi = _clipped_panels(edges, -lx, ux)
    pylo, pyhi = _clipped_panels(edges, -ly, uy)
    ylo_eval = np.clip(pylo, -1e300, 1e300)
    yhi_eval = np.clip(pyhi, -1e300, 1e300)
    ylo_neg = np.isneginf(pylo)
    yhi_pos = np.isposinf(pyhi)

    def rows_clip(xs: np.ndarray) -> np.ndarray:
        from scipy.special import ndtr

        mu, sg = src.conditional_y(xs)
        chi = ndtr((yhi_eval[None, :] - mu[:, None]) / sg)
        clo = ndtr((ylo_eval[None, :] - mu[:, None]) / sg)
        chi[:, yhi_pos] = 1.0
        clo[:, ylo_neg] = 0.0
        return (chi - clo) * np.asarray(marg_x.pdf(xs), dtype=float)[:, None]

    cx_lows = np.clip(np.where(np.isneginf(pxlo), sx[0], pxlo), sx[0], sx[1])
    cx_highs = np.clip(np.where(np.isposinf(pxhi), sx[1], pxhi), sx[0], sx[1])
    m_clip = _adaptive_rows(rows_clip, cx_lows, cx_highs, 1e-11)

    l1 = float(np.abs(m_clip / m_clip.sum() - m_orig / m_orig.sum()).sum())

    # reference: 2 [1 - P(-lx <= X <= ux, -ly <= Y <= uy)]
    def rows_in(xs: np.ndarray) -> np.ndarray:
        from scipy.special import ndtr

        mu, sg = src.conditional_y(xs)
        hi = ndtr((uy - mu) / sg)
        lo = ndtr((-ly - mu) / sg)
        return ((hi - lo) * np.asarray(marg_x.pdf(xs), dtype=float))[:, None]

    p_in = float(_adaptive_rows(rows_in, np.asarray([-lx]), np.asarray([ux]), 1e-12)[0, 0])
    return ClippedTvCheck(l1, 2.0 * (1.0 - p_in))
