"""Clip -> smooth -> quantize: turning continuous models into finite pmfs.

Two clipping semantics are supported throughout, chosen per variable:

* ``saturate`` - out-of-window mass collects at the window edges (and hence
  in the unbounded end cells of the grid);
* ``redraw``  - out-of-window mass is replaced by an independent draw from
  the renormalized in-window marginal, so no boundary atoms appear.

Auxiliary variables can additionally be smoothed with uniform[-eps, eps]
noise before quantization; smoothing and quantization cell masses are
evaluated through CDF antiderivatives, so the pipeline is deterministic.

The four-variable chain U - X - Y - V is discretized in factored form
(pair masses plus two conditional stochastic matrices); the dense joint
tensor is assembled on demand for alphabets that fit in memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr, xlogy

from contnet.densities import (
    AdditiveGaussian,
    Channel,
    Constant,
    Density1D,
    Density2D,
    Gaussian,
    Gaussian2D,
    MarkovModel,
    Product2D,
    Smoothed,
    _phi,
)
from contnet.errors import GridMismatchError, QuadratureError
from contnet.grids import ClipSpec, GridSpec, SmoothSpec, alphabet, cell_edges, quantize
from contnet.pmf import Axis, JointPmf
from contnet.quadrature import DEFAULT_TOL, gauss_legendre_nodes, integrate_panels

LN2 = math.log(2.0)


def entropy_bits(m: np.ndarray) -> float:
    """Entropy in bits of an (unnormalized-tolerant) nonnegative array."""
    m = np.asarray(m, dtype=float)
    return float(-xlogy(m, m).sum() / LN2)


def mi_of_joint(m: np.ndarray) -> float:
    """Mutual information in bits between the two axes of a joint matrix."""
    hx = entropy_bits(m.sum(axis=1))
    hy = entropy_bits(m.sum(axis=0))
    return max(0.0, hx + hy - entropy_bits(m))


def smooth_density(d: Density1D, s: SmoothSpec) -> Density1D:
    """Convolve a density with uniform[-eps, eps] noise (analytically)."""
    return Smoothed(d, s.eps)


# ---------------------------------------------------------------------------
# one-dimensional discretization


def _cell_masses_1d(d: Density1D, edges: np.ndarray, tol: float) -> np.ndarray:
    """Mass of d in each (edges[i], edges[i+1]] cell; edges may carry +-inf."""
    c = d.cdf(np.clip(edges, -1e300, 1e300))
    if c is not None:
        c = np.asarray(c, dtype=float)
        c[np.isneginf(edges)] = 0.0
        c[np.isposinf(edges)] = 1.0
        return np.diff(c)
    lo, hi = d.support
    lows = np.clip(edges[:-1], lo, hi)
    highs = np.clip(edges[1:], lo, hi)
    return integrate_panels(d.pdf, lows, highs, tol=tol)


def discretize_1d(
    d: Density1D,
    c: ClipSpec,
    g: GridSpec,
    name: str = "x",
    tol: float = DEFAULT_TOL,
) -> JointPmf:
    """Quantized law of the clipped variable as a single-axis pmf.

    saturate mode sends tail mass to the end cells; redraw mode renormalizes
    the in-window law.  The result is globally renormalized (quadrature
    residue above 1e-9 raises).
    """
    pts = alphabet(c, g)
    edges = cell_edges(c, g)
    if c.mode == "saturate":
        masses = _cell_masses_1d(d, edges, tol)
        expected = 1.0 - d.tail_truncation()
    else:
        win_edges = np.clip(edges, -c.lower, c.upper)
        masses = _cell_masses_1d(d, win_edges, tol)
        total = masses.sum()
        if not total > 0:
            raise QuadratureError("redraw window carries no probability mass")
        masses = masses / total
        expected = 1.0
    total = masses.sum()
    if abs(total - expected) > 1e-9:
        raise QuadratureError(f"cell masses sum to {total!r}; quadrature failure")
    return JointPmf([Axis(name, tuple(pts))], np.clip(masses, 0.0, None) / total, normalized=False)


def histogram_discretize(samples, clips, grids, names=None) -> JointPmf:
    """Empirical cell frequencies of sample tuples; exact rational counts."""
    pts = np.asarray(samples, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.size == 0:
        raise ValueError("empty sample list")
    k = pts.shape[1]
    if len(clips) != k or len(grids) != k:
        raise ValueError("need one ClipSpec and GridSpec per sample coordinate")
    names = names or [f"x{i}" for i in range(k)]
    axes = []
    idx_cols = []
    for j in range(k):
        inner = cell_edges(clips[j], grids[j])[1:-1]
        idx_cols.append(np.searchsorted(inner, pts[:, j], side="left"))
        axes.append(Axis(names[j], tuple(alphabet(clips[j], grids[j]))))
    shape = tuple(len(a) for a in axes)
    flat = np.zeros(pts.shape[0], dtype=np.int64)
    for j in range(k):
        flat = flat * shape[j] + idx_cols[j]
    counts = np.bincount(flat, minlength=int(np.prod(shape))).astype(float)
    return JointPmf(axes, (counts / pts.shape[0]).reshape(shape), normalized=False)


# ---------------------------------------------------------------------------
# adaptive row integrator: shared by pair masses and channel matrices


def _adaptive_rows(row_fn, lows, highs, tol: float, max_depth: int = 30) -> np.ndarray:
    """result[i, :] = ∫_{[lows_i, highs_i]} row_fn(x) dx for a vector integrand.

    row_fn(x_flat) returns one row per evaluation point.  Adaptive Simpson
    with per-panel absolute tolerance (sup norm across the row), endpoint
    rows shared between refinement levels so the integrand is evaluated in
    a few large batches.
    """
    a = np.asarray(lows, dtype=float).copy()
    b = np.asarray(highs, dtype=float).copy()
    n = a.size
    m = 0.5 * (a + b)
    fa = np.asarray(row_fn(a), dtype=float)
    fm = np.asarray(row_fn(m), dtype=float)
    fb = np.asarray(row_fn(b), dtype=float)
    ncols = fa.shape[1]
    est = (b - a)[:, None] / 6.0 * (fa + 4.0 * fm + fb)

    result = np.zeros((n, ncols), dtype=float)
    cell = np.arange(n)
    seg_tol = np.full(n, tol, dtype=float)
    depth = np.zeros(n, dtype=np.int32)

    while cell.size:
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = np.asarray(row_fn(lm), dtype=float)
        frm = np.asarray(row_fn(rm), dtype=float)
        h = (b - a)[:, None]
        s_left = h / 12.0 * (fa + 4.0 * flm + fm)
        s_right = h / 12.0 * (fm + 4.0 * frm + fb)
        s2 = s_left + s_right
        delta = (s2 - est) / 15.0
        err = np.abs(delta).max(axis=1)
        done = (err <= seg_tol) | ((b - a) <= np.abs(m) * 4e-16 + 5e-308)
        if np.any(done):
            np.add.at(result, cell[done], (s2 + delta)[done])
        keep = ~done
        if not np.any(keep):
            break
        if int(depth[keep].max()) >= max_depth:
            raise QuadratureError("vector-panel quadrature did not converge")
        cell = np.concatenate([cell[keep], cell[keep]])
        seg_tol = np.concatenate([0.5 * seg_tol[keep], 0.5 * seg_tol[keep]])
        depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])
        ak, bk, mk = a[keep], b[keep], m[keep]
        fak, fmk, fbk = fa[keep], fm[keep], fb[keep]
        a, b = np.concatenate([ak, mk]), np.concatenate([mk, bk])
        m = np.concatenate([0.5 * (ak + mk), 0.5 * (mk + bk)])
        fa = np.concatenate([fak, fmk])
        fb = np.concatenate([fmk, fbk])
        fm = np.concatenate([flm[keep], frm[keep]])
        est = np.concatenate([s_left[keep], s_right[keep]])
    return result


def _x_panels(edges: np.ndarray, c: ClipSpec, support: tuple[float, float]):
    """Finite x-integration panels per cell for the requested clip mode."""
    lows = edges[:-1].copy()
    highs = edges[1:].copy()
    if c.mode == "saturate":
        lows[0] = min(support[0], highs[0])
        highs[-1] = max(support[1], lows[-1])
    else:
        lows = np.clip(lows, -c.lower, c.upper)
        highs = np.clip(highs, -c.lower, c.upper)
    return lows, highs


# ---------------------------------------------------------------------------
# pair-source cell masses


def _window_masses(marg: Density1D, edges: np.ndarray, c: ClipSpec) -> np.ndarray:
    return _cell_masses_1d(marg, np.clip(edges, -c.lower, c.upper), DEFAULT_TOL)


def _mode_masses(marg: Density1D, edges: np.ndarray, c: ClipSpec) -> np.ndarray:
    if c.mode == "saturate":
        return _cell_masses_1d(marg, edges, DEFAULT_TOL)
    m = _window_masses(marg, edges, c)
    return m / m.sum()


def pair_masses(
    src: Density2D,
    cx: ClipSpec,
    cy: ClipSpec,
    gx: GridSpec,
    gy: GridSpec,
    tol: float = DEFAULT_TOL,
    names: tuple[str, str] = ("x", "y"),
) -> tuple[Axis, Axis, np.ndarray]:
    """Joint cell masses of the clipped-and-quantized source pair."""
    x_axis = Axis(names[0], tuple(alphabet(cx, gx)))
    y_axis = Axis(names[1], tuple(alphabet(cy, gy)))
    ex, ey = cell_edges(cx, gx), cell_edges(cy, gy)

    if isinstance(src, Product2D):
        mx = discretize_1d(src.dx, cx, gx, names[0], tol).probs
        my = discretize_1d(src.dy, cy, gy, names[1], tol).probs
        return x_axis, y_axis, np.outer(mx, my)

    if not isinstance(src, Gaussian2D):
        raise TypeError(f"unsupported 2-D source family: {type(src).__name__}")

    marg_x, marg_y = src.marginal_x(), src.marginal_y()
    y_edges = ey if cy.mode == "saturate" else np.clip(ey, -cy.lower, cy.upper)
    lows, highs = _x_panels(ex, cx, src.support[0])

    y_eval = np.clip(y_edges, -1e300, 1e300)
    neg, pos = np.isneginf(y_edges), np.isposinf(y_edges)

    def rows(x_flat: np.ndarray) -> np.ndarray:
        mu, sg = src.conditional_y(x_flat)
        cdf = ndtr((y_eval[None, :] - mu[:, None]) / sg)
        cdf[:, neg] = 0.0
        cdf[:, pos] = 1.0
        return np.diff(cdf, axis=1) * np.asarray(marg_x.pdf(x_flat), dtype=float)[:, None]

    m = _adaptive_rows(rows, lows, highs, tol)

    if cy.mode == "redraw":
        py_in = _window_masses(marg_y, ey, cy)
        pw = py_in / py_in.sum()
        px_mode = (
            _cell_masses_1d(marg_x, ex, tol)
            if cx.mode == "saturate"
            else _window_masses(marg_x, ex, cx)
        )
        m = m + np.outer(np.clip(px_mode - m.sum(axis=1), 0.0, None), pw)
    if cx.mode == "redraw":
        px_in = _window_masses(marg_x, ex, cx)
        pz = px_in / px_in.sum()
        py_target = _mode_masses(marg_y, ey, cy)
        m = m + np.outer(pz, np.clip(py_target - m.sum(axis=0), 0.0, None))

    total = m.sum()
    if not (total > 0 and abs(total - 1.0) < 1e-6):
        raise QuadratureError(f"pair masses sum to {total!r}")
    return x_axis, y_axis, np.clip(m, 0.0, None) / total


# ---------------------------------------------------------------------------
# conditional (channel) cell-mass algebra for additive-Gaussian channels
#
# All quantities reduce to the CDF of a clipped (and optionally uniformly
# smoothed) Gaussian, evaluated through the antiderivative
# int Phi = z*Phi(z) + phi(z), so no per-cell quadrature is needed in u.


def _int_ndtr(z):
    return z * ndtr(z) + _phi(z)


def _gauss_cdf(t, mean, sigma):
    return ndtr((t - mean) / sigma)


def _gauss_cdf_antideriv(t, mean, sigma):
    return sigma * _int_ndtr((t - mean) / sigma)


class _ClippedCondGaussian:
    """CDF / CDF-antiderivative of the clipped conditional law given x-nodes.

    means: array of conditional means (one per x evaluation node); window
    [-l, u]; mode selects saturate vs redraw against the (Gaussian) marginal.
    """

    def __init__(self, means: np.ndarray, sigma: float, c: ClipSpec,
                 marginal: Gaussian | None):
        self.means = means[:, None]
        self.sigma = sigma
        self.lo, self.hi = -c.lower, c.upper
        self.mode = c.mode
        if c.mode == "redraw":
            if marginal is None:
                raise NotImplementedError(
                    "redraw clipping of a channel requires a Gaussian marginal"
                )
            z = float(marginal.cdf(self.hi) - marginal.cdf(self.lo))
            if not z > 0:
                raise QuadratureError("redraw window carries no channel mass")
            self.marg = marginal
            self.zin = z
        self.f_lo = _gauss_cdf(self.lo, self.means, sigma)
        self.f_hi = _gauss_cdf(self.hi, self.means, sigma)

    def cdf(self, t: np.ndarray) -> np.ndarray:
        """P(clipped U <= t | x); t broadcast against x-nodes."""
        tc = np.clip(t, self.lo, self.hi)
        base = _gauss_cdf(tc, self.means, self.sigma)
        if self.mode == "saturate":
            out = np.where(t < self.lo, 0.0, base)
            return np.where(t >= self.hi, 1.0, out)
        p_out = 1.0 - (self.f_hi - self.f_lo)
        f_w = base - self.f_lo
        f_tm = (np.asarray(self.marg.cdf(tc), dtype=float) - float(self.marg.cdf(self.lo))) / self.zin
        val = f_w + p_out * f_tm
        val = np.where(t < self.lo, 0.0, val)
        return np.where(t >= self.hi, 1.0, np.clip(val, 0.0, 1.0))

    def cdf_antideriv(self, t: np.ndarray) -> np.ndarray:
        """A(t) = ∫_{lo}^{t} cdf(s) ds, piecewise closed form.

        Above the window the integrand is identically 1, so
        A(t) = A(hi) + (t - hi) there; below the window A = 0.
        """
        tc = np.clip(t, self.lo, self.hi)
        above = np.clip(t - self.hi, 0.0, None)
        g = _gauss_cdf_antideriv(tc, self.means, self.sigma)
        g_lo = _gauss_cdf_antideriv(self.lo, self.means, self.sigma)
        if self.mode == "saturate":
            a_in = g - g_lo
        else:
            p_out = 1.0 - (self.f_hi - self.f_lo)
            a_w = (g - g_lo) - self.f_lo * (tc - self.lo)
            gm = _gauss_cdf_antideriv(tc, self.marg.mean, self.marg.sigma)
            gm_lo = _gauss_cdf_antideriv(self.lo, self.marg.mean, self.marg.sigma)
            fm_lo = float(self.marg.cdf(self.lo))
            a_tm = (gm - gm_lo - fm_lo * (tc - self.lo)) / self.zin
            a_in = a_w + p_out * a_tm
        return np.where(t < self.lo, 0.0, a_in + above)

    def cell_masses(self, edges: np.ndarray, eps: float | None) -> np.ndarray:
        """Masses of the (smoothed) clipped law in u-cells, per x-node."""
        finite = np.clip(edges, self.lo - (eps or 0.0) - 1.0, self.hi + (eps or 0.0) + 1.0)
        if eps is None:
            vals = self.cdf(finite[None, :])
        else:
            upper = self.cdf_antideriv(finite[None, :] + eps)
            lower = self.cdf_antideriv(finite[None, :] - eps)
            vals = np.clip((upper - lower) / (2.0 * eps), 0.0, 1.0)
        vals[:, np.isneginf(edges)] = 0.0
        vals[:, np.isposinf(edges)] = 1.0
        return np.diff(vals, axis=1)


def _smoothed_axis(c: ClipSpec, g: GridSpec, eps: float | None, name: str) -> tuple[Axis, np.ndarray]:
    """Alphabet and cell edges of the (optionally smoothed) clipped variable."""
    if eps is None:
        return Axis(name, tuple(alphabet(c, g))), cell_edges(c, g)
    kmin = math.floor((-c.lower - eps) * 2.0**g.n + 0.5)
    kmax = math.floor((c.upper + eps) * 2.0**g.n + 0.5)
    pts = np.arange(kmin, kmax + 1, dtype=float) * g.step
    inner = (np.arange(kmin, kmax, dtype=float) * g.step) + g.half
    edges = np.concatenate(([-np.inf], inner, [np.inf]))
    return Axis(name, tuple(pts)), edges


def channel_matrix(
    ch: Channel,
    x_marginal: Density1D,
    cx: ClipSpec,
    gx: GridSpec,
    cu: ClipSpec,
    gu: GridSpec,
    s: SmoothSpec | None,
    tol: float = DEFAULT_TOL,
    name: str = "u",
) -> tuple[Axis, np.ndarray]:
    """Stochastic matrix B[k, i] = P(quantized-aux = k | quantized-source = i).

    The conditional is averaged over the source law inside each source cell
    (including the out-of-window region when the source clip mode is redraw),
    so composing B with the pair masses reproduces the factored joint of the
    discretized chain.
    """
    eps = None if s is None else s.eps

    if isinstance(ch, Constant):
        val = quantize(max(min(cu.upper, ch.value), -cu.lower), gu)
        u_axis = Axis(name, (val,))
        nx = len(alphabet(cx, gx))
        return u_axis, np.ones((1, nx), dtype=float)

    if not isinstance(ch, AdditiveGaussian):
        raise TypeError(f"unsupported channel family: {type(ch).__name__}")

    u_axis, u_edges = _smoothed_axis(cu, gu, eps, name)

    marg = None
    if cu.mode == "redraw":
        if not isinstance(x_marginal, Gaussian):
            raise NotImplementedError("redraw aux clipping needs a Gaussian source marginal")
        marg = Gaussian(
            ch.gain * x_marginal.mean,
            math.hypot(ch.gain * x_marginal.sigma, ch.sigma),
        )

    def rows(x_flat: np.ndarray) -> np.ndarray:
        cond = _ClippedCondGaussian(ch.gain * x_flat, ch.sigma, cu, marg)
        masses = cond.cell_masses(u_edges, eps)
        return masses * np.asarray(x_marginal.pdf(x_flat), dtype=float)[:, None]

    ex = cell_edges(cx, gx)
    lows, highs = _x_panels(ex, cx, x_marginal.support)
    num = _adaptive_rows(rows, lows, highs, tol)  # (nx_cells, nu)

    if cx.mode == "redraw":
        # weight from the out-of-window source region, shared across cells in
        # proportion to the truncated marginal
        px_in = _window_masses(x_marginal, ex, cx)
        pz = px_in / px_in.sum()
        slo, shi = x_marginal.support
        lo_panel = (slo, min(-cx.lower, shi))
        hi_panel = (max(cx.upper, slo), shi)
        out_lows = [p[0] for p in (lo_panel, hi_panel) if p[1] > p[0]]
        out_highs = [p[1] for p in (lo_panel, hi_panel) if p[1] > p[0]]
        if out_lows:
            out_rows = _adaptive_rows(rows, out_lows, out_highs, tol)
            num = num + np.outer(pz, out_rows.sum(axis=0))
    den = num.sum(axis=1)

    den = np.where(den > 0, den, 1.0)
    b = (num / den[:, None]).T
    return u_axis, np.clip(b, 0.0, None)


# ---------------------------------------------------------------------------
# factored discretization of the chain U - X - Y - V


def _axis_grid_indices(axis: Axis, g: GridSpec) -> np.ndarray:
    k = np.round(axis.values() * 2.0**g.n).astype(np.int64)
    if not np.allclose(k * g.step, axis.values(), rtol=0, atol=0):
        raise GridMismatchError(f"axis '{axis.name}' does not lie on the n={g.n} grid")
    return k


@dataclass(frozen=True)
class MarkovDiscretization:
    """Factored joint law of the discretized chain U - X - Y - V.

    pxy is the source pair pmf; pu_given_x / pv_given_y are column-stochastic
    in the source index: B[k, i] = P(U=k | X=i).  The chain holds exactly by
    construction.
    """

    x_axis: Axis
    y_axis: Axis
    u_axis: Axis
    v_axis: Axis
    pxy: np.ndarray
    pu_given_x: np.ndarray
    pv_given_y: np.ndarray
    gu: GridSpec
    gv: GridSpec

    @cached_property
    def px(self) -> np.ndarray:
        return self.pxy.sum(axis=1)

    @cached_property
    def py(self) -> np.ndarray:
        return self.pxy.sum(axis=0)

    @cached_property
    def pxu(self) -> np.ndarray:
        """Joint over (x, u)."""
        return (self.pu_given_x * self.px[None, :]).T

    @cached_property
    def pyv(self) -> np.ndarray:
        return (self.pv_given_y * self.py[None, :]).T

    @cached_property
    def puv(self) -> np.ndarray:
        return self.pu_given_x @ self.pxy @ self.pv_given_y.T

    @cached_property
    def pxv(self) -> np.ndarray:
        """Joint over (x, v) through the chain."""
        return self.pxy @ self.pv_given_y.T

    @cached_property
    def pyu(self) -> np.ndarray:
        """Joint over (y, u) through the chain."""
        return (self.pu_given_x @ self.pxy).T

    @cached_property
    def _sum_indices(self) -> tuple[np.ndarray, np.ndarray, int]:
        if self.gu.n != self.gv.n:
            raise GridMismatchError("sum tags require matching aux grid levels")
        ku = _axis_grid_indices(self.u_axis, self.gu)
        kv = _axis_grid_indices(self.v_axis, self.gv)
        smin = int(ku.min() + kv.min())
        return ku, kv, smin

    def sum_axis(self, name: str = "s") -> Axis:
        ku, kv, smin = self._sum_indices
        smax = int(ku.max() + kv.max())
        return Axis(name, tuple(np.arange(smin, smax + 1) * self.gu.step))

    @cached_property
    def psum(self) -> np.ndarray:
        ku, kv, smin = self._sum_indices
        sidx = (ku[:, None] + kv[None, :]) - smin
        nsum = int(sidx.max()) + 1
        return np.bincount(sidx.ravel(), weights=self.puv.ravel(), minlength=nsum)

    # -- information quantities --------------------------------------------

    def mi(self, tag: str) -> float:
        """Mutual information for a named quantity of the discretized chain.

        Tags: xy, xu, yv, uv, su (= I(U+V; U)), sv, suy (= I(U+V, Y; U)).
        """
        if tag == "xy":
            return mi_of_joint(self.pxy)
        if tag == "xu":
            return mi_of_joint(self.pxu)
        if tag == "yv":
            return mi_of_joint(self.pyv)
        if tag == "uv":
            return mi_of_joint(self.puv)
        if tag == "xv":
            return mi_of_joint(self.pxv)
        if tag == "uy":
            return mi_of_joint(self.pyu)
        if tag in ("su", "sv"):
            h_sum = entropy_bits(self.psum)
            h_uv = entropy_bits(self.puv)
            axis = 1 if tag == "su" else 0
            h_single = entropy_bits(self.puv.sum(axis=axis))
            # (U+V, U) <-> (U, V) is a bijection, so H(U+V, U) = H(U, V)
            return max(0.0, h_sum + h_single - h_uv)
        if tag == "suy":
            return self._mi_sum_y()
        raise ValueError(f"unknown mi tag {tag!r}")

    def _mi_sum_y(self) -> float:
        """I(U+V, Y; U) via per-y convolutions (U and V independent given Y)."""
        t = self.pu_given_x @ self.pxy  # (nu, ny) joint over (U, Y)
        c = self.pv_given_y * self.py[None, :]  # (nv, ny) joint over (V, Y)
        nu, ny = t.shape
        nv = c.shape[0]
        nsum = nu + nv - 1
        nfft = 1 << (nsum - 1).bit_length()
        ft = np.fft.rfft(t, n=nfft, axis=0)
        fc = np.fft.rfft(self.pv_given_y, n=nfft, axis=0)
        psy = np.fft.irfft(ft * fc, n=nfft, axis=0)[:nsum, :]
        psy = np.clip(psy, 0.0, None)
        h_sy = entropy_bits(psy)
        h_y = entropy_bits(self.py)
        h_uy = entropy_bits(t)
        h_vy = entropy_bits(c)
        h_uvy = h_uy + h_vy - h_y  # U and V are independent given Y
        h_u = entropy_bits(self.puv.sum(axis=1))
        # (U+V, U, Y) <-> (U, V, Y) bijection
        return max(0.0, h_sy + h_u - h_uvy)

    # -- dense assembly ------------------------------------------------------

    def to_joint_pmf(self, max_entries: int = 60_000_000) -> JointPmf:
        size = self.pxy.size * len(self.u_axis) * len(self.v_axis)
        if size > max_entries:
            raise MemoryError(
                f"dense joint would hold {size} entries; query the factored form instead"
            )
        probs = np.einsum("ij,ki,mj->ijkm", self.pxy, self.pu_given_x, self.pv_given_y)
        return JointPmf(
            [self.x_axis, self.y_axis, self.u_axis, self.v_axis],
            probs,
            normalized=False,
        )

    def factorization_residual(self) -> float:
        """Max deviation of the dense joint from the declared factorization."""
        joint = self.to_joint_pmf()
        expected = np.einsum("ij,ki,mj->ijkm", self.pxy, self.pu_given_x, self.pv_given_y)
        return float(np.abs(joint.probs - expected).max())


def discretize_markov(
    m: MarkovModel,
    cx: ClipSpec,
    cy: ClipSpec,
    cu: ClipSpec,
    cv: ClipSpec,
    gx: GridSpec,
    gy: GridSpec,
    gu: GridSpec,
    gv: GridSpec,
    s: SmoothSpec | None = None,
    tol: float = DEFAULT_TOL,
    names: tuple[str, str, str, str] = ("x", "y", "u", "v"),
) -> MarkovDiscretization:
    """Discretize the chain U - X - Y - V into factored finite form.

    With a SmoothSpec the auxiliaries are smoothed before quantization;
    without one they are only clipped and quantized.
    """
    x_axis, y_axis, pxy = pair_masses(m.source, cx, cy, gx, gy, tol, (names[0], names[1]))
    if isinstance(m.source, Gaussian2D):
        marg_x, marg_y = m.source.marginal_x(), m.source.marginal_y()
    elif isinstance(m.source, Product2D):
        marg_x, marg_y = m.source.dx, m.source.dy
    else:  # pragma: no cover - pair_masses already rejects other families
        raise TypeError("unsupported source family")
    u_axis, b = channel_matrix(m.channel_u, marg_x, cx, gx, cu, gu, s, tol, names[2])
    v_axis, c = channel_matrix(m.channel_v, marg_y, cy, gy, cv, gv, s, tol, names[3])
    return MarkovDiscretization(x_axis, y_axis, u_axis, v_axis, pxy, b, c, gu, gv)
