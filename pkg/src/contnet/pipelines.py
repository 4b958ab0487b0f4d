"""End-to-end drivers: Gaussian test channels through the discretization
pipeline into region/constraint evaluations.

Fine grids make dense four-axis tensors impossible, so everything here works
on the factored chain representation; each driver reduces its region's
single-letter expressions to pairwise joints of the chain (exact identities,
not approximations: conditional independences of the chain make the
higher-order entropies decompose).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from contnet.densities import AdditiveGaussian, Gaussian, Gaussian2D, MarkovModel
from contnet.discretize import (
    MarkovDiscretization,
    channel_matrix,
    discretize_1d,
    discretize_markov,
    entropy_bits,
    mi_of_joint,
)
from contnet.errors import GridMismatchError
from contnet.gaussian import GaussianSpec, conditional_cov, gaussian_cmi, gaussian_mi
from contnet.grids import ClipSpec, GridSpec, SmoothSpec, alphabet, cell_edges
from contnet.pmf import Axis
from contnet.quadrature import DEFAULT_TOL


def _chain(
    rho: float,
    sigma_u: float,
    sigma_v: float,
    n: int,
    window: float,
    aux_scale: float = 1.5,
    gain_u: float = 1.0,
    gain_v: float = 1.0,
    eps: float | None = None,
) -> MarkovDiscretization:
    m = MarkovModel(
        Gaussian2D(rho=rho),
        AdditiveGaussian(sigma_u, gain=gain_u),
        AdditiveGaussian(sigma_v, gain=gain_v),
    )
    g = GridSpec(n)
    src = ClipSpec(window, window, "redraw")
    aux = ClipSpec(window * aux_scale, window * aux_scale, "redraw")
    s = SmoothSpec(eps) if eps else None
    return discretize_markov(m, src, src, aux, aux, g, g, g, g, s)


# ---------------------------------------------------------------------------
# side-information source coding


def wz_gaussian_oracle(rho: float, q: float) -> float:
    """I(U;X) - I(U;Y) for U = X + N(0,q), (X,Y) unit-variance corr rho."""
    cov = [[1.0, rho, 1.0], [rho, 1.0, rho], [1.0, rho, 1.0 + q]]
    spec = GaussianSpec((0, 0, 0), cov, ("X", "Y", "U"))
    return gaussian_mi(spec, "U", "X") - gaussian_mi(spec, "U", "Y")


def wz_discretized(rho: float, q: float, n: int = 7, window: float = 6.0) -> float:
    d = _chain(rho, math.sqrt(q), 1.0, n, window)
    return max(0.0, d.mi("xu") - d.mi("uy"))


# ---------------------------------------------------------------------------
# distributed source coding (unstructured helpers)


def bt_gaussian_oracle(rho: float, q1: float, q2: float) -> tuple[float, float, float]:
    """(R1, R2, Rsum) closed-form bounds for U = X + N(0,q1), V = Y + N(0,q2)."""
    cov = [
        [1.0, rho, 1.0, rho],
        [rho, 1.0, rho, 1.0],
        [1.0, rho, 1.0 + q1, rho],
        [rho, 1.0, rho, 1.0 + q2],
    ]
    spec = GaussianSpec((0, 0, 0, 0), cov, ("X", "Y", "U", "V"))
    r1 = gaussian_cmi(spec, "X", "U", "V")
    r2 = gaussian_cmi(spec, "Y", "V", "U")
    rsum = gaussian_mi(spec, ("X", "Y"), ("U", "V"))
    return r1, r2, rsum


def bt_discretized(
    rho: float, q1: float, q2: float, n: int = 7, window: float = 6.0
) -> tuple[float, float, float]:
    """The three region bounds evaluated on the discretized chain.

    Conditional independences of the chain reduce everything to pairwise
    entropies: H(X,U,V) = H(X,U) + H(X,V) - H(X), etc.
    """
    d = _chain(rho, math.sqrt(q1), math.sqrt(q2), n, window)
    h = {
        "x": entropy_bits(d.px),
        "y": entropy_bits(d.py),
        "xy": entropy_bits(d.pxy),
        "xu": entropy_bits(d.pxu),
        "xv": entropy_bits(d.pxv),
        "yu": entropy_bits(d.pyu),
        "yv": entropy_bits(d.pyv),
        "uv": entropy_bits(d.puv),
    }
    h_xuv = h["xu"] + h["xv"] - h["x"]
    h_yuv = h["yu"] + h["yv"] - h["y"]
    h_xyuv = h["xy"] + (h["xu"] - h["x"]) + (h["yv"] - h["y"])
    h_u = entropy_bits(d.puv.sum(axis=1))
    h_v = entropy_bits(d.puv.sum(axis=0))
    r1 = h["xv"] + h["uv"] - h_xuv - h_v  # I(X;U|V)
    r2 = h["yu"] + h["uv"] - h_yuv - h_u  # I(Y;V|U)
    rsum = h["xy"] + h["uv"] - h_xyuv  # I(XY;UV)
    return max(0.0, r1), max(0.0, r2), max(0.0, rsum)


# ---------------------------------------------------------------------------
# lossy two-help-one (structured layer active, Q/U1/V1 trivial)


def thu_gaussian_oracle(rho: float, c: float, q1: float, q2: float) -> tuple[float, float, float]:
    """(R1, R2, Rsum) for U = X + N(0,q1), V = -cY + N(0,q2), S = U + V.

    The second helper carries the negated scaled source so that the sum
    codeword U + V tracks Z = X - cY plus the two quantization noises.
    """
    cov_base = np.asarray(
        [
            [1.0, rho, 1.0, -c * rho],
            [rho, 1.0, rho, -c],
            [1.0, rho, 1.0 + q1, -c * rho],
            [-c * rho, -c, -c * rho, c * c + q2],
        ]
    )
    lam = np.vstack([np.eye(4), [0.0, 0.0, 1.0, 1.0]])
    cov = lam @ cov_base @ lam.T
    spec = GaussianSpec((0,) * 5, cov, ("X", "Y", "U", "V", "S"))
    i_sv = gaussian_mi(spec, "S", "V")
    i_su = gaussian_mi(spec, "S", "U")
    i_uv = gaussian_mi(spec, "U", "V")
    r1 = gaussian_mi(spec, "X", "U") + i_sv - i_uv
    r2 = gaussian_mi(spec, "Y", "V") + i_su - i_uv
    rsum = gaussian_mi(spec, ("X", "Y"), ("U", "V")) + i_sv + i_su - i_uv
    return r1, r2, rsum


def thu_discretized(
    rho: float, c: float, q1: float, q2: float, n: int = 7, window: float = 6.0
) -> tuple[float, float, float]:
    d = _chain(rho, math.sqrt(q1), math.sqrt(q2), n, window, gain_v=-c)
    i_su = d.mi("su")
    i_sv = d.mi("sv")
    i_uv = d.mi("uv")
    r1 = d.mi("xu") + i_sv - i_uv
    r2 = d.mi("yv") + i_su - i_uv
    h = {
        "x": entropy_bits(d.px),
        "y": entropy_bits(d.py),
        "xy": entropy_bits(d.pxy),
        "xu": entropy_bits(d.pxu),
        "yv": entropy_bits(d.pyv),
        "uv": entropy_bits(d.puv),
    }
    h_xyuv = h["xy"] + (h["xu"] - h["x"]) + (h["yv"] - h["y"])
    i_xy_uv = h["xy"] + h["uv"] - h_xyuv
    rsum = i_xy_uv + i_sv + i_su - i_uv
    return max(0.0, r1), max(0.0, r2), max(0.0, rsum)


# ---------------------------------------------------------------------------
# computation over the Gaussian MAC


def mac_discretized(
    p1: float, p2: float, n0: float, n: int = 7, windows: tuple[float, float] | None = None
) -> tuple[float, float, float]:
    """(R1, R2, Rsum) of the sum-decoding region for grid-valued inputs.

    Inputs are the quantized Gaussians; the channel adds continuous noise
    and the output is binned on the same dyadic grid.
    """
    g = GridSpec(n)
    s1, s2 = math.sqrt(p1), math.sqrt(p2)
    w1 = windows[0] if windows else math.ceil(6.0 * s1)
    w2 = windows[1] if windows else math.ceil(6.0 * s2)
    c1 = ClipSpec(w1, w1, "redraw")
    c2 = ClipSpec(w2, w2, "redraw")
    px1 = discretize_1d(Gaussian(0.0, s1), c1, g, "x1").probs
    px2 = discretize_1d(Gaussian(0.0, s2), c2, g, "x2").probs
    n1, n2 = px1.size, px2.size
    # joint over (X1, X2) is an outer product; the sum lives on the shared grid
    outer = np.outer(px1, px2)
    sidx = np.add.outer(np.arange(n1), np.arange(n2))
    ns = n1 + n2 - 1
    psum = np.bincount(sidx.ravel(), weights=outer.ravel(), minlength=ns)

    k1min = -int(round(w1 * 2.0**n))
    k2min = -int(round(w2 * 2.0**n))
    s_vals = (np.arange(ns) + k1min + k2min) * g.step

    sy = math.sqrt(p1 + p2 + n0)
    wy = math.ceil(6.0 * sy)
    cy = ClipSpec(wy, wy, "saturate")
    y_edges = cell_edges(cy, g)
    y_eval = np.clip(y_edges, -1e300, 1e300)
    cdf = ndtr((y_eval[None, :] - s_vals[:, None]) / math.sqrt(n0))
    cdf[:, np.isneginf(y_edges)] = 0.0
    cdf[:, np.isposinf(y_edges)] = 1.0
    by = np.diff(cdf, axis=1)  # P(Yhat | S = s)

    psy = psum[:, None] * by
    i_sy = mi_of_joint(psy)
    # I(S; X2): reindex the outer product onto (sum, x2)
    ps_x2 = np.zeros((ns, n2))
    cols = np.repeat(np.arange(n2)[None, :], n1, axis=0)
    np.add.at(ps_x2, (sidx.ravel(), cols.ravel()), outer.ravel())
    i_sx2 = mi_of_joint(ps_x2)
    ps_x1 = np.zeros((ns, n1))
    rows = np.repeat(np.arange(n1)[:, None], n2, axis=1)
    np.add.at(ps_x1, (sidx.ravel(), rows.ravel()), outer.ravel())
    i_sx1 = mi_of_joint(ps_x1)

    r1 = i_sy - i_sx2
    r2 = i_sy - i_sx1
    rsum = 2.0 * i_sy - i_sx1 - i_sx2
    return max(0.0, r1), max(0.0, r2), max(0.0, rsum)


def mac_gaussian_oracle(p1: float, p2: float, n0: float) -> tuple[float, float, float]:
    s = p1 + p2
    r1 = 0.5 * math.log2(p1 * (s + n0) / (s * n0))
    r2 = 0.5 * math.log2(p2 * (s + n0) / (s * n0))
    return r1, r2, r1 + r2


# ---------------------------------------------------------------------------
# multiple descriptions, example 1: discretized info source


def _conv_joint(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """P(W, Vin) from independent Vin (weights b) and Vout (weights c)."""
    nb, nc = b.size, c.size
    out = np.zeros((nb + nc - 1, nb))
    widx = np.add.outer(np.arange(nb), np.arange(nc))
    vidx = np.repeat(np.arange(nb)[:, None], nc, axis=1)
    np.add.at(out, (widx.ravel(), vidx.ravel()), np.outer(b, c).ravel())
    return out


class MdEx1Source:
    """MI provider for the independent-pair model (X, Z) with additive
    Gaussian codebook channels V_in = X + N, V_out = Z + N', W = V_in+V_out.

    Axes: 'X', 'Z' (source block), 'Vin', 'Vout', 'W'.  Exploits exact
    product structure: anything not involving W splits across the two
    independent (X, Vin) and (Z, Vout) blocks.
    """

    def __init__(self, p: float, n: int = 4, window: float = 6.0, aux_scale: float = 1.5):
        if not 0.0 < p < 1.0:
            raise ValueError("need 0 < p < 1")
        self.p = p
        q = p / (1.0 - p)  # noise variance meeting MSE p with the MMSE estimator
        g = GridSpec(n)
        src_clip = ClipSpec(window, window, "redraw")
        aux_clip = ClipSpec(window * aux_scale, window * aux_scale, "redraw")
        marg = Gaussian(0.0, 1.0)
        self.px = discretize_1d(marg, src_clip, g, "x").probs
        self.pz = discretize_1d(marg, src_clip, g, "z").probs
        ch = AdditiveGaussian(math.sqrt(q))
        _, self.b = channel_matrix(ch, marg, src_clip, g, aux_clip, g, None)
        _, self.c = channel_matrix(ch, marg, src_clip, g, aux_clip, g, None)
        self.pvin = self.b @ self.px
        self.pvout = self.c @ self.pz

    # -- elementary quantities ---------------------------------------------

    def _i_vin_x(self) -> float:
        return mi_of_joint((self.b * self.px[None, :]).T)

    def _i_vout_z(self) -> float:
        return mi_of_joint((self.c * self.pz[None, :]).T)

    def _i_w_vin(self) -> float:
        return mi_of_joint(_conv_joint(self.pvin, self.pvout))

    def _h_w(self) -> float:
        return entropy_bits(np.convolve(self.pvin, self.pvout))

    def _i_w_source(self) -> float:
        """I(W; X, Z) = H(W) - E_{x,z} H(conv(B[:,x], C[:,z])) via batch FFT."""
        nb, nx = self.b.shape
        nc, nz = self.c.shape
        nsum = nb + nc - 1
        nfft = 1 << (nsum - 1).bit_length()
        fb = np.fft.rfft(self.b, n=nfft, axis=0)
        fc = np.fft.rfft(self.c, n=nfft, axis=0)
        h_cond = 0.0
        from scipy.special import xlogy

        for i in range(nx):
            conv = np.fft.irfft(fb[:, i][:, None] * fc, n=nfft, axis=0)[:nsum, :]
            conv = np.clip(conv, 0.0, None)
            h_cols = -xlogy(conv, conv).sum(axis=0) / math.log(2.0)
            h_cond += self.px[i] * float(h_cols @ self.pz)
        return self._h_w() - h_cond

    # -- protocol -------------------------------------------------------------

    def mi(self, a, b) -> float:
        a, b = frozenset(a), frozenset(b)
        if not a or not b:
            return 0.0
        src = frozenset(("X", "Z"))
        if b == src:
            a, b = b, a
        if a == src:
            parts = 0.0
            if "Vin" in b:
                parts += self._i_vin_x()
            if "Vout" in b:
                parts += self._i_vout_z()
            if "W" in b:
                if b != {"W"}:
                    raise NotImplementedError(f"unsupported group {b}")
                return self._i_w_source()
            return parts
        pair = {a | b}
        if a | b == {"Vin", "Vout"}:
            return 0.0  # independent blocks
        if a | b == {"W", "Vin"} or a | b == {"W", "Vout"}:
            return self._i_w_vin() if "Vin" in (a | b) else self._i_w_vout()
        raise NotImplementedError(f"unsupported MI query {a} vs {b}")

    def _i_w_vout(self) -> float:
        return mi_of_joint(_conv_joint(self.pvout, self.pvin))

    def cmi(self, a, b, c) -> float:
        if not tuple(c):
            return self.mi(a, b)
        raise NotImplementedError("conditioning not needed for this configuration")


# ---------------------------------------------------------------------------
# multiple descriptions, example 2: dense trivariate source


def gaussian_chain3_dense(
    spec: GaussianSpec,
    clips: tuple[ClipSpec, ClipSpec, ClipSpec],
    grids: tuple[GridSpec, GridSpec, GridSpec],
    names: tuple[str, str, str],
    tol: float = 1e-9,
):
    """Dense cell masses of a trivariate Gaussian via the chain rule
    f(x0) f(x1|x0) f(x2|x0,x1), Gauss nodes in x0/x1 and exact CDF in x2.

    Redraw clipping per axis is applied marginally (window masses are
    renormalized), adequate for the 6-sigma windows used here.
    """
    cov = spec.matrix()
    mu = np.asarray(spec.mean)
    axes = []
    pts_all, edges_all = [], []
    for k in range(3):
        axes.append(Axis(names[k], tuple(alphabet(clips[k], grids[k]))))
        pts_all.append(alphabet(clips[k], grids[k]))
        edges_all.append(cell_edges(clips[k], grids[k]))

    # conditional regressions from the covariance
    s00 = cov[0, 0]
    b10 = cov[1, 0] / s00
    s1 = math.sqrt(cov[1, 1] - cov[1, 0] ** 2 / s00)
    sol = np.linalg.solve(cov[:2, :2], cov[:2, 2])
    s2 = math.sqrt(cov[2, 2] - cov[:2, 2] @ sol)

    def window_panels(edges, c: ClipSpec):
        lo = np.clip(edges[:-1], -c.lower, c.upper)
        hi = np.clip(edges[1:], -c.lower, c.upper)
        return lo, hi

    # Gauss-Legendre nodes per cell for x0 and x1 (order 6 is ample for the
    # narrow cells used at the tolerances involved)
    from contnet.quadrature import gauss_legendre_nodes

    lo0, hi0 = window_panels(edges_all[0], clips[0])
    nodes0, w0 = gauss_legendre_nodes(lo0, hi0, order=6)
    lo1, hi1 = window_panels(edges_all[1], clips[1])
    nodes1, w1 = gauss_legendre_nodes(lo1, hi1, order=6)

    f0 = np.exp(-0.5 * ((nodes0 - mu[0]) ** 2) / s00) / math.sqrt(2 * math.pi * s00)
    n0c, n1c = len(pts_all[0]), len(pts_all[1])
    n2c = len(pts_all[2])
    e2 = np.clip(edges_all[2], -clips[2].lower, clips[2].upper)

    out = np.zeros((n0c, n1c, n2c))
    for i in range(n0c):
        x0 = nodes0[i]  # (6,)
        wf0 = w0[i] * f0[i]
        m1 = mu[1] + b10 * (x0 - mu[0])
        # density of x1 nodes given each x0 node: (6, n1c, 6)
        z1 = (nodes1[None, :, :] - m1[:, None, None]) / s1
        f1 = np.exp(-0.5 * z1 * z1) / (s1 * math.sqrt(2 * math.pi))
        m2 = (
            mu[2]
            + sol[0] * (x0[:, None, None] - mu[0])
            + sol[1] * (nodes1[None, :, :] - mu[1])
        )
        cdf2 = ndtr((e2[None, None, None, :] - m2[..., None]) / s2)
        masses2 = np.diff(cdf2, axis=-1)
        contrib = (wf0[:, None, None, None] * w1[None, :, :, None] * f1[..., None] * masses2)
        out[i] = contrib.sum(axis=(0, 2))
    total = out.sum()
    if not total > 0:
        raise GridMismatchError("trivariate masses vanished")
    return axes, out / total


class MdEx2Source:
    """MI provider for the correlated (X, U, V) model with W = U + V.

    Holds the dense trivariate tensor; sum-involving joints are produced by
    integer reindexing on the shared grid.
    """

    def __init__(self, p: float, n: int = 4, src_window: float = 6.0, aux_window: float = 4.0):
        from contnet.gaussian import md_ex2_cov

        if not 0.5 < p < 2.0 / 3.0:
            raise ValueError("need 1/2 < P < 2/3")
        self.p = p
        spec = md_ex2_cov(p)
        g = GridSpec(n)
        clips = (
            ClipSpec(src_window, src_window, "redraw"),
            ClipSpec(aux_window, aux_window, "redraw"),
            ClipSpec(aux_window, aux_window, "redraw"),
        )
        axes, t = gaussian_chain3_dense(spec, clips, (g, g, g), ("X", "U", "V"))
        self.tensor = t  # (x, u, v)
        self.nx, self.nu, self.nv = t.shape

    def _pair(self, a: str, b: str) -> np.ndarray:
        axes = {"X": 0, "U": 1, "V": 2}
        keep = (axes[a], axes[b])
        drop = tuple(i for i in range(3) if i not in keep)
        m = self.tensor.sum(axis=drop)
        if keep[0] > keep[1]:
            m = m.T
        return m

    def _sum_joint_with(self, other: str) -> np.ndarray:
        """P(W, other) by reindexing; other in {'X', 'U', 'V'}."""
        ns = self.nu + self.nv - 1
        widx = np.add.outer(np.arange(self.nu), np.arange(self.nv))
        if other == "X":
            out = np.zeros((ns, self.nx))
            for i in range(self.nx):
                np.add.at(out[:, i], widx.ravel(), self.tensor[i].ravel())
            return out
        puv = self.tensor.sum(axis=0)
        if other == "U":
            out = np.zeros((ns, self.nu))
            uidx = np.repeat(np.arange(self.nu)[:, None], self.nv, axis=1)
            np.add.at(out, (widx.ravel(), uidx.ravel()), puv.ravel())
            return out
        out = np.zeros((ns, self.nv))
        vidx = np.repeat(np.arange(self.nv)[None, :], self.nu, axis=0)
        np.add.at(out, (widx.ravel(), vidx.ravel()), puv.ravel())
        return out

    def mi(self, a, b) -> float:
        a, b = frozenset(a), frozenset(b)
        if not a or not b:
            return 0.0
        if a == {"X"}:
            a, b = b, a
        if b == {"X"}:
            if a == {"U"}:
                return mi_of_joint(self._pair("U", "X"))
            if a == {"V"}:
                return mi_of_joint(self._pair("V", "X"))
            if a == {"U", "V"}:
                # I(UV; X) = H(UV) + H(X) - H(XUV)
                h_uv = entropy_bits(self.tensor.sum(axis=0))
                h_x = entropy_bits(self.tensor.sum(axis=(1, 2)))
                return max(0.0, h_uv + h_x - entropy_bits(self.tensor))
            if a == {"W"}:
                return mi_of_joint(self._sum_joint_with("X"))
        if a | b == {"U", "V"}:
            return mi_of_joint(self._pair("U", "V"))
        if a | b == {"W", "U"}:
            return mi_of_joint(self._sum_joint_with("U"))
        if a | b == {"W", "V"}:
            return mi_of_joint(self._sum_joint_with("V"))
        raise NotImplementedError(f"unsupported MI query {a} vs {b}")

    def cmi(self, a, b, c) -> float:
        if not tuple(c):
            return self.mi(a, b)
        raise NotImplementedError("conditioning not needed for this configuration")
