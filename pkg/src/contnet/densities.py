"""Declared parametric density families and forward channels.

Only the families below (plus tabulated data) are accepted as inputs to the
discretization pipeline; arbitrary user code is out of scope.  Every density
carries an effective support interval outside of which its mass is treated
as zero; for unbounded families the cutoff is 12 standard deviations and the
truncated tail mass is available from ``tail_truncation()``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr

SUPPORT_SIGMAS = 12.0

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _phi(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(z))


def _int_ndtr(z):
    """Antiderivative of the standard normal CDF: z·Phi(z) + phi(z)."""
    return z * ndtr(z) + _phi(z)


class Density1D:
    """Interface: vectorized pdf, optional exact cdf, effective support."""

    support: tuple[float, float]

    def pdf(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def cdf(self, x):
        return None

    @property
    def has_cdf(self) -> bool:
        return self.cdf(0.0) is not None

    def tail_truncation(self) -> float:
        """Mass outside the declared support (0 for exactly bounded families)."""
        return 0.0


@dataclass(frozen=True)
class Gaussian(Density1D):
    mean: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def support(self):
        r = SUPPORT_SIGMAS * self.sigma
        return (self.mean - r, self.mean + r)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sigma
        return _phi(z) / self.sigma

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=float) - self.mean) / self.sigma)

    def cdf_integral(self, x):
        """Antiderivative of cdf (used for exact uniform smoothing)."""
        z = (np.asarray(x, dtype=float) - self.mean) / self.sigma
        return self.sigma * _int_ndtr(z)

    def tail_truncation(self) -> float:
        return float(2.0 * ndtr(-SUPPORT_SIGMAS))


@dataclass(frozen=True)
class Uniform(Density1D):
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")

    @property
    def support(self):
        return (self.a, self.b)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)

    def cdf_integral(self, x):
        x = np.asarray(x, dtype=float)
        w = self.b - self.a
        below = np.zeros_like(x)
        inside = 0.5 * np.square(np.clip(x, self.a, self.b) - self.a) / w
        above = np.clip(x - self.b, 0.0, None)
        return below + inside + above


@dataclass(frozen=True)
class Triangular(Density1D):
    """Symmetric triangle on [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def _mid(self):
        return 0.5 * (self.a + self.b)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        h = 0.5 * (self.b - self.a)
        out = (1.0 - np.abs(x - self._mid) / h) / h
        return np.where((x >= self.a) & (x <= self.b), np.maximum(out, 0.0), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        h = 0.5 * (self.b - self.a)
        left = 0.5 * np.square(np.clip(x - self.a, 0, h) / h)
        right = 1.0 - 0.5 * np.square(np.clip(self.b - x, 0, h) / h)
        return np.where(x < self._mid, left, right)


@dataclass(frozen=True)
class Mixture(Density1D):
    weights: tuple[float, ...]
    components: tuple[Density1D, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.components) or len(w) == 0:
            raise ValueError("weights/components length mismatch")
        if w.min() < 0 or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be a pmf")

    @property
    def support(self):
        los, his = zip(*(c.support for c in self.components))
        return (min(los), max(his))

    def pdf(self, x):
        return sum(w * c.pdf(x) for w, c in zip(self.weights, self.components))

    def cdf(self, x):
        parts = [c.cdf(x) for c in self.components]
        if any(p is None for p in parts):
            return None
        return sum(w * p for w, p in zip(self.weights, parts))

    def tail_truncation(self) -> float:
        return float(sum(w * c.tail_truncation() for w, c in zip(self.weights, self.components)))


@dataclass(frozen=True)
class Tabulated(Density1D):
    """Piecewise-linear density through (xs, fs); renormalized at build."""

    xs: tuple[float, ...]
    fs: tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        fs = np.asarray(self.fs, dtype=float)
        if len(xs) < 2 or np.any(np.diff(xs) <= 0) or fs.min() < 0:
            raise ValueError("need increasing xs and nonnegative fs")
        z = np.trapz(fs, xs)
        if not z > 0:
            raise ValueError("tabulated density has zero mass")
        object.__setattr__(self, "xs", tuple(xs))
        object.__setattr__(self, "fs", tuple(fs / z))

    @property
    def support(self):
        return (self.xs[0], self.xs[-1])

    def pdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.fs, left=0.0, right=0.0)

    def cdf(self, x):
        xs = np.asarray(self.xs)
        fs = np.asarray(self.fs)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (fs[1:] + fs[:-1]) * np.diff(xs))))
        x = np.asarray(x, dtype=float)
        # integrate the linear interpolant exactly within the straddled panel
        i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
        x0, x1 = xs[i], xs[i + 1]
        f0, f1 = fs[i], fs[i + 1]
        t = np.clip((x - x0) / (x1 - x0), 0.0, 1.0)
        seg = (f0 * t + 0.5 * (f1 - f0) * t * t) * (x1 - x0)
        return np.clip(cum[i] + np.where(x < xs[0], 0.0, seg), 0.0, 1.0) + np.where(
            x >= xs[-1], 1.0 - np.clip(cum[i] + seg, 0.0, 1.0), 0.0
        )


@dataclass(frozen=True)
class Truncated(Density1D):
    """base restricted to [lo, hi] and renormalized (the redraw law)."""

    base: Density1D
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("need hi > lo")
        z = _prob_interval(self.base, self.lo, self.hi)
        if not z > 0:
            raise ValueError("truncation window carries no mass")
        object.__setattr__(self, "_z", z)

    @property
    def support(self):
        lo, hi = self.base.support
        return (max(lo, self.lo), min(hi, self.hi))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, self.base.pdf(x) / self._z, 0.0)

    def cdf(self, x):
        base_cdf = self.base.cdf(np.clip(np.asarray(x, dtype=float), self.lo, self.hi))
        if base_cdf is None:
            return None
        lo_cdf = self.base.cdf(self.lo)
        return np.clip((base_cdf - lo_cdf) / self._z, 0.0, 1.0)


def _prob_interval(d: Density1D, lo: float, hi: float) -> float:
    c = d.cdf(np.asarray([lo, hi]))
    if c is not None:
        return float(c[1] - c[0])
    from contnet.quadrature import integrate_interval

    slo, shi = d.support
    return integrate_interval(d.pdf, max(lo, slo), min(hi, shi))


@dataclass(frozen=True)
class Smoothed(Density1D):
    """base convolved with uniform[-eps, eps] noise (applied analytically)."""

    base: Density1D
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    @property
    def support(self):
        lo, hi = self.base.support
        return (lo - self.eps, hi + self.eps)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        hi = self.base.cdf(x + self.eps)
        if hi is not None:
            lo = self.base.cdf(x - self.eps)
            return (hi - lo) / (2.0 * self.eps)
        from contnet.quadrature import integrate_panels

        return integrate_panels(self.base.pdf, x - self.eps, x + self.eps) / (2.0 * self.eps)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if isinstance(self.base, (Gaussian, Uniform)):
            upper = self.base.cdf_integral(x + self.eps)
            lower = self.base.cdf_integral(x - self.eps)
            return np.clip((upper - lower) / (2.0 * self.eps), 0.0, 1.0)
        base_cdf = self.base.cdf(x)
        if base_cdf is None:
            return None
        # integrate the cdf over [x-eps, x+eps] with a fixed Gauss rule;
        # the integrand is monotone and C0, nodes=16 is ample for cell work
        nodes, weights = np.polynomial.legendre.leggauss(16)
        t = x[..., None] + self.eps * nodes
        w = self.eps * weights
        return np.clip((self.base.cdf(t) * w).sum(axis=-1) / (2.0 * self.eps), 0.0, 1.0)


def clipped_redraw(base: Density1D, lower: float, upper: float) -> Truncated:
    """Redraw-mode clipping of a marginal law onto [-lower, upper]."""
    return Truncated(base, -lower, upper)


# ---------------------------------------------------------------------------
# two-dimensional source densities


class Density2D:
    support: tuple[tuple[float, float], tuple[float, float]]

    def pdf(self, x, y):  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian2D(Density2D):
    mean_x: float = 0.0
    mean_y: float = 0.0
    sigma_x: float = 1.0
    sigma_y: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise ValueError("sigmas must be positive")
        if not abs(self.rho) < 1:
            raise ValueError("|rho| must be < 1 for a density")

    @property
    def support(self):
        rx = SUPPORT_SIGMAS * self.sigma_x
        ry = SUPPORT_SIGMAS * self.sigma_y
        return ((self.mean_x - rx, self.mean_x + rx), (self.mean_y - ry, self.mean_y + ry))

    def pdf(self, x, y):
        zx = (np.asarray(x, dtype=float) - self.mean_x) / self.sigma_x
        zy = (np.asarray(y, dtype=float) - self.mean_y) / self.sigma_y
        r = self.rho
        q = (zx * zx - 2 * r * zx * zy + zy * zy) / (1 - r * r)
        return np.exp(-0.5 * q) / (2 * np.pi * self.sigma_x * self.sigma_y * math.sqrt(1 - r * r))

    def marginal_x(self) -> Gaussian:
        return Gaussian(self.mean_x, self.sigma_x)

    def marginal_y(self) -> Gaussian:
        return Gaussian(self.mean_y, self.sigma_y)

    def conditional_y(self, x):
        """Mean and sigma of Y | X = x (vectorized in x)."""
        x = np.asarray(x, dtype=float)
        mean = self.mean_y + self.rho * self.sigma_y / self.sigma_x * (x - self.mean_x)
        sigma = self.sigma_y * math.sqrt(1.0 - self.rho**2)
        return mean, sigma


@dataclass(frozen=True)
class Product2D(Density2D):
    dx: Density1D
    dy: Density1D

    @property
    def support(self):
        return (self.dx.support, self.dy.support)

    def pdf(self, x, y):
        return self.dx.pdf(x) * self.dy.pdf(y)


# ---------------------------------------------------------------------------
# forward channels f_{U|X}


class Channel:
    """Conditional law of an auxiliary variable given a source value."""

    def cond_density(self, x: float) -> Density1D:  # pragma: no cover - interface
        raise NotImplementedError

    def support_given(self, x_lo: float, x_hi: float) -> tuple[float, float]:
        lo0 = self.cond_density(x_lo).support
        hi0 = self.cond_density(x_hi).support
        return (min(lo0[0], hi0[0]), max(lo0[1], hi0[1]))


@dataclass(frozen=True)
class AdditiveGaussian(Channel):
    """U = gain·X + N(0, sigma^2)."""

    sigma: float
    gain: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def cond_density(self, x: float) -> Gaussian:
        return Gaussian(self.gain * x, self.sigma)

    def cond_cdf(self, u, x):
        """Vectorized CDF of U given X=x (broadcasting u against x)."""
        return ndtr((np.asarray(u, dtype=float) - self.gain * np.asarray(x, dtype=float)) / self.sigma)


@dataclass(frozen=True)
class Constant(Channel):
    """Deterministic channel U = value, regardless of the input."""

    value: float

    def cond_density(self, x: float) -> Density1D:
        raise TypeError("constant channel has no density; handled as an atom")

    def support_given(self, x_lo, x_hi):
        return (self.value, self.value)


@dataclass(frozen=True)
class MarkovModel:
    """Joint source density plus forward channels U|X and V|Y.

    The implied chain is U - X - Y - V: the channels act on their own source
    coordinate only, so the chain holds by construction.
    """

    source: Density2D
    channel_u: Channel
    channel_v: Channel
