"""Clipping windows, dyadic quantization grids and their discretization cells.

The grid at level n is (1/2^n)·Z.  Quantization rounds to the nearest grid
point with ties broken toward +inf; together with a clipping window [-l, u]
this induces a finite alphabet whose cells partition the real line (the two
end cells are unbounded).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from contnet.errors import GridOverflowError

# exactness bound for the scaled-integer index
_MAX_INDEX = 2**53


@dataclass(frozen=True)
class ClipSpec:
    """Clipping window [-lower, upper].

    mode 'saturate' maps out-of-window values to the nearest window edge;
    mode 'redraw' replaces out-of-window mass by the renormalized in-window
    law (no boundary atoms).  There is no default: callers must choose.
    """

    lower: float
    upper: float
    mode: str

    def __post_init__(self):
        if not (self.lower > 0 and self.upper > 0):
            raise ValueError("clip window requires lower > 0 and upper > 0")
        if self.mode not in ("saturate", "redraw"):
            raise ValueError(f"unknown clip mode {self.mode!r}")

    @classmethod
    def symmetric(cls, half_width: float, mode: str) -> "ClipSpec":
        return cls(half_width, half_width, mode)


@dataclass(frozen=True)
class GridSpec:
    """Dyadic grid with cell width 2^-n; ties round toward +inf."""

    n: int

    def __post_init__(self):
        if not (0 <= self.n <= 30):
            raise ValueError("grid level n must be in [0, 30] for exact arithmetic")

    @property
    def step(self) -> float:
        return 2.0 ** (-self.n)

    @property
    def half(self) -> float:
        return 2.0 ** (-(self.n + 1))


@dataclass(frozen=True)
class SmoothSpec:
    """Additive uniform[-eps, eps] smoothing noise."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("smoothing half-width eps must be positive")


def clip(s: float, c: ClipSpec) -> float:
    """Pointwise saturating clip onto [-lower, upper]."""
    if c.mode != "saturate":
        raise ValueError("pointwise clip is defined for saturate mode only; "
                         "redraw acts on distributions")
    return max(min(c.upper, s), -c.lower)


def quantize(s: float, g: GridSpec) -> float:
    """Nearest point of (1/2^n)·Z, half-cells rounding toward +inf."""
    k = math.floor(s * 2.0**g.n + 0.5)
    if abs(k) >= _MAX_INDEX:
        raise GridOverflowError(f"grid index {k} exceeds exact range at n={g.n}")
    return k * g.step


def quantize_index(s, g: GridSpec):
    """Vectorized scaled-integer index of quantize()."""
    k = np.floor(np.asarray(s, dtype=float) * 2.0**g.n + 0.5)
    if np.any(np.abs(k) >= _MAX_INDEX):
        raise GridOverflowError(f"grid index exceeds exact range at n={g.n}")
    return k.astype(np.int64)


def grid_index_range(c: ClipSpec, g: GridSpec) -> tuple[int, int]:
    """Scaled-integer indices [kmin, kmax] of the alphabet [-l, u] ∩ (1/2^n)Z."""
    kmin = math.ceil(-c.lower * 2**g.n)
    kmax = math.floor(c.upper * 2**g.n)
    if kmax < kmin:
        raise ValueError(f"window [{-c.lower}, {c.upper}] holds no grid point at n={g.n}")
    return kmin, kmax


def alphabet(c: ClipSpec, g: GridSpec) -> np.ndarray:
    """Grid-point values of the clipped alphabet, ascending."""
    kmin, kmax = grid_index_range(c, g)
    return np.arange(kmin, kmax + 1, dtype=float) * g.step


def cells(c: ClipSpec, g: GridSpec) -> list[tuple[float, float]]:
    """Half-open cells (lo, hi] partitioning R, one per alphabet point.

    The first cell extends to -inf and the last to +inf; interior cells have
    width 2^-n.  Cell i is the preimage of alphabet point i under
    quantize(clip(.)).
    """
    kmin, kmax = grid_index_range(c, g)
    step, half = g.step, g.half
    edges = [(kmin + i) * step + half for i in range(kmax - kmin)]
    lows = [-math.inf] + edges
    highs = edges + [math.inf]
    return list(zip(lows, highs))


def cell_edges(c: ClipSpec, g: GridSpec) -> np.ndarray:
    """Interior cell boundaries including the +-inf sentinels, length = cells+1."""
    kmin, kmax = grid_index_range(c, g)
    inner = (np.arange(kmin, kmax, dtype=float) * g.step) + g.half
    return np.concatenate(([-np.inf], inner, [np.inf]))
