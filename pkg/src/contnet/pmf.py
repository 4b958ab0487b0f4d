"""Exact arithmetic and information measures over finite joint pmfs.

A :class:`JointPmf` is a dense tensor of probabilities indexed by one real
grid point per named axis.  All measures are in bits (log base 2) with the
convention 0·log 0 = 0.  Total-variation distance uses the L1-sum convention
``sum |p - q|`` with range [0, 2]; the sup-over-events form is exposed as
``tv_sup = l1/2``.

Everything here is a pure function of immutable values, safe to share across
threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import inf, log2
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import xlogy

from contnet.errors import AxisError, GridMismatchError, GroupOverlapError

LOG2 = np.log(2.0)

# Tolerance below which a negative rounding residue of an information
# quantity is clamped to zero.
_MI_CLAMP = 1e-12


@dataclass(frozen=True)
class Axis:
    """A named finite alphabet of strictly increasing real grid points."""

    name: str
    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise AxisError(f"axis '{self.name}' has no points")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise AxisError(f"axis '{self.name}' points must be strictly increasing")

    def __len__(self) -> int:
        return len(self.points)

    def values(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def index_of(self, value: float) -> int:
        """Exact-match lookup (used for grid-exact pushforwards)."""
        try:
            return self._lookup[value]
        except AttributeError:
            object.__setattr__(self, "_lookup", {p: i for i, p in enumerate(self.points)})
            return self.index_of(value)
        except KeyError:
            raise GridMismatchError(
                f"value {value!r} is not a point of axis '{self.name}'"
            ) from None


def _as_group(names) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    return tuple(names)


@dataclass(frozen=True)
class JointPmf:
    """Dense joint pmf over named axes.

    probs must be nonnegative, match the axis cardinalities and sum to 1
    within 1e-12 (use ``normalized=False`` to skip the sum check for
    intermediate unnormalized tensors).
    """

    axes: tuple[Axis, ...]
    probs: np.ndarray = field(repr=False)

    def __init__(self, axes: Sequence[Axis], probs: np.ndarray, *, normalized: bool = True):
        axes = tuple(axes)
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise AxisError(f"duplicate axis names: {names}")
        probs = np.asarray(probs, dtype=float)
        shape = tuple(len(a) for a in axes)
        if probs.shape != shape:
            raise AxisError(f"probs shape {probs.shape} does not match axes {shape}")
        if probs.size and probs.min() < 0:
            if probs.min() < -1e-15:
                raise ValueError(f"negative probability {probs.min()}")
            probs = np.clip(probs, 0.0, None)
        if normalized:
            total = float(probs.sum())
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", probs)

    # -- structure ---------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    def axis(self, name: str) -> Axis:
        for a in self.axes:
            if a.name == name:
                return a
        raise AxisError(f"unknown axis '{name}' (have {self.names})")

    def _indices(self, group) -> tuple[int, ...]:
        group = _as_group(group)
        if not group:
            raise AxisError("empty variable group")
        if len(set(group)) != len(group):
            raise AxisError(f"duplicate names in group {group}")
        pos = {a.name: i for i, a in enumerate(self.axes)}
        try:
            return tuple(pos[g] for g in group)
        except KeyError as e:
            raise AxisError(f"unknown axis {e.args[0]!r} (have {self.names})") from None

    # -- operations --------------------------------------------------------

    def marginal(self, keep) -> "JointPmf":
        keep = _as_group(keep)
        idx = self._indices(keep)
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        summed = self.probs.sum(axis=drop) if drop else self.probs
        # reorder to the requested axis order
        order = tuple(sorted(range(len(idx)), key=lambda k: idx[k]))
        inv = tuple(order.index(k) for k in range(len(idx)))
        summed = np.transpose(summed, inv)
        return JointPmf([self.axes[i] for i in idx], summed, normalized=False)

    def entropy(self, over=None) -> float:
        """Shannon entropy in bits of the marginal over `over` (all axes if None)."""
        q = self.probs if over is None else self.marginal(over).probs
        return max(0.0, float(-xlogy(q, q).sum() / LOG2))

    def mutual_information(self, a, b) -> float:
        a, b = _as_group(a), _as_group(b)
        if set(a) & set(b):
            raise GroupOverlapError(f"groups overlap: {a} vs {b}")
        val = self.entropy(a) + self.entropy(b) - self.entropy(a + b)
        return _clamp_info(val)

    def conditional_mi(self, a, b, c) -> float:
        a, b, c = _as_group(a), _as_group(b), _as_group(c)
        if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
            raise GroupOverlapError(f"groups overlap: {a}, {b}, {c}")
        val = (
            self.entropy(a + c)
            + self.entropy(b + c)
            - self.entropy(a + b + c)
            - self.entropy(c)
        )
        return _clamp_info(val)

    def expectation(self, g: Callable, over=None) -> float:
        """E[g] with g applied to numpy meshgrids of the group's point values."""
        p = self if over is None else self.marginal(over)
        grids = np.meshgrid(*[a.values() for a in p.axes], indexing="ij")
        return float((p.probs * np.asarray(g(*grids), dtype=float)).sum())

    def pushforward(self, inputs, f: Callable, out_axis: Axis) -> "JointPmf":
        """Adjoin a deterministic axis ``out_axis`` computed by f from `inputs`.

        f receives one point value per input axis (as arrays) and must return
        values lying exactly on ``out_axis`` (dyadic grid arithmetic is exact
        in binary floating point, so sums of same-step grid points qualify).
        """
        idx = self._indices(inputs)
        if out_axis.name in self.names:
            raise AxisError(f"axis '{out_axis.name}' already present")
        in_axes = [self.axes[i] for i in idx]
        grids = np.meshgrid(*[a.values() for a in in_axes], indexing="ij")
        try:
            vals = np.asarray(f(*grids), dtype=float)
            if vals.shape != grids[0].shape:
                raise TypeError
        except TypeError:
            vals = np.vectorize(f, otypes=[float])(*grids)
        ref = out_axis.values()
        pos = np.searchsorted(ref, vals)
        pos = np.clip(pos, 0, len(ref) - 1)
        if not np.all(ref[pos] == vals):
            bad = vals[ref[pos] != vals].ravel()[0]
            raise GridMismatchError(
                f"f output {bad!r} is not a point of axis '{out_axis.name}'"
            )
        n = len(self.axes)
        rest = tuple(i for i in range(n) if i not in idx)
        new_size = self.probs.size * len(out_axis)
        if new_size > 200_000_000:
            raise MemoryError(
                f"dense pushforward would allocate {new_size} entries; "
                "use a factored representation for grids this large"
            )
        # move input axes last, scatter along the new output axis, restore order
        perm = rest + idx
        moved = np.transpose(self.probs, perm)
        rest_shape = moved.shape[: len(rest)]
        flat = moved.reshape(rest_shape + (-1,))
        out_flat = pos.ravel(order="C")
        new = np.zeros(rest_shape + (flat.shape[-1], len(out_axis)), dtype=float)
        new[..., np.arange(flat.shape[-1]), out_flat] = flat
        new = new.reshape(rest_shape + tuple(len(a) for a in in_axes) + (len(out_axis),))
        inv = np.argsort(perm + (n,))
        new = np.transpose(new, inv)
        return JointPmf(self.axes + (out_axis,), new, normalized=False)

    # -- serialization -----------------------------------------------------

    def to_document(self) -> dict:
        return {
            "axes": [{"name": a.name, "points": list(a.points)} for a in self.axes],
            "probs": [float(x) for x in self.probs.ravel(order="C")],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document())

    @classmethod
    def from_document(cls, doc: dict) -> "JointPmf":
        axes = [Axis(d["name"], tuple(d["points"])) for d in doc["axes"]]
        shape = tuple(len(a) for a in axes)
        probs = np.asarray(doc["probs"], dtype=float).reshape(shape, order="C")
        return cls(axes, probs)

    @classmethod
    def from_json(cls, text: str) -> "JointPmf":
        return cls.from_document(json.loads(text))


def _clamp_info(val: float) -> float:
    if val < 0.0:
        if val < -_MI_CLAMP * 100:
            # large negative values indicate a bug, not rounding
            raise ArithmeticError(f"information quantity {val} < 0 beyond rounding slack")
        return 0.0
    return float(val)


# -- module-level forms of the operations (primary public surface) ---------


def marginal(p: JointPmf, keep) -> JointPmf:
    return p.marginal(keep)


def entropy(p: JointPmf, over=None) -> float:
    return p.entropy(over)


def mutual_information(p: JointPmf, a, b) -> float:
    return p.mutual_information(a, b)


def conditional_mi(p: JointPmf, a, b, c) -> float:
    return p.conditional_mi(a, b, c)


def expectation(p: JointPmf, g: Callable, over=None) -> float:
    return p.expectation(g, over)


def pushforward(p: JointPmf, inputs, f: Callable, out_axis: Axis) -> JointPmf:
    return p.pushforward(inputs, f, out_axis)


def _check_same_axes(p: JointPmf, q: JointPmf) -> None:
    if p.names != q.names or any(a.points != b.points for a, b in zip(p.axes, q.axes)):
        raise AxisError("pmfs are defined on different axes")


def kl_divergence(p: JointPmf, q: JointPmf) -> float:
    """D(p || q) in bits; +inf when q(x)=0 < p(x) (absolute-continuity violation)."""
    _check_same_axes(p, q)
    pp, qq = p.probs.ravel(), q.probs.ravel()
    if np.any((qq == 0) & (pp > 0)):
        return inf
    mask = pp > 0
    return max(0.0, float(np.sum(pp[mask] * np.log2(pp[mask] / qq[mask]))))


def l1_distance(p: JointPmf, q: JointPmf) -> float:
    """Total variation in the L1-sum convention, range [0, 2]."""
    _check_same_axes(p, q)
    return float(np.abs(p.probs - q.probs).sum())


def tv_sup(p: JointPmf, q: JointPmf) -> float:
    """sup_A |P(A) - Q(A)| = l1_distance / 2 on finite alphabets."""
    return 0.5 * l1_distance(p, q)


def product_pmf(*parts: JointPmf) -> JointPmf:
    """Independent product of pmfs on disjoint axis sets."""
    axes: list[Axis] = []
    probs = np.asarray(1.0)
    for part in parts:
        axes.extend(part.axes)
        probs = np.multiply.outer(probs, part.probs)
    return JointPmf(axes, probs.reshape(tuple(len(a) for a in axes)), normalized=False)


def scalar_pmf(name: str, points, weights) -> JointPmf:
    """Single-axis pmf convenience constructor."""
    w = np.asarray(weights, dtype=float)
    return JointPmf([Axis(name, tuple(points))], w / w.sum())


def sum_axis(a: Axis, b: Axis, name: str) -> Axis:
    """Axis holding every attainable sum of points of `a` and `b`.

    Intended for same-step dyadic grids where float addition is exact.
    """
    vals = sorted({x + y for x in a.points for y in b.points})
    return Axis(name, tuple(vals))
