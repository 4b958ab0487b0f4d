"""Linear inequality systems over named rate variables.

A :class:`HalfspaceSystem` stores rows ``coeffs . x  (<=|>=)  bound``.
Fourier-Motzkin elimination gives exact projections; feasibility and
one-dimensional optimization (min/max of a variable or of the sum of all
rates) are built on repeated elimination.  Row counts in this package stay
small, so correctness and determinism are preferred over sophistication:
rows are normalized to unit max-coefficient and syntactic duplicates are
merged, but deeper redundancy is kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from contnet.errors import InfeasibleError, UnboundedError

_COEF_EPS = 1e-11
_DUP_DIGITS = 12


@dataclass(frozen=True)
class HalfspaceSystem:
    """rows of (coefficients, sense, bound) over an ordered variable list."""

    variables: tuple[str, ...]
    rows: tuple[tuple[tuple[float, ...], str, float], ...]

    def __init__(self, variables: Sequence[str], rows: Iterable = ()):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variables: {variables}")
        norm_rows = []
        for coeffs, sense, bound in rows:
            coeffs = tuple(float(c) for c in coeffs)
            if len(coeffs) != len(variables):
                raise ValueError("coefficient count does not match variables")
            if sense not in ("<=", ">="):
                raise ValueError(f"unknown sense {sense!r}")
            bound = float(bound)
            if not np.isfinite(bound):
                raise ValueError("row bounds must be finite")
            norm_rows.append((coeffs, sense, bound))
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "rows", tuple(norm_rows))

    @classmethod
    def from_le(cls, variables: Sequence[str], a, b) -> "HalfspaceSystem":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        return cls(variables, [(tuple(row), "<=", float(bb)) for row, bb in zip(a, b)])

    def with_rows(self, extra: Iterable) -> "HalfspaceSystem":
        return HalfspaceSystem(self.variables, list(self.rows) + list(extra))

    def le_row(self, mapping: Mapping[str, float], bound: float) -> tuple:
        coeffs = [0.0] * len(self.variables)
        for name, c in mapping.items():
            coeffs[self.variables.index(name)] = float(c)
        return (tuple(coeffs), "<=", float(bound))

    def ge_row(self, mapping: Mapping[str, float], bound: float) -> tuple:
        coeffs, _, b = self.le_row(mapping, bound)
        return (coeffs, ">=", b)

    def le_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, b) with every row brought to the form A x <= b."""
        if not self.rows:
            return np.zeros((0, len(self.variables))), np.zeros(0)
        a_rows, b_rows = [], []
        for coeffs, sense, bound in self.rows:
            if sense == "<=":
                a_rows.append(coeffs)
                b_rows.append(bound)
            else:
                a_rows.append(tuple(-c for c in coeffs))
                b_rows.append(-bound)
        return np.asarray(a_rows, dtype=float), np.asarray(b_rows, dtype=float)

    def contains(self, point: Sequence[float], slack: float = 1e-9) -> bool:
        point = np.asarray(point, dtype=float)
        if point.shape != (len(self.variables),):
            raise ValueError(
                f"point dimension {point.shape} does not match {len(self.variables)} variables"
            )
        a, b = self.le_matrix()
        if a.shape[0] == 0:
            return True
        return bool(np.all(a @ point <= b + slack))

    def pretty(self) -> str:
        lines = []
        for coeffs, sense, bound in self.rows:
            terms = [
                f"{c:+g}·{v}" for c, v in zip(coeffs, self.variables) if abs(c) > _COEF_EPS
            ]
            lhs = " ".join(terms) if terms else "0"
            lines.append(f"{lhs} {sense} {bound:.12g}")
        return "\n".join(lines)


def _clean_le(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalize to unit max-coefficient, drop trivially-true rows, merge
    duplicate rows keeping the tightest bound; constant infeasible rows
    (0 <= negative) survive as infeasibility markers."""
    if a.shape[0] == 0:
        return a, b
    out_a: list[np.ndarray] = []
    out_b: list[float] = []
    index: dict[tuple, int] = {}
    for i in range(a.shape[0]):
        row = a[i]
        scale = float(np.abs(row).max()) if row.size else 0.0
        if scale <= _COEF_EPS:
            if b[i] < -1e-9:
                out_a.append(np.zeros_like(row))
                out_b.append(float(b[i]))
            continue
        row = row / scale
        bound = float(b[i]) / scale
        key = tuple(np.round(row, _DUP_DIGITS))
        if key in index:
            j = index[key]
            out_b[j] = min(out_b[j], bound)
        else:
            index[key] = len(out_a)
            out_a.append(row)
            out_b.append(bound)
    if not out_a:
        return np.zeros((0, a.shape[1])), np.zeros(0)
    return np.vstack(out_a), np.asarray(out_b)


def fm_eliminate(h: HalfspaceSystem, var: str) -> HalfspaceSystem:
    """Exact projection of the solution set onto the remaining variables."""
    if var not in h.variables:
        raise ValueError(f"unknown variable {var!r}")
    col = h.variables.index(var)
    a, b = h.le_matrix()
    a, b = _clean_le(a, b)
    keep_vars = tuple(v for v in h.variables if v != var)
    if a.shape[0] == 0:
        return HalfspaceSystem(keep_vars, [])
    c = a[:, col]
    rest = np.delete(a, col, axis=1)
    zero = np.abs(c) <= _COEF_EPS
    pos = c > _COEF_EPS
    neg = c < -_COEF_EPS
    rows_a = [rest[zero]]
    rows_b = [b[zero]]
    if pos.any() and neg.any():
        ap, bp, cp = rest[pos], b[pos], c[pos]
        an, bn, cn = rest[neg], b[neg], c[neg]
        # positive-multiplier combination cancels the eliminated column
        comb_a = (-cn)[:, None, None] * ap[None, :, :] + cp[None, :, None] * an[:, None, :]
        comb_b = (-cn)[:, None] * bp[None, :] + cp[None, :] * bn[:, None]
        rows_a.append(comb_a.reshape(len(cn) * len(cp), rest.shape[1]))
        rows_b.append(comb_b.reshape(len(cn) * len(cp)))
    new_a = (
        np.vstack([r for r in rows_a if r.shape[0]])
        if any(r.shape[0] for r in rows_a)
        else np.zeros((0, rest.shape[1]))
    )
    new_b = (
        np.concatenate([r for r in rows_b if r.shape[0]])
        if any(r.shape[0] for r in rows_b)
        else np.zeros(0)
    )
    new_a, new_b = _clean_le(new_a, new_b)
    return HalfspaceSystem.from_le(keep_vars, new_a, new_b)


def fix_variables(h: HalfspaceSystem, values: Mapping[str, float]) -> HalfspaceSystem:
    """Substitute fixed values, returning a system over the free variables."""
    unknown = set(values) - set(h.variables)
    if unknown:
        raise ValueError(f"unknown variables {sorted(unknown)}")
    keep = [v for v in h.variables if v not in values]
    keep_idx = [h.variables.index(v) for v in keep]
    fixed_idx = [h.variables.index(v) for v in values]
    fixed_vals = np.asarray([values[h.variables[i]] for i in fixed_idx], dtype=float)
    a, b = h.le_matrix()
    if a.shape[0] == 0:
        return HalfspaceSystem(keep, [])
    shift = a[:, fixed_idx] @ fixed_vals
    return HalfspaceSystem.from_le(keep, a[:, keep_idx], b - shift)


def project_onto(h: HalfspaceSystem, keep: Sequence[str]) -> HalfspaceSystem:
    """Eliminate every variable not in `keep` (greedy order)."""
    targets = [v for v in h.variables if v not in set(keep)]
    sys_now = h
    while targets:
        a, _ = sys_now.le_matrix()
        best, best_cost = None, None
        for v in targets:
            col = sys_now.variables.index(v)
            c = a[:, col] if a.size else np.zeros(0)
            p = int((c > _COEF_EPS).sum())
            q = int((c < -_COEF_EPS).sum())
            cost = p * q - (p + q)
            if best_cost is None or cost < best_cost:
                best, best_cost = v, cost
        sys_now = fm_eliminate(sys_now, best)
        targets.remove(best)
    # restore the requested variable order
    perm = [sys_now.variables.index(v) for v in keep if v in sys_now.variables]
    a, b = sys_now.le_matrix()
    if a.size:
        a = a[:, perm]
    else:
        a = np.zeros((0, len(perm)))
    return HalfspaceSystem.from_le([sys_now.variables[i] for i in perm], a, b)


def is_feasible(h: HalfspaceSystem, nonneg: bool = False) -> bool:
    """Whether the system admits a solution (optionally within the positive orthant)."""
    sys_now = _with_nonneg(h) if nonneg else h
    for v in list(sys_now.variables):
        sys_now = fm_eliminate(sys_now, v)
        a, b = sys_now.le_matrix()
        if a.shape[0] and a.shape[1] and np.any(
            (np.abs(a).max(axis=1) <= _COEF_EPS) & (b < -1e-9)
        ):
            return False
    a, b = sys_now.le_matrix()
    return not (a.shape[0] and np.any(b < -1e-9))


def _with_nonneg(h: HalfspaceSystem) -> HalfspaceSystem:
    eye = np.eye(len(h.variables))
    extra = [((tuple(-eye[i]), "<=", 0.0)) for i in range(len(h.variables))]
    return h.with_rows(extra)


def _var_bounds(h: HalfspaceSystem, var: str) -> tuple[float, float]:
    """(lower, upper) bounds of `var` over the solution set, +-inf if free."""
    sys_now = h
    for v in [v for v in h.variables if v != var]:
        sys_now = fm_eliminate(sys_now, v)
    a, b = sys_now.le_matrix()
    lower, upper = -np.inf, np.inf
    for i in range(a.shape[0]):
        c = a[i, 0] if a.shape[1] else 0.0
        if abs(c) <= _COEF_EPS:
            if b[i] < -1e-9:
                raise InfeasibleError("constraint system is infeasible")
            continue
        if c > 0:
            upper = min(upper, b[i] / c)
        else:
            lower = max(lower, b[i] / c)
    if lower > upper + 1e-9:
        raise InfeasibleError("constraint system is infeasible")
    return lower, upper


def min_variable(h: HalfspaceSystem, var: str) -> float:
    lo, _ = _var_bounds(h, var)
    if lo == -np.inf:
        raise UnboundedError(f"{var} is unbounded below")
    return float(lo)


def max_variable(h: HalfspaceSystem, var: str) -> float:
    _, hi = _var_bounds(h, var)
    if hi == np.inf:
        raise UnboundedError(f"{var} is unbounded above")
    return float(hi)


def _sum_system(h: HalfspaceSystem) -> HalfspaceSystem:
    """Adjoin t = sum of all variables (plus nonnegativity of the rates)."""
    base = _with_nonneg(h)
    names = base.variables + ("_sum",)
    rows = [(c + (0.0,), s, b) for c, s, b in base.rows]
    ones = tuple(1.0 for _ in base.variables)
    rows.append((ones + (-1.0,), "<=", 0.0))
    rows.append((ones + (-1.0,), ">=", 0.0))
    return HalfspaceSystem(names, rows)


def max_sum_rate(h: HalfspaceSystem) -> float:
    """Exact max of the coordinate sum subject to the rows and x >= 0."""
    return max_variable(_sum_system(h), "_sum")


def min_sum_rate(h: HalfspaceSystem) -> float:
    """Exact min of the coordinate sum subject to the rows and x >= 0."""
    return min_variable(_sum_system(h), "_sum")
