"""Closed-form Gaussian evaluators, optimizers and figure sweeps.

Everything here is exact covariance algebra (log-det mutual informations,
Schur-complement conditional variances); these functions double as the
analytic oracles for the discretization pipeline tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from contnet.errors import InfeasibleError
from contnet.optimize import golden_min, multistart_minimize

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# covariance algebra


@dataclass(frozen=True)
class GaussianSpec:
    """Zero-or-nonzero mean Gaussian vector with named coordinates."""

    mean: tuple[float, ...]
    cov: tuple[tuple[float, ...], ...]
    labels: tuple[str, ...]

    def __init__(self, mean, cov, labels):
        mean = tuple(float(v) for v in mean)
        labels = tuple(labels)
        c = np.asarray(cov, dtype=float)
        if c.shape != (len(mean), len(mean)) or len(labels) != len(mean):
            raise ValueError("mean/cov/labels dimension mismatch")
        if not np.allclose(c, c.T, atol=1e-12, rtol=0.0):
            raise ValueError("covariance must be symmetric")
        eig = np.linalg.eigvalsh(0.5 * (c + c.T))
        if eig.min() < -1e-10:
            raise ValueError(f"covariance not PSD (min eigenvalue {eig.min()})")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", tuple(tuple(row) for row in c))
        object.__setattr__(self, "labels", labels)

    def matrix(self) -> np.ndarray:
        return np.asarray(self.cov, dtype=float)

    def idx(self, names) -> list[int]:
        if isinstance(names, str):
            names = (names,)
        return [self.labels.index(n) for n in names]


def _logdet(c: np.ndarray) -> float:
    if c.size == 0:
        return 0.0
    sign, val = np.linalg.slogdet(c)
    if sign <= 0 or not np.isfinite(val):
        return -math.inf
    return float(val)


def gaussian_mi(g: GaussianSpec, a, b) -> float:
    """I(A; B) in bits via the log-det identity; +inf when degenerate."""
    c = g.matrix()
    ia, ib = g.idx(a), g.idx(b)
    la = _logdet(c[np.ix_(ia, ia)])
    lb = _logdet(c[np.ix_(ib, ib)])
    lab = _logdet(c[np.ix_(ia + ib, ia + ib)])
    if lab == -math.inf:
        return math.inf
    return max(0.0, (la + lb - lab) / (2.0 * LN2))


def gaussian_cmi(g: GaussianSpec, a, b, cond) -> float:
    """I(A; B | C) in bits; +inf when the joint is degenerate."""
    c = g.matrix()
    ia, ib, ic = g.idx(a), g.idx(b), g.idx(cond)
    lac = _logdet(c[np.ix_(ia + ic, ia + ic)])
    lbc = _logdet(c[np.ix_(ib + ic, ib + ic)])
    lc = _logdet(c[np.ix_(ic, ic)])
    labc = _logdet(c[np.ix_(ia + ib + ic, ia + ib + ic)])
    if labc == -math.inf:
        return math.inf
    return max(0.0, (lac + lbc - lc - labc) / (2.0 * LN2))


def conditional_cov(cov: np.ndarray, target: Sequence[int], given: Sequence[int]) -> np.ndarray:
    """Schur complement Sigma_TT - Sigma_TG Sigma_GG^{-1} Sigma_GT."""
    t = list(target)
    gv = list(given)
    stt = cov[np.ix_(t, t)]
    if not gv:
        return stt
    stg = cov[np.ix_(t, gv)]
    sgg = cov[np.ix_(gv, gv)]
    sol = np.linalg.solve(sgg, stg.T)
    return stt - stg @ sol


# ---------------------------------------------------------------------------
# lossy two-help-one


@dataclass(frozen=True)
class ThuLattice:
    """Structured (lattice) rates for reconstructing Z = X - cY at distortion D."""

    rho: float
    c: float
    d: float
    sigma_z2: float
    q1_max: float
    sum_rate_symmetric: float

    def r1(self, q1: float) -> float:
        return 0.5 * math.log2(self.sigma_z2**2 / (q1 * (self.sigma_z2 - self.d)))

    def r2(self, q1: float) -> float:
        rem = self.d * self.sigma_z2 - q1 * (self.sigma_z2 - self.d)
        return 0.5 * math.log2(self.sigma_z2**2 / rem)

    def on_frontier(self, r1: float, r2: float, slack: float = 1e-9) -> bool:
        return 2.0 ** (-2 * r1) + 2.0 ** (-2 * r2) <= self.d / self.sigma_z2 + slack


def thu_lattice(rho: float, c: float, d: float) -> ThuLattice:
    """Closed-form lattice scheme; sum rate 0 once D reaches Var(Z)."""
    s2 = 1.0 + c * c - 2.0 * rho * c
    if d >= s2:
        return ThuLattice(rho, c, d, s2, 0.0, 0.0)
    q1_max = d * s2 / (s2 - d)
    return ThuLattice(rho, c, d, s2, q1_max, math.log2(2.0 * s2 / d))


def _thu_bt_sum_for_q1(rho: float, c: float, d: float, q1: float) -> float:
    """Min over q2 of the unstructured sum rate at this q1 (inf if infeasible)."""
    alpha = 1.0 - rho * rho
    s2 = 1.0 + c * c - 2.0 * rho * c
    a = q1 * alpha
    bq = c * c * alpha + q1 * s2
    cc = (1.0 + q1) - rho * rho
    e = 1.0 + q1
    if bq - d * e <= 0.0:
        # helper 2 unnecessary: distortion target met with q2 -> inf
        return 0.5 * math.log2((1.0 + q1) / q1)
    q2 = (d * cc - a) / (bq - d * e)
    if q2 <= 0.0:
        return math.inf
    den = (1.0 + q1) * (1.0 + q2) - rho * rho
    return 0.5 * math.log2(den / (q1 * q2))


def thu_bt_min_sumrate(rho: float, c: float, d: float, grid: int = 400) -> float:
    """Minimum unstructured (two independent helpers) sum rate at distortion d.

    Log-grid search over q1 with golden refinement; q2 eliminated in closed
    form on the distortion boundary.
    """
    alpha = 1.0 - rho * rho
    if d <= 0:
        raise ValueError("distortion must be positive")
    qs = np.logspace(-8, 8, grid)
    vals = np.asarray([_thu_bt_sum_for_q1(rho, c, d, q) for q in qs])
    if not np.isfinite(vals).any():
        raise InfeasibleError(f"no feasible helper variances at D={d}")
    k = int(np.argmin(vals))
    lo = qs[max(0, k - 1)]
    hi = qs[min(len(qs) - 1, k + 1)]
    _, best = golden_min(
        lambda t: _thu_bt_sum_for_q1(rho, c, d, math.exp(t)), math.log(lo), math.log(hi)
    )
    return float(min(best, vals[k]))


def thu_gain_sweep(rhos, cs, ds) -> list[tuple[float, float, float]]:
    """Max over D of (unstructured min sum - lattice sum), floored at 0.

    Returns (rho, c, gain_bits) rows in grid order.
    """
    out = []
    for rho in rhos:
        for c in cs:
            gain = 0.0
            for d in ds:
                s2 = 1.0 + c * c - 2.0 * rho * c
                if d >= s2:
                    continue
                lattice = math.log2(2.0 * s2 / d)
                try:
                    bt = thu_bt_min_sumrate(rho, c, d)
                except InfeasibleError:
                    continue
                gain = max(gain, bt - lattice)
            out.append((float(rho), float(c), float(gain)))
    return out


# ---------------------------------------------------------------------------
# computation over the Gaussian MAC


@dataclass(frozen=True)
class MacGaussian:
    p1: float
    p2: float
    n0: float
    structured_r1: float
    structured_r2: float
    unstructured_rows: tuple[float, float, float]

    @property
    def structured_sum(self) -> float:
        return self.structured_r1 + self.structured_r2

    @property
    def unstructured_sum(self) -> float:
        return self.unstructured_rows[2]

    @property
    def crossover(self) -> bool:
        """Structured strictly beats unstructured on sum rate."""
        return self.structured_sum > self.unstructured_sum

    def crossover_condition(self) -> bool:
        """Equivalent closed-form comparison on the powers."""
        a = (1.0 + self.p1 / self.p2) * (1.0 + self.p2 / self.p1)
        return a < 1.0 + self.p1 / self.n0 + self.p2 / self.n0


def mac_gaussian(p1: float, p2: float, n0: float) -> MacGaussian:
    if min(p1, p2, n0) <= 0:
        raise ValueError("powers and noise must be positive")
    s = p1 + p2
    r1s = 0.5 * math.log2(p1 * (s + n0) / (s * n0))
    r2s = 0.5 * math.log2(p2 * (s + n0) / (s * n0))
    rows = (
        0.5 * math.log2(1.0 + p1 / n0),
        0.5 * math.log2(1.0 + p2 / n0),
        0.5 * math.log2(1.0 + s / n0),
    )
    return MacGaussian(p1, p2, n0, r1s, r2s, rows)


def mac_systems(p1: float, p2: float, n0: float):
    """(unstructured, structured) halfspace systems over (R1, R2)."""
    from contnet.polyhedra import HalfspaceSystem

    g = mac_gaussian(p1, p2, n0)
    sys0 = HalfspaceSystem(("R1", "R2"))
    unstructured = sys0.with_rows(
        [
            sys0.le_row({"R1": 1.0}, g.unstructured_rows[0]),
            sys0.le_row({"R2": 1.0}, g.unstructured_rows[1]),
            sys0.le_row({"R1": 1.0, "R2": 1.0}, g.unstructured_rows[2]),
        ]
    )
    structured = sys0.with_rows(
        [
            sys0.le_row({"R1": 1.0}, g.structured_r1),
            sys0.le_row({"R2": 1.0}, g.structured_r2),
        ]
    )
    return unstructured, structured


# ---------------------------------------------------------------------------
# 3-to-1 interference channel masks


def ic_structured_feasible(a, p):
    """All three users reach interference-free capacity with coset codes:
    (P+1)(1+2P) <= 2 a^2 P."""
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    return (p + 1.0) * (1.0 + 2.0 * p) <= 2.0 * a * a * p


def ic_structured_r1_bound(a, p):
    """Rate bound of user 1: 1/2 log(1+P) + min{0, 1/2 log[1/2 + a^2 P/(P+1)]
    - 1/2 log(1+P)}, in bits."""
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    cap = 0.5 * np.log2(1.0 + p)
    lattice = 0.5 * np.log2(0.5 + a * a * p / (p + 1.0))
    return cap + np.minimum(0.0, lattice - cap)


def ic_unstructured_feasible(a, p):
    """All three users reach capacity while receiver 1 jointly decodes the
    interferers: the four pair/triple multiple-access constraints."""
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    a2 = a * a
    one = p + 1.0
    return (
        (one <= a2 * p + 1.0)
        & (one**2 <= 2.0 * a2 * p + 1.0)
        & (one**2 <= (a2 + 1.0) * p + 1.0)
        & (one**3 <= (2.0 * a2 + 1.0) * p + 1.0)
    )


@dataclass(frozen=True)
class IcMasks:
    a_values: np.ndarray
    p_values: np.ndarray
    structured: np.ndarray
    unstructured: np.ndarray

    def min_feasible_a(self, which: str) -> float:
        mask = self.structured if which == "structured" else self.unstructured
        rows = mask.any(axis=1)
        if not rows.any():
            return math.inf
        return float(self.a_values[int(np.argmax(rows))])

    def min_feasible_p(self, which: str) -> np.ndarray:
        """Per-a smallest feasible P (nan where empty)."""
        mask = self.structured if which == "structured" else self.unstructured
        out = np.full(len(self.a_values), np.nan)
        any_p = mask.any(axis=1)
        idx = np.argmax(mask, axis=1)
        out[any_p] = self.p_values[idx[any_p]]
        return out

    def area(self, which: str) -> int:
        mask = self.structured if which == "structured" else self.unstructured
        return int(mask.sum())


def ic_gaussian_masks(a_values, p_values) -> IcMasks:
    a = np.asarray(a_values, dtype=float)
    p = np.asarray(p_values, dtype=float)
    aa, pp = np.meshgrid(a, p, indexing="ij")
    return IcMasks(a, p, ic_structured_feasible(aa, pp), ic_unstructured_feasible(aa, pp))


# ---------------------------------------------------------------------------
# multiple descriptions, example 1 (independent pair, reconstruct the sum)


def md_ex1_structured(p: float) -> tuple[float, float, float]:
    """Nested-code rate triple (R1, R2, R3) at per-source distortion p."""
    if not 0.0 < p < 1.0:
        raise ValueError("need 0 < p < 1")
    r = 0.5 * math.log2(1.0 / p)
    return (r, r, 0.5 * math.log2(2.0 / p))


_EX1_BASE = ("X", "Z", "Q13", "Q23", "Q1", "Q2", "Q3")


def _ex1_cov(p: float, theta1: float, theta2: float, alphas: np.ndarray) -> np.ndarray:
    """Covariance of (X, Z, U13, U23, U1, U2, U3, X+Z) under the test channels."""
    d = np.diag([1.0, 1.0, theta1, theta2, p, p, 1.0])
    rows = {
        "X": np.array([1.0, 0, 0, 0, 0, 0, 0]),
        "Z": np.array([0, 1.0, 0, 0, 0, 0, 0]),
    }
    u13 = rows["X"] + np.eye(7)[2]
    u23 = rows["Z"] + np.eye(7)[3]
    c1 = 1.0 / (1.0 + theta1)
    c2 = 1.0 / (1.0 + theta2)
    u1 = rows["X"] - c1 * u13 + np.eye(7)[4]
    u2 = rows["Z"] - c2 * u23 + np.eye(7)[5]
    u3 = np.asarray(alphas, dtype=float)
    lam = np.vstack([rows["X"], rows["Z"], u13, u23, u1, u2, u3, rows["X"] + rows["Z"]])
    return lam @ d @ lam.T


_EX1_IDX = {name: i for i, name in enumerate(("X", "Z", "U13", "U23", "U1", "U2", "U3", "Y"))}


def _ex1_objective_and_violation(p: float, params: np.ndarray) -> tuple[float, float]:
    theta1, theta2 = params[0], params[1]
    alphas = params[2:]
    cov = _ex1_cov(p, theta1, theta2, alphas)
    ix = _EX1_IDX

    def cvar(target: str, given: tuple[str, ...]) -> float:
        cc = conditional_cov(cov, [ix[target]], [ix[g] for g in given])
        return float(cc[0, 0])

    viol = 0.0
    viol += max(0.0, cvar("Y", ("U13", "U23", "U3")) - 2.0 * p)
    viol += max(0.0, cvar("X", ("U13", "U23", "U1", "U3")) - p)
    viol += max(0.0, cvar("Z", ("U13", "U23", "U1", "U3")) - p)
    viol += max(0.0, cvar("X", ("U13", "U23", "U2", "U3")) - p)
    viol += max(0.0, cvar("Z", ("U13", "U23", "U2", "U3")) - p)

    def ld(names: tuple[str, ...]) -> float:
        sub = cov[np.ix_([ix[n] for n in names], [ix[n] for n in names])]
        return _logdet(sub)

    term1 = (
        ld(("X", "Z")) + ld(("U3", "U13", "U23")) - ld(("X", "Z", "U3", "U13", "U23"))
    ) / (2.0 * LN2)
    cond = ("U13", "U23", "X", "Z")
    term2 = (
        ld(("U1", "U2") + cond)
        + ld(("U3",) + cond)
        - ld(cond)
        - ld(("U1", "U2", "U3") + cond)
    ) / (2.0 * LN2)
    if not (np.isfinite(term1) and np.isfinite(term2)):
        return math.inf, viol
    return term1 + term2, viol


def md_ex1_unstructured_min_r3(p: float, seed: int = 20240801) -> dict:
    """Smallest R3 found for the independent-codebook configuration.

    Deterministic multi-start pattern search over the 9 test-channel
    parameters (two quantizer variances, seven mixing weights); candidates
    violating a decoder distortion target are penalized out.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("need 0 < p < 1")

    def penalized(params: np.ndarray) -> float:
        val, viol = _ex1_objective_and_violation(p, params)
        if viol > 0:
            return 1.0e3 + 1.0e3 * viol
        return val

    tmax = p / (1.0 - p)
    lo = np.asarray([1e-4, 1e-4, -4, -4, -4, -4, -4, -4, 0.05])
    hi = np.asarray([10.0, 10.0, 4, 4, 4, 4, 4, 4, 4.0])
    starts = [
        np.asarray([tmax, tmax, 0, 0, 0, 0, 0, 0, 1.0]),
        np.asarray([tmax, tmax, 1, 1, 0, 0, 0, 0, 1.0]),
        np.asarray([2 * tmax, 2 * tmax, 1, 1, -0.5, -0.5, 0, 0, 0.5]),
        np.asarray([0.5 * tmax, 0.5 * tmax, 0.5, 0.5, 0, 0, 0.2, 0.2, 1.0]),
    ]
    x, v = multistart_minimize(
        penalized, lo, hi, n_starts=200, top=8, seed=seed, extra_starts=starts
    )
    value, viol = _ex1_objective_and_violation(p, x)
    feasible = viol <= 1e-12
    return {
        "min_r3": float(value) if feasible else math.inf,
        "params": tuple(float(t) for t in x),
        "feasible": feasible,
    }


def md_ex1(p: float) -> dict:
    """Structured triple and unstructured minimum R3 for the sum-source example."""
    r1, r2, r3 = md_ex1_structured(p)
    unstructured = md_ex1_unstructured_min_r3(p)
    return {
        "structured": (r1, r2, r3),
        "unstructured_min_r3": unstructured["min_r3"],
        "unstructured": unstructured,
    }


# ---------------------------------------------------------------------------
# multiple descriptions, example 2 (correlated pair, sum on description 3)


def md_ex2(p: float) -> dict:
    """Closed-form rates and distortions of the correlated-auxiliary example.

    Valid for 1/2 < P < 2/3.  R1 = R2 = max(log-branch, quarter-log branch),
    R3 = R1 + 1/2; distortions follow the covariance structure.
    """
    if not 0.5 < p < 2.0 / 3.0:
        raise ValueError("need 1/2 < P < 2/3")
    branch_a = 0.5 * math.log2(p * p / (p + (1.0 - p) ** 2))
    branch_b = 0.25 * math.log2(1.0 / (2.0 * p - 1.0))
    r1 = max(branch_a, branch_b)
    return {
        "r1": r1,
        "r2": r1,
        "r3": r1 + 0.5,
        "d1": p,
        "d2": p,
        "d3": 2.0 * p,
        "d12": 2.0 * p - 1.0,
        "d13": 2.0 * p - 1.0,
        "d23": 2.0 * p - 1.0,
    }


def md_ex2_cov(p: float) -> GaussianSpec:
    """Joint covariance of (X, U, V) as used by the example."""
    c = [
        [1.0, 1.0 - p, 1.0 - p],
        [1.0 - p, 1.0 - p, 0.0],
        [1.0 - p, 0.0, 1.0 - p],
    ]
    return GaussianSpec((0.0, 0.0, 0.0), c, ("X", "U", "V"))


def md_ex2_nonredundancy_holds(p: float) -> bool:
    """Var(V | X, U) < Var(V | X, U+V), the sum-covering tightness condition."""
    spec = md_ex2_cov(p)
    cov = spec.matrix()
    lam = np.vstack([np.eye(3), [[0.0, 1.0, 1.0]]])
    full = lam @ cov @ lam.T  # (X, U, V, U+V)
    v_given_xu = conditional_cov(full, [2], [0, 1])[0, 0]
    v_given_xw = conditional_cov(full, [2], [0, 3])[0, 0]
    return bool(v_given_xu < v_given_xw)
