"""Single-letter achievable rate/cost/distortion evaluators.

Each evaluator takes a :class:`LabeledModel` (a finite joint pmf plus a map
from semantic roles to axis names, reconstruction maps and distortion/cost
functions), verifies the Markov/independence structure its region requires,
and returns the region as a :class:`HalfspaceSystem` over named rates
(plus scalar rate/cost/distortion values where the region is a point).

Sums of auxiliary variables (U+V, X1+X2, U2+U3) are realized exactly via
grid pushforwards, so the involved axes must share a common dyadic step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from contnet.errors import AxisError, MarkovViolationError, IndependenceViolationError
from contnet.pmf import JointPmf, sum_axis
from contnet.polyhedra import HalfspaceSystem

MARKOV_TOL = 1e-9


@dataclass(frozen=True)
class LabeledModel:
    """A test channel: pmf + role labels + reconstruction/distortion maps."""

    pmf: JointPmf
    roles: Mapping[str, str]
    recon: Mapping[str, Callable] = field(default_factory=dict)
    distortion: Callable | None = None
    cost: Callable | None = None

    def axis_of(self, role: str) -> str:
        try:
            name = self.roles[role]
        except KeyError:
            raise AxisError(f"model is missing required role {role!r}") from None
        if name not in self.pmf.names:
            raise AxisError(f"role {role!r} points at unknown axis {name!r}")
        return name

    def group(self, *roles: str) -> tuple[str, ...]:
        """Axis names for the given roles, silently skipping absent optional ones."""
        out = []
        for r in roles:
            if r in self.roles:
                out.append(self.axis_of(r))
        return tuple(out)

    def has(self, role: str) -> bool:
        return role in self.roles


def _cmi(p: JointPmf, a, b, c=()) -> float:
    """I(a; b | c) with empty conditioning collapsing to plain MI."""
    a, b, c = tuple(a), tuple(b), tuple(c)
    if not c:
        return p.mutual_information(a, b)
    return p.conditional_mi(a, b, c)


def _require_markov(value: float, what: str) -> None:
    if value > MARKOV_TOL:
        raise MarkovViolationError(f"{what} violated: conditional MI = {value:.3e}")


def _with_sum(p: JointPmf, a_name: str, b_name: str, out_name: str) -> JointPmf:
    axis = sum_axis(p.axis(a_name), p.axis(b_name), out_name)
    return p.pushforward((a_name, b_name), lambda a, b: a + b, axis)


# ---------------------------------------------------------------------------
# point-to-point with side information


def wz_rate(m: LabeledModel) -> tuple[float, float]:
    """Side-information source coding: (rate, distortion) of the test channel.

    Requires roles X, Y, U with the chain Y - X - U, a reconstruction map
    recon['g'](u, y) and distortion(x, y, xhat).
    """
    x, y, u = m.axis_of("X"), m.axis_of("Y"), m.axis_of("U")
    _require_markov(m.pmf.conditional_mi((y,), (u,), (x,)), "Y - X - U")
    rate = max(0.0, m.pmf.mutual_information((u,), (x,)) - m.pmf.mutual_information((u,), (y,)))
    dist = float("nan")
    if m.distortion is not None and "g" in m.recon:
        g = m.recon["g"]
        d = m.distortion
        dist = m.pmf.expectation(
            lambda xv, yv, uv: d(xv, yv, g(uv, yv)), (x, y, u)
        )
    return rate, dist


def gp_rate(m: LabeledModel) -> tuple[float, float]:
    """Channel coding with state at the encoder: (rate, cost).

    Requires roles S, U, X, Y with X a deterministic function of (U, S) and
    the chain U - (X, S) - Y; cost(x, s).  The returned rate is the
    achievable functional I(U;Y) - I(U;S).
    """
    s, u, x, y = m.axis_of("S"), m.axis_of("U"), m.axis_of("X"), m.axis_of("Y")
    h_x_given_us = m.pmf.entropy((x, u, s)) - m.pmf.entropy((u, s))
    if h_x_given_us > MARKOV_TOL:
        raise MarkovViolationError(
            f"X must be a deterministic map of (U, S); H(X|U,S) = {h_x_given_us:.3e}"
        )
    _require_markov(m.pmf.conditional_mi((u,), (y,), (x, s)), "U - (X,S) - Y")
    rate = max(0.0, m.pmf.mutual_information((u,), (y,)) - m.pmf.mutual_information((u,), (s,)))
    cost = float("nan")
    if m.cost is not None:
        cost = m.pmf.expectation(lambda xv, sv: m.cost(xv, sv), (x, s))
    return rate, cost


def gp_rate_statement_form(m: LabeledModel) -> float:
    """The alternative printed functional I(U;X) - I(U;S); exposed for
    comparison, not used by the region machinery."""
    s, u, x = m.axis_of("S"), m.axis_of("U"), m.axis_of("X")
    return max(0.0, m.pmf.mutual_information((u,), (x,)) - m.pmf.mutual_information((u,), (s,)))


# ---------------------------------------------------------------------------
# degraded broadcast channel


def dbc_region(m: LabeledModel) -> tuple[HalfspaceSystem, float]:
    """Superposition region for the degraded broadcast channel.

    Requires roles U, X, Y, Z with U - X - Y - Z; returns the two-row system
    over (R1, R2) plus the expected input cost.
    """
    u, x, y, z = m.axis_of("U"), m.axis_of("X"), m.axis_of("Y"), m.axis_of("Z")
    _require_markov(m.pmf.conditional_mi((u,), (y, z), (x,)), "U - X - (Y,Z)")
    _require_markov(m.pmf.conditional_mi((z,), (x, u), (y,)), "(X,U) - Y - Z")
    sys = HalfspaceSystem(("R1", "R2"))
    rows = [
        sys.le_row({"R1": 1.0}, m.pmf.conditional_mi((x,), (y,), (u,))),
        sys.le_row({"R2": 1.0}, m.pmf.mutual_information((u,), (z,))),
    ]
    cost = float("nan")
    if m.cost is not None:
        cost = m.pmf.expectation(m.cost, (x,))
    return sys.with_rows(rows), cost


# ---------------------------------------------------------------------------
# distributed source coding


def berger_tung_region(m: LabeledModel) -> tuple[HalfspaceSystem, float, float]:
    """Distributed compression inner bound over (R1, R2) plus distortions.

    Requires roles X, Y, U, V with the long chain U - X - Y - V; recon maps
    'g1'(u, v) and 'g2'(u, v) with distortion(s, shat) applied per source.
    """
    x, y, u, v = m.axis_of("X"), m.axis_of("Y"), m.axis_of("U"), m.axis_of("V")
    _require_markov(m.pmf.conditional_mi((u,), (y, v), (x,)), "U - X - (Y,V)")
    _require_markov(m.pmf.conditional_mi((v,), (x, u), (y,)), "V - Y - (X,U)")
    sys = HalfspaceSystem(("R1", "R2"))
    rows = [
        sys.ge_row({"R1": 1.0}, m.pmf.conditional_mi((x,), (u,), (v,))),
        sys.ge_row({"R2": 1.0}, m.pmf.conditional_mi((y,), (v,), (u,))),
        sys.ge_row({"R1": 1.0, "R2": 1.0}, m.pmf.mutual_information((x, y), (u, v))),
    ]
    d1 = d2 = float("nan")
    if m.distortion is not None:
        d = m.distortion
        if "g1" in m.recon:
            g1 = m.recon["g1"]
            d1 = m.pmf.expectation(lambda xv, uv, vv: d(xv, g1(uv, vv)), (x, u, v))
        if "g2" in m.recon:
            g2 = m.recon["g2"]
            d2 = m.pmf.expectation(lambda yv, uv, vv: d(yv, g2(uv, vv)), (y, u, v))
    return sys.with_rows(rows), d1, d2


def two_help_one_region(m: LabeledModel) -> tuple[HalfspaceSystem, float]:
    """Structured-plus-unstructured two-help-one region over (R1, R2).

    Roles: X, Y, U, V required; Q, U1, V1 optional (omitted = trivial).
    The decoder reconstructs Z = zmap(x, y) from g(u1, v1, u+v); distortion
    is distortion(z, zhat).  U and V must live on a shared dyadic grid.
    """
    x, y, u, v = m.axis_of("X"), m.axis_of("Y"), m.axis_of("U"), m.axis_of("V")
    q = m.group("Q")
    u1 = m.group("U1")
    v1 = m.group("V1")
    _require_markov(
        _cmi(m.pmf, (u,) + u1, (y, v) + v1, (x,) + q), "(U,U1) - (X,Q) - (Y,V,V1)"
    )
    _require_markov(
        _cmi(m.pmf, (v,) + v1, (x, u) + u1, (y,) + q), "(V,V1) - (Y,Q) - (X,U,U1)"
    )
    if q:
        _require_markov(m.pmf.mutual_information(q, (x, y)), "Q independent of (X,Y)")

    p = _with_sum(m.pmf, u, v, "_uv_sum")
    sname = "_uv_sum"
    i_sv = _cmi(p, (sname,), (v,), q + u1 + v1)
    i_su = _cmi(p, (sname,), (u,), q + u1 + v1)
    i_uv = _cmi(p, (u,), (v,), q + u1 + v1)
    r1 = _cmi(p, (x,), (u,) + u1, q + v1) + i_sv - i_uv
    r2 = _cmi(p, (y,), (v,) + v1, q + u1) + i_su - i_uv
    rsum = _cmi(p, (x, y), (u, v) + u1 + v1, q) + i_sv + i_su - i_uv

    sys = HalfspaceSystem(("R1", "R2"))
    rows = [
        sys.ge_row({"R1": 1.0}, max(0.0, r1)),
        sys.ge_row({"R2": 1.0}, max(0.0, r2)),
        sys.ge_row({"R1": 1.0, "R2": 1.0}, max(0.0, rsum)),
    ]
    dist = float("nan")
    if m.distortion is not None and "g" in m.recon and "zmap" in m.recon:
        g = m.recon["g"]
        zmap = m.recon["zmap"]
        d = m.distortion
        axes = (x, y) + u1 + v1 + (sname,)

        def point_dist(*vals):
            xv, yv = vals[0], vals[1]
            rest = vals[2:]
            u1v = rest[0] if u1 else 0.0
            v1v = rest[1 if u1 else 0] if v1 else 0.0
            sv = rest[-1]
            return d(zmap(xv, yv), g(u1v, v1v, sv))

        dist = p.expectation(point_dist, axes)
    return sys.with_rows(rows), dist


# ---------------------------------------------------------------------------
# computation over the multiple-access channel


def mac_compute_region(m: LabeledModel) -> HalfspaceSystem:
    """Rates at which the receiver can decode the input sum X1 + X2.

    Roles: U1, U2, X1, X2, Y required; Q optional.  Needs the chain
    (U1,X1) - Q - (U2,X2) and addition-compatible X1/X2 grids.
    """
    u1, u2 = m.axis_of("U1"), m.axis_of("U2")
    x1, x2, yx = m.axis_of("X1"), m.axis_of("X2"), m.axis_of("Y")
    q = m.group("Q")
    _require_markov(_cmi(m.pmf, (u1, x1), (u2, x2), q), "(U1,X1) - Q - (U2,X2)")

    p = _with_sum(m.pmf, x1, x2, "_x_sum")
    s = "_x_sum"
    cond = (u1, u2) + q
    i_sy = _cmi(p, (s,), (yx,), cond)
    i_sx1 = _cmi(p, (s,), (x1,), cond)
    i_sx2 = _cmi(p, (s,), (x2,), cond)
    r1 = _cmi(p, (u1,), (yx,), (u2,) + q) + i_sy - i_sx2
    r2 = _cmi(p, (u2,), (yx,), (u1,) + q) + i_sy - i_sx1
    rsum = _cmi(p, (u1, u2), (yx,), q) + 2.0 * i_sy - i_sx1 - i_sx2

    sys = HalfspaceSystem(("R1", "R2"))
    return sys.with_rows(
        [
            sys.le_row({"R1": 1.0}, r1),
            sys.le_row({"R2": 1.0}, r2),
            sys.le_row({"R1": 1.0, "R2": 1.0}, rsum),
        ]
    )


# ---------------------------------------------------------------------------
# 3-to-1 interference channel


def ic_3to1_region(m: LabeledModel) -> HalfspaceSystem:
    """Inner bound over (R1, R2, R3) for the 3-to-1 interference channel.

    Roles: U2, U3, X1, X2, X3, Y1, Y2, Y3 required; Q optional.  Requires
    X1, (U2,X2), (U3,X3) conditionally mutually independent given Q and
    addition-compatible U2/U3 grids.
    """
    u2, u3 = m.axis_of("U2"), m.axis_of("U3")
    x1, x2, x3 = m.axis_of("X1"), m.axis_of("X2"), m.axis_of("X3")
    y1, y2, y3 = m.axis_of("Y1"), m.axis_of("Y2"), m.axis_of("Y3")
    q = m.group("Q")
    i_blocks = _cmi(m.pmf, (x1,), (u2, x2, u3, x3), q)
    i_pair = _cmi(m.pmf, (u2, x2), (u3, x3), q)
    if max(i_blocks, i_pair) > MARKOV_TOL:
        raise IndependenceViolationError(
            f"inputs not conditionally independent given Q: {max(i_blocks, i_pair):.3e}"
        )

    p = _with_sum(m.pmf, u2, u3, "_u_sum")
    s = "_u_sum"
    i_x1s_y1 = _cmi(p, (x1, s), (y1,), q)
    sys = HalfspaceSystem(("R1", "R2", "R3"))
    rows = [sys.le_row({"R1": 1.0}, _cmi(p, (x1,), (y1,), (s,) + q))]
    rate_name = {2: "R2", 3: "R3"}
    uj = {2: u2, 3: u3}
    xj = {2: x2, 3: x3}
    yj = {2: y2, 3: y3}
    for j in (2, 3):
        rows.append(sys.le_row({"R1": 1.0}, i_x1s_y1 - _cmi(p, (s,), (uj[j],), q)))
        rows.append(
            sys.le_row({rate_name[j]: 1.0}, _cmi(p, (uj[j], xj[j]), (yj[j],), q))
        )
        jbar = 5 - j
        rows.append(
            sys.le_row(
                {"R1": 1.0, rate_name[j]: 1.0},
                _cmi(p, (xj[j],), (yj[j],), (uj[j],) + q)
                + i_x1s_y1
                - _cmi(p, (s,), (uj[jbar],), q),
            )
        )
    return sys.with_rows(rows)
