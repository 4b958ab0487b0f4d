"""Covering/packing constraint systems for multiple-descriptions coding.

The rate region is expressed through auxiliary codebook rates ``r[F]`` and
per-description bin splits ``rho[F,i]`` tied to the description rates by
``R_i = sum_F rho[F,i]``; membership and extremal-rate queries reduce to
Fourier-Motzkin elimination of the auxiliaries.

Two generators are provided: the unstructured system (independent random
codebooks, one per Sperner family) and the structured system, which adds a
nested pair of linear codebooks ``V_in``/``V_out`` (rates r'_in <= r'_out)
whose sum codeword ``W = V_in + V_out`` is decodable on its own.

The structured generator is validated for the single-member configuration
A_in = {{1}}, A_out = {{2}}, A_sum = {{3}} with no active unstructured
families; anything more general is gated behind ``experimental=True``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from contnet.errors import GridMismatchError
from contnet.pmf import JointPmf
from contnet.polyhedra import (
    HalfspaceSystem,
    fix_variables,
    fm_eliminate,
    is_feasible,
    min_variable,
    project_onto,
)
from contnet.sperner import SpernerFamily, all_decoders, decoded_sets, enumerate_sperner


# ---------------------------------------------------------------------------
# information sources


class DenseSource:
    """Mutual-information queries over a dense JointPmf (groups = axis tuples)."""

    def __init__(self, pmf: JointPmf):
        self.pmf = pmf

    def mi(self, a: Sequence[str], b: Sequence[str]) -> float:
        if not a or not b:
            return 0.0
        return self.pmf.mutual_information(tuple(a), tuple(b))

    def cmi(self, a: Sequence[str], b: Sequence[str], c: Sequence[str]) -> float:
        if not a or not b:
            return 0.0
        if not c:
            return self.mi(a, b)
        return self.pmf.conditional_mi(tuple(a), tuple(b), tuple(c))


def ibar(source, ordered_groups: Sequence[Sequence[str]]) -> float:
    """Chained mutual-covering sum: sum_j I(Z_j ; Z_1..Z_{j-1}).

    Order-dependent; callers pass groups in the canonical family order.
    """
    total = 0.0
    for j in range(1, len(ordered_groups)):
        prev: tuple[str, ...] = tuple()
        for g in ordered_groups[:j]:
            prev = prev + tuple(g)
        total += source.mi(tuple(ordered_groups[j]), prev)
    return total


def ibar_pmf(p: JointPmf, ordered_groups: Sequence[Sequence[str]]) -> float:
    """Public dense-pmf form of the chained sum."""
    return ibar(DenseSource(p), ordered_groups)


# ---------------------------------------------------------------------------
# model description


@dataclass(frozen=True)
class StructuredTriple:
    a_in: SpernerFamily
    a_out: SpernerFamily
    a_sum: SpernerFamily
    v_in: str
    v_out: str
    w: str

    def __post_init__(self):
        fams = {self.a_in, self.a_out, self.a_sum}
        if len(fams) != 3:
            raise ValueError("structured families must be three distinct families")


@dataclass(frozen=True)
class MdModel:
    """Source + codebook variables for an `ell`-description problem.

    source: axis names of the source block (single variable or a vector);
    u_axes: axis name per active unstructured family; structured: optional
    nested-code triple.  `info` answers MI queries; defaults to the dense
    pmf when one is supplied.
    """

    source: tuple[str, ...]
    u_axes: Mapping[SpernerFamily, str] = field(default_factory=dict)
    structured: StructuredTriple | None = None
    ell: int = 3
    pmf: JointPmf | None = None
    info: object | None = None

    def source_group(self) -> tuple[str, ...]:
        return tuple(self.source)

    def query(self):
        if self.info is not None:
            return self.info
        if self.pmf is not None:
            return DenseSource(self.pmf)
        raise ValueError("MdModel needs either a pmf or an info source")

    def active_families(self) -> list[SpernerFamily]:
        return sorted(self.u_axes.keys(), key=lambda f: (len(f.members), f.members))


# ---------------------------------------------------------------------------
# constraint systems


@dataclass(frozen=True)
class MdConstraintSystem:
    """Halfspace system over (R_i, r[F], rho[F,i]) with nonneg auxiliaries."""

    system: HalfspaceSystem
    rate_names: tuple[str, ...]
    aux_names: tuple[str, ...]

    def pretty(self) -> str:
        return self.system.pretty()


def _rate_name(i: int) -> str:
    return f"R{i}"


def _r_name(fam: SpernerFamily) -> str:
    return f"r[{fam.label()}]"


def _rho_name(fam_label: str, i: int) -> str:
    return f"rho[{fam_label},{i}]"


def _subsets(items):
    for k in range(len(items) + 1):
        yield from combinations(items, k)


def _build_system(variables, rows) -> HalfspaceSystem:
    return HalfspaceSystem(tuple(variables), rows)


def unstructured_constraints(m: MdModel) -> MdConstraintSystem:
    """Covering/packing system for independent per-family codebooks."""
    if m.structured is not None:
        raise ValueError("model carries a structured triple; use structured_constraints")
    fams = m.active_families()
    if not fams:
        raise ValueError("no active codebook families")
    src = m.query()
    x = m.source_group()

    rates = [_rate_name(i) for i in range(1, m.ell + 1)]
    r_vars = [_r_name(f) for f in fams]
    rho_vars = []
    rho_index: dict[SpernerFamily, list[tuple[str, int]]] = {f: [] for f in fams}
    for f in fams:
        for i in f.ground:
            name = _rho_name(f.label(), i)
            rho_vars.append(name)
            rho_index[f].append((name, i))
    variables = tuple(rates + r_vars + rho_vars)
    sys0 = HalfspaceSystem(variables)
    rows = []

    # nonnegative auxiliaries
    for name in r_vars + rho_vars:
        rows.append(sys0.ge_row({name: 1.0}, 0.0))

    # rate coupling: R_i = sum of the splits binned on description i
    for i in range(1, m.ell + 1):
        terms = {_rate_name(i): 1.0}
        for f in fams:
            for name, desc in rho_index[f]:
                if desc == i:
                    terms[name] = -1.0
        rows.append(sys0.le_row(terms, 0.0))
        rows.append(sys0.ge_row(terms, 0.0))

    # covering: every nonempty set of codebooks must jointly cover the source
    for sub in _subsets(fams):
        if not sub:
            continue
        groups = [(m.u_axes[f],) for f in sub]
        bound = ibar(src, groups) + src.mi([g[0] for g in groups], x)
        rows.append(sys0.ge_row({_r_name(f): 1.0 for f in sub}, bound))

    # packing: at every decoder, every undetermined codebook subset must be
    # resolvable from the received bins plus what is already known
    for dec in all_decoders(m.ell):
        m_n, tilde = decoded_sets(dec, m.ell)
        m_act = [f for f in fams if f in set(m_n)]
        tilde_act = [f for f in fams if f in set(tilde)]
        fresh = [f for f in m_act if f not in set(tilde_act)]
        for sub in _subsets(fresh):
            known = sorted(set(tilde_act) | set(sub), key=lambda f: (len(f.members), f.members))
            und = [f for f in m_act if f not in set(known)]
            if not und:
                continue
            und_groups = [(m.u_axes[f],) for f in und]
            known_axes = [m.u_axes[f] for f in known]
            bound = ibar(src, und_groups) + src.mi([m.u_axes[f] for f in und], known_axes)
            terms: dict[str, float] = {}
            for f in und:
                terms[_r_name(f)] = 1.0
                for name, _ in rho_index[f]:
                    terms[name] = -1.0
            rows.append(sys0.le_row(terms, bound))

    return MdConstraintSystem(sys0.with_rows(rows), tuple(rates), tuple(r_vars + rho_vars))


def _standard_structured_shape(m: MdModel) -> bool:
    st = m.structured
    singles = (
        SpernerFamily([(1,)]),
        SpernerFamily([(2,)]),
        SpernerFamily([(3,)]),
    )
    return (
        m.ell == 3
        and not m.u_axes
        and (st.a_in, st.a_out, st.a_sum) == singles
    )


def structured_constraints(
    m: MdModel, alpha: float = 1.0, beta: float = 1.0, experimental: bool = False
) -> MdConstraintSystem:
    """Covering/packing system with a nested linear codebook pair.

    The sum codeword W = alpha*V_in + beta*V_out rides on the larger of the
    two nested rates (r'_out) and is binned on the descriptions of A_sum.
    The joint-covering correction row uses the terms
    I(W; V_in | U_M) - I(V_in; V_out | U_M); it binds the *pair* rate
    r'_in + r'_out (see the decisions record for the calibration).
    """
    st = m.structured
    if st is None:
        raise ValueError("model has no structured triple")
    if not _standard_structured_shape(m) and not experimental:
        raise NotImplementedError(
            "general structured configurations are experimental; pass experimental=True"
        )
    x = m.source_group()
    fams = m.active_families()
    if (alpha, beta) == (1.0, 1.0):
        src = m.query()
        w_axis = st.w
    else:
        w_axis, src = _general_w_source(m, alpha, beta)

    rates = [_rate_name(i) for i in range(1, m.ell + 1)]
    r_vars = [_r_name(f) for f in fams] + ["r'[in]", "r'[out]"]
    rho_index: dict[str, list[tuple[str, int]]] = {}
    rho_vars: list[str] = []

    def add_split(label: str, ground) -> None:
        rho_index[label] = []
        for i in ground:
            name = _rho_name(label, i)
            rho_vars.append(name)
            rho_index[label].append((name, i))

    for f in fams:
        add_split(f.label(), f.ground)
    add_split("in", st.a_in.ground)
    add_split("out", st.a_out.ground)
    add_split("sum", st.a_sum.ground)

    variables = tuple(rates + r_vars + rho_vars)
    sys0 = HalfspaceSystem(variables)
    rows = []
    for name in r_vars + rho_vars:
        rows.append(sys0.ge_row({name: 1.0}, 0.0))
    # nested codebooks: the inner rate cannot exceed the outer one
    rows.append(sys0.le_row({"r'[in]": 1.0, "r'[out]": -1.0}, 0.0))

    for i in range(1, m.ell + 1):
        terms = {_rate_name(i): 1.0}
        for label in rho_index:
            for name, desc in rho_index[label]:
                if desc == i:
                    terms[name] = -1.0
        rows.append(sys0.le_row(terms, 0.0))
        rows.append(sys0.ge_row(terms, 0.0))

    struct_axes = {"in": st.v_in, "out": st.v_out}

    # joint covering over unstructured subsets and any of {V_in, V_out}
    for sub in _subsets(fams):
        for e_sub in _subsets(("in", "out")):
            if not sub and not e_sub:
                continue
            groups = [(m.u_axes[f],) for f in sub] + [(struct_axes[e],) for e in e_sub]
            flat = [g[0] for g in groups]
            bound = ibar(src, groups) + src.mi(flat, x)
            terms = {_r_name(f): 1.0 for f in sub}
            for e in e_sub:
                terms[f"r'[{e}]"] = 1.0
            rows.append(sys0.ge_row(terms, bound))

    # sum-codebook covering correction (binds the nested pair jointly)
    for sub in _subsets(fams):
        u_axes = [m.u_axes[f] for f in sub]
        groups = [(a,) for a in u_axes] + [(st.v_out,)]
        bound = (
            ibar(src, groups)
            + src.mi(u_axes + [w_axis], x)
            - src.cmi((w_axis,), (st.v_in,), u_axes)
            + src.cmi((st.v_in,), (st.v_out,), u_axes)
        )
        terms = {_r_name(f): 1.0 for f in sub}
        terms["r'[in]"] = 1.0
        terms["r'[out]"] = 1.0
        rows.append(sys0.ge_row(terms, bound))

    # packing
    struct_fams = {st.a_in: "in", st.a_out: "out", st.a_sum: "sum"}
    for dec in all_decoders(m.ell):
        held = set(dec)
        m_n, tilde = decoded_sets(dec, m.ell)
        m_n_set, tilde_set = set(m_n), set(tilde)
        u_dec = [f for f in fams if f in m_n_set]
        u_tilde = [f for f in fams if f in tilde_set]
        sum_dec = st.a_sum in m_n_set
        in_dec = st.a_in in m_n_set
        out_dec = st.a_out in m_n_set

        if not sum_dec:
            # undetermined unstructured families and nested codebooks at
            # this decoder must be distinguishable from the received bins
            entries = [("u", f) for f in u_dec if f not in tilde_set]
            entries += [("e", e) for e, fam in (("in", st.a_in), ("out", st.a_out)) if fam in m_n_set and fam not in tilde_set]
            for locked in _subsets(entries):
                und = [it for it in entries if it not in set(locked)]
                if not und:
                    continue
                und_groups = []
                terms = {}
                for kind, item in und:
                    if kind == "u":
                        und_groups.append((m.u_axes[item],))
                        terms[_r_name(item)] = 1.0
                        for name, _ in rho_index[item.label()]:
                            terms[name] = -1.0
                    else:
                        und_groups.append((struct_axes[item],))
                        terms[f"r'[{item}]"] = 1.0
                        for name, _ in rho_index[item]:
                            terms[name] = -1.0
                known_axes = [m.u_axes[f] for f in u_tilde]
                for kind, item in locked:
                    known_axes.append(m.u_axes[item] if kind == "u" else struct_axes[item])
                flat_und = [g[0] for g in und_groups]
                bound = ibar(src, und_groups) + src.mi(flat_und, known_axes)
                rows.append(sys0.le_row(terms, bound))
        elif not in_dec and not out_dec:
            # the decoder resolves the sum codeword through the outer-code
            # bins; the inner/outer split is invisible to it
            u_und = [f for f in u_dec if f not in tilde_set]
            known_axes_base = [m.u_axes[f] for f in u_tilde]
            u_dec_axes = [m.u_axes[f] for f in u_dec]
            for locked in _subsets(u_und):
                known_axes = known_axes_base + [m.u_axes[f] for f in locked]
                und = [f for f in u_und if f not in set(locked)]
                terms = {"r'[out]": 1.0}
                for name, _ in rho_index["sum"]:
                    terms[name] = -1.0
                for f in und:
                    terms[_r_name(f)] = 1.0
                    for name, _ in rho_index[f.label()]:
                        terms[name] = -1.0
                groups = [(m.u_axes[f],) for f in und] + [(st.v_out,)]
                bound = (
                    ibar(src, groups)
                    + src.mi(u_dec_axes + [w_axis], known_axes)
                    - src.cmi((w_axis,), (st.v_in,), u_dec_axes)
                    + src.cmi((st.v_in,), (st.v_out,), u_dec_axes)
                )
                rows.append(sys0.le_row(terms, bound))

    return MdConstraintSystem(sys0.with_rows(rows), tuple(rates), tuple(r_vars + rho_vars))


def _general_w_source(m: MdModel, alpha: float, beta: float) -> tuple[str, DenseSource]:
    """Materialize W = alpha*V_in + beta*V_out on a dense-pmf copy."""
    if m.pmf is None:
        raise GridMismatchError("general (alpha, beta) requires a dense pmf")
    st = m.structured
    name = f"_w[{alpha!r},{beta!r}]"
    vin = m.pmf.axis(st.v_in).values()
    vout = m.pmf.axis(st.v_out).values()
    vals = sorted({float(alpha * a + beta * b) for a in vin for b in vout})
    from contnet.pmf import Axis

    new = m.pmf.pushforward(
        (st.v_in, st.v_out), lambda a, b: alpha * a + beta * b, Axis(name, tuple(vals))
    )
    return name, DenseSource(new)


def cov2_nonredundancy(m: MdModel, conditioning: Sequence[str] = ()) -> bool:
    """Whether the sum-codebook covering correction strictly tightens the
    plain pair covering: I(W; V_out | cond) - I(V_in; V_out | cond) < 0."""
    st = m.structured
    if st is None:
        raise ValueError("model has no structured triple")
    src = m.query()
    c = tuple(conditioning)
    return (
        src.cmi((st.w,), (st.v_out,), c) - src.cmi((st.v_in,), (st.v_out,), c)
    ) < 0.0


# ---------------------------------------------------------------------------
# feasibility / extremal-rate queries


def _eliminate_aux(sys: MdConstraintSystem, fixed: Mapping[str, float]) -> HalfspaceSystem:
    h = fix_variables(sys.system, dict(fixed))
    keep = [v for v in h.variables if v in sys.rate_names]
    return project_onto(h, keep)


def rate_feasible(sys: MdConstraintSystem, rates: Sequence[float]) -> bool:
    """Whether the rate tuple admits nonnegative codebook rates and splits."""
    if len(rates) != len(sys.rate_names):
        raise ValueError("rate tuple length mismatch")
    fixed = dict(zip(sys.rate_names, (float(r) for r in rates)))
    h = fix_variables(sys.system, fixed)
    return is_feasible(h)


def min_rate(
    sys: MdConstraintSystem,
    which: str,
    fixed: Mapping[str, float] | None = None,
    symmetric_with: str | None = None,
) -> float:
    """Smallest feasible value of one description rate.

    `fixed` pins other rates; `symmetric_with` forces equality with another
    rate before minimizing.
    """
    if which not in sys.rate_names:
        raise ValueError(f"unknown rate {which!r}")
    h = sys.system
    if symmetric_with is not None:
        tie = {which: 1.0, symmetric_with: -1.0}
        h = h.with_rows([h.le_row(tie, 0.0), h.ge_row(tie, 0.0)])
    if fixed:
        h = fix_variables(h, dict(fixed))
    h = project_onto(h, [which])
    return min_variable(h, which)
