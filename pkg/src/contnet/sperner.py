"""Antichain (Sperner family) enumeration and decoder set combinatorics.

A family is an antichain of nonempty subsets of {1, .., l}; each family
indexes one codebook of the multiple-descriptions scheme.  Families are
represented canonically as sorted tuples of sorted member tuples, ordered
first by member count then lexicographically, which fixes the evaluation
order of chained mutual-information sums.

The three-description codebook inventory used by the coding scheme has 17
families: the lone family {{1,2,3}} is dropped from the raw 18 antichains,
matching the published inventory and the decoder tables it comes with (a
codebook revealed only when every description is present adds nothing to
any of the partial decoders this scheme is scored on).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

Member = tuple[int, ...]
FamilyKey = tuple[Member, ...]


def _canon_member(member) -> Member:
    m = tuple(sorted(set(int(i) for i in member)))
    if not m:
        raise ValueError("family members must be nonempty subsets")
    return m


def _canon_family(members) -> FamilyKey:
    ms = sorted((_canon_member(m) for m in members), key=lambda t: (len(t), t))
    if not ms:
        raise ValueError("a Sperner family must be nonempty")
    if len(set(ms)) != len(ms):
        raise ValueError(f"duplicate members in family {ms}")
    return tuple(ms)


@dataclass(frozen=True, order=True)
class SpernerFamily:
    """An antichain of nonempty subsets of {1, .., l}."""

    members: FamilyKey

    def __init__(self, members):
        ms = _canon_family(members)
        for a, b in combinations(ms, 2):
            sa, sb = set(a), set(b)
            if sa <= sb or sb <= sa:
                raise ValueError(f"members {a} and {b} are nested; not an antichain")
        object.__setattr__(self, "members", ms)

    @property
    def ground(self) -> tuple[int, ...]:
        """Union of the members (the descriptions this codebook is binned on)."""
        out: set[int] = set()
        for m in self.members:
            out.update(m)
        return tuple(sorted(out))

    def decoded_at(self, decoder) -> bool:
        """Whether a decoder holding description set `decoder` recovers this
        codebook: some member must be a subset of the held descriptions."""
        held = set(decoder)
        return any(set(m) <= held for m in self.members)

    def label(self) -> str:
        return "+".join("".join(str(i) for i in m) for m in self.members)

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return "{" + ", ".join("{" + ",".join(map(str, m)) + "}" for m in self.members) + "}"


def all_antichains(ell: int) -> list[SpernerFamily]:
    """Every nonempty antichain of nonempty subsets of {1, .., ell}."""
    if ell not in (1, 2, 3):
        raise ValueError("description count limited to 1..3")
    ground = list(range(1, ell + 1))
    subsets = []
    for k in range(1, ell + 1):
        subsets.extend(combinations(ground, k))
    out = []
    for r in range(1, len(subsets) + 1):
        for cand in combinations(subsets, r):
            ok = True
            for a, b in combinations(cand, 2):
                if set(a) <= set(b) or set(b) <= set(a):
                    ok = False
                    break
            if ok:
                out.append(SpernerFamily(cand))
    return sorted(out, key=lambda f: (len(f.members), f.members))


def enumerate_sperner(ell: int) -> list[SpernerFamily]:
    """The canonical codebook-index inventory for `ell` descriptions.

    Counts: 1 (ell=1), 4 (ell=2), 17 (ell=3); see the module docstring for
    the three-description convention.
    """
    fams = all_antichains(ell)
    if ell == 3:
        full = SpernerFamily([tuple(range(1, ell + 1))])
        fams = [f for f in fams if f != full]
    return fams


def decoded_sets(decoder, ell: int) -> tuple[list[SpernerFamily], list[SpernerFamily]]:
    """(M_N, M~_N): families decoded at `decoder`, and those already decoded
    at some strict sub-decoder."""
    held = tuple(sorted(set(int(i) for i in decoder)))
    if not held or any(i < 1 or i > ell for i in held):
        raise ValueError(f"decoder {decoder} is not a nonempty subset of 1..{ell}")
    inventory = enumerate_sperner(ell)
    m_n = [f for f in inventory if f.decoded_at(held)]
    tilde: list[SpernerFamily] = []
    seen = set()
    for r in range(1, len(held)):
        for sub in combinations(held, r):
            for f in inventory:
                if f.decoded_at(sub) and f not in seen:
                    seen.add(f)
                    tilde.append(f)
    tilde.sort(key=lambda f: (len(f.members), f.members))
    return m_n, tilde


def all_decoders(ell: int) -> list[tuple[int, ...]]:
    ground = list(range(1, ell + 1))
    out = []
    for k in range(1, ell + 1):
        out.extend(combinations(ground, k))
    return out
