"""Frames presented by generators and covering relations.

A formal meet of generators is a bitset over the generator indices (the empty
meet is the top).  The meet base is the whole powerset, ordered by reverse
inclusion.  A relation ``(l, R)`` reads "``l`` is covered by the join of the
members of ``R``"; it is applied meet-stably, i.e. as ``l ∧ c ◁ {r ∧ c}`` for
every formal meet ``c``.  The presented frame is the lattice of C-ideals:
down-closed subsets of the meet base that contain ``l ∧ c`` whenever they
contain every ``r ∧ c``.

C-ideals are bitsets over the meet base, so a relation instance for *all*
``c`` at once is a handful of shifts on one big integer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from .errors import ResourceError
from .lattice import FinLattice, FinPoset, LatticeMap, bits, check_kind, iter_subsets, mask_of

DEFAULT_MAX_IDEALS = 2**20
MAX_GENERATORS = 22


def max_ideals_default() -> int:
    return int(os.environ.get("BOHRLOCALE_MAX_IDEALS", DEFAULT_MAX_IDEALS))


@dataclass(frozen=True)
class FramePresentation:
    """Generators plus relations ``(formal meet, formal meets covering it)``."""

    generators: tuple[str, ...]
    relations: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(str(g) for g in self.generators))
        rel = tuple((int(l), tuple(int(r) for r in rs)) for l, rs in self.relations)
        object.__setattr__(self, "relations", rel)
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("generator labels must be distinct")
        limit = 1 << len(self.generators)
        for l, rs in rel:
            if not 0 <= l < limit or any(not 0 <= r < limit for r in rs):
                raise ValueError("relation refers to an undeclared generator")

    @classmethod
    def from_lists(cls, generators: Sequence[str], relations: Iterable) -> "FramePresentation":
        """Relations given as ``(left indices, [right index lists])``."""
        return cls(tuple(generators), tuple((mask_of(l), tuple(mask_of(r) for r in rs)) for l, rs in relations))

    @property
    def meet_base(self) -> list[tuple[int, ...]]:
        """Every formal meet, as a sorted tuple of generator indices."""
        return [tuple(bits(m)) for m in range(1 << len(self.generators))]

    def formal_label(self, m: int) -> str:
        if m == 0:
            return "1"
        return "∧".join(self.generators[i] for i in bits(m))

    def to_dict(self) -> dict:
        return {
            "generators": list(self.generators),
            "relations": [[bits(l), [bits(r) for r in rs]] for l, rs in self.relations],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FramePresentation":
        return cls.from_lists(data["generators"], data.get("relations", []))

    def coproduct(self, other: "FramePresentation") -> "FramePresentation":
        """Disjoint union of generators and relations: presents the tensor of the two frames."""
        k = len(self.generators)
        gens = tuple(f"{g}⊗1" for g in self.generators) + tuple(f"1⊗{g}" for g in other.generators)
        rel = self.relations + tuple((l << k, tuple(r << k for r in rs)) for l, rs in other.relations)
        return FramePresentation(gens, rel)


class _Coverage:
    """Meet-stable closure of down-sets of the formal-meet semilattice."""

    def __init__(self, p: FramePresentation):
        g = len(p.generators)
        if g > MAX_GENERATORS:
            raise ResourceError(f"{g} generators exceed the meet-base limit of {MAX_GENERATORS}")
        self.g = g
        self.size = 1 << g
        self.full = (1 << self.size) - 1
        # has_bit[b]: formal meets containing generator b
        self.has_bit = []
        for b in range(g):
            unit, length = ((1 << (1 << b)) - 1) << (1 << b), 1 << (b + 1)
            while length < self.size:
                unit |= unit << length
                length *= 2
            self.has_bit.append(unit & self.full)
        self.lacks_bit = [self.full & ~m for m in self.has_bit]
        self.rows = [(l, rs) for l, rs in dict.fromkeys(p.relations) if l not in rs]

    def principal(self, m: int) -> int:
        """Down-set generated by the formal meet ``m``: all refinements of ``m``."""
        out = self.full
        for b in bits(m):
            out &= self.has_bit[b]
        return out

    def _shift_to(self, ideal: int, r: int) -> int:
        # result[c] = ideal[c ∧ r]
        for b in bits(r):
            x = ideal & self.has_bit[b]
            ideal = x | (x >> (1 << b))
        return ideal

    def _spread(self, cond: int, l: int) -> int:
        # result = {c ∧ l : cond[c]}
        for b in bits(l):
            cond = (cond & self.has_bit[b]) | ((cond & self.lacks_bit[b]) << (1 << b))
        return cond

    def down(self, ideal: int) -> int:
        for b in range(self.g):
            ideal |= (ideal & self.lacks_bit[b]) << (1 << b)
        return ideal

    def close(self, ideal: int) -> int:
        ideal = self.down(ideal)
        while True:
            prev = ideal
            for l, rs in self.rows:
                cond = self.full
                for r in rs:
                    cond &= self._shift_to(ideal, r)
                    if not cond:
                        break
                if cond:
                    ideal |= self._spread(cond, l)
            ideal = self.down(ideal)
            if ideal == prev:
                return ideal


class PresentedFrame:
    """The finite frame of C-ideals of a presentation.

    ``frame.sets[e]`` is the C-ideal of element ``e``.  Elements are kept with
    their decomposition into join-irreducibles, each carrying a witness
    formal meet, which is what `extend` uses to evaluate frame maps.
    """

    def __init__(self, presentation: FramePresentation, frame: FinLattice, generator_images: Sequence[int],
                 irreducibles: Sequence[tuple[int, int]], irr_masks: Sequence[int], coverage: _Coverage):
        self.presentation = presentation
        self.frame = frame
        self.generator_images = tuple(generator_images)
        self.irreducibles = tuple(irreducibles)
        self.irr_masks = tuple(irr_masks)
        self._coverage = coverage

    @property
    def ideals(self) -> tuple[int, ...]:
        return self.frame.sets

    def gen_embedding(self, m: int | Iterable[int]) -> int:
        """Frame element of a formal meet (bitset or iterable of generator indices)."""
        if not isinstance(m, int):
            m = mask_of(m)
        return self.frame.meet_all(self.generator_images[b] for b in bits(m))

    def ideal_of(self, m: int) -> int:
        """C-ideal generated by a formal meet, by direct closure."""
        return self._coverage.close(self._coverage.principal(m))

    def close(self, ideal: int) -> int:
        return self._coverage.close(ideal)

    def extend(self, target: FinLattice, gen_values: Sequence[int]) -> tuple[int, ...]:
        """Table of the join- and meet-preserving extension of a generator assignment."""
        irr_values = [target.meet_all(gen_values[b] for b in bits(w)) for _, w in self.irreducibles]
        return tuple(target.join_all(irr_values[k] for k in bits(jm)) for jm in self.irr_masks)

    def respects_relations(self, target: FinLattice, gen_values: Sequence[int]) -> bool:
        """Does the assignment satisfy every relation in the (distributive) target?"""
        def val(m: int) -> int:
            return target.meet_all(gen_values[b] for b in bits(m))

        return all(target.le(val(l), target.join_all(val(r) for r in rs)) for l, rs in self.presentation.relations)

    def universal_map(self, target: FinLattice, gen_values: Sequence[int]) -> LatticeMap:
        if not target.frame:
            raise ValueError("target must be a frame")
        if not self.respects_relations(target, gen_values):
            raise ValueError("generator assignment violates the relations")
        return LatticeMap(self.frame, target, self.extend(target, gen_values), "frame")

    def __repr__(self) -> str:
        return f"PresentedFrame(generators={len(self.presentation.generators)}, elements={self.frame.n})"


def solve_presentation(p: FramePresentation, max_ideals: int | None = None) -> PresentedFrame:
    """Compute the frame of C-ideals of a finite presentation."""
    cap = max_ideals_default() if max_ideals is None else max_ideals
    cov = _Coverage(p)
    bottom = cov.close(0)
    gen_ideals = [cov.close(cov.principal(1 << b)) for b in range(cov.g)]

    # images of formal meets: intersections of generator ideals, with a witness meet each
    witness = {cov.full: 0}
    frontier = [cov.full]
    while frontier:
        nxt = []
        for k in frontier:
            for b, gi in enumerate(gen_ideals):
                k2 = k & gi
                if k2 not in witness:
                    witness[k2] = witness[k] | (1 << b)
                    nxt.append(k2)
        frontier = nxt
        if len(witness) > cap:
            raise ResourceError(f"more than {cap} distinct formal-meet images")

    # join-irreducibles: not the closure of what lies strictly below them
    images = sorted(witness, key=lambda k: (k.bit_count(), k))
    irreducibles = []
    for k in images:
        if k == bottom:
            continue
        below = 0
        for k2 in images:
            if k2 != k and (k2 & ~k) == 0:
                below |= k2
        if below != k and cov.close(below) != k:
            irreducibles.append(k)

    # Birkhoff: elements correspond to down-sets of the irreducibles
    irr_poset = FinPoset.from_sets(irreducibles)
    irr_masks = []
    strict_below = [irr_poset.down_masks[i] & ~(1 << i) for i in range(len(irreducibles))]
    found = [0]
    for i in irr_poset.linear_extension():
        found += [m | (1 << i) for m in found if (strict_below[i] & ~m) == 0]
        if len(found) > cap:
            raise ResourceError(f"presented frame exceeds {cap} elements")
    principal = {irr_poset.down_masks[i]: irreducibles[i] for i in range(len(irreducibles))}
    ideals = []
    for jm in found:
        if jm == 0:
            ideal = bottom
        elif jm in principal:
            ideal = principal[jm]
        else:
            u = 0
            for i in bits(jm):
                u |= irreducibles[i]
            ideal = cov.close(u)
        ideals.append(ideal)
        irr_masks.append(jm)
    if len(set(ideals)) != len(ideals):
        raise AssertionError("distinct down-sets of irreducibles gave equal C-ideals")

    order = sorted(range(len(ideals)), key=lambda e: (ideals[e].bit_count(), ideals[e]))
    ideals = [ideals[e] for e in order]
    irr_masks = [irr_masks[e] for e in order]

    def irr_label(i: int) -> str:
        return p.formal_label(witness[irreducibles[i]])

    labels = {}
    for ideal, jm in zip(ideals, irr_masks):
        maximal = [i for i in bits(jm) if not any(j != i and (strict_below[j] >> i) & 1 for j in bits(jm))]
        labels[ideal] = " ∨ ".join(irr_label(i) for i in maximal) if maximal else "0"
    carrier = FinPoset.from_sets(ideals, label=labels.__getitem__)
    pos = {jm: e for e, jm in enumerate(irr_masks)}
    join = [[pos[a | b] for b in irr_masks] for a in irr_masks]
    meet = [[pos[a & b] for b in irr_masks] for a in irr_masks]
    frame = FinLattice(carrier, join, meet, check=False)
    frame.frame = True

    index = carrier._set_index
    gen_images = [index[gi] for gi in gen_ideals]
    irr = [(index[k], witness[k]) for k in irreducibles]
    return PresentedFrame(p, frame, gen_images, irr, irr_masks, cov)


def suplattice_presentation(s: FinLattice, full_relations: bool = False) -> FramePresentation:
    """Generators ``◇a`` for ``a`` in ``s``; relations ``◇(⋁T) = ⋁◇t``.

    By default ``T`` ranges over the empty set and the two-element subsets,
    which generate every finite join; ``full_relations`` uses every subset.
    """
    gens = tuple(f"◇{e}" for e in s.elements)
    rows = [(1 << s.bottom, ())]
    subsets = (iter_subsets((1 << s.n) - 1) if full_relations
               else (mask_of(t) for t in _pairs(s.n)))
    for t in subsets:
        members = bits(t)
        if len(members) < 2:
            continue
        top = s.join_all(members)
        rows.append((1 << top, tuple(1 << a for a in members)))
        rows.extend((1 << a, (1 << top,)) for a in members)
    rows = [(l, rs) for l, rs in dict.fromkeys(rows) if l not in rs]
    return FramePresentation(gens, tuple(rows))


def _pairs(n: int):
    for a in range(n):
        for b in range(a + 1, n):
            yield (a, b)


def free_frame_on_suplattice(s: FinLattice, full_relations: bool = False) -> PresentedFrame:
    """The free frame on the sup-lattice ``s``."""
    return _free_frame(s, full_relations, max_ideals_default())


# keyed on the cap so a smaller cap is never bypassed by an earlier result
@lru_cache(maxsize=None)
def _free_frame(s: FinLattice, full_relations: bool, cap: int) -> PresentedFrame:
    return solve_presentation(suplattice_presentation(s, full_relations), cap)


def sigma_of_map(f: LatticeMap) -> LatticeMap:
    """Frame map between free frames induced by a join-preserving map: ``◇a ↦ ◇f(a)``."""
    if not check_kind(LatticeMap(f.source, f.target, f.table, "sup")):
        raise ValueError("sigma_of_map needs a join-preserving map")
    src = free_frame_on_suplattice(f.source)
    tgt = free_frame_on_suplattice(f.target)
    values = [tgt.generator_images[f.table[a]] for a in range(f.source.n)]
    return LatticeMap(src.frame, tgt.frame, src.extend(tgt.frame, values), "frame")
