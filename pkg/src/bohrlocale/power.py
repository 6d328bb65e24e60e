"""The lower power locale of a finite locale and its calculus.

Over a classical base a finite locale is its poset of points (specialization
order) and its opens are the up-sets.  Locally positive fiberwise closed
sublocales are then just the down-closed sets of points, positivity of an
open is non-emptiness, and fiberwise closure is down-closure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

from .errors import OrderError
from .lattice import (
    FinLattice,
    FinPoset,
    LatticeMap,
    MonotoneMap,
    bits,
    check_kind,
    is_isomorphism,
    subset_label,
    upsets,
)
from .presentation import FramePresentation, free_frame_on_suplattice

TABLE_LIMIT = 4096


@dataclass(frozen=True)
class FinLocale:
    """A finite locale, given by its points under the specialization order."""

    points: FinPoset

    @property
    def frame(self) -> FinLattice:
        return upsets(self.points)

    @property
    def n(self) -> int:
        return self.points.n

    def product(self, other: "FinLocale") -> "FinLocale":
        return FinLocale(self.points.product(other.points))

    @classmethod
    def discrete(cls, labels: Sequence[str]) -> "FinLocale":
        import numpy as np

        return cls(FinPoset(labels, np.eye(len(labels), dtype=bool)))


@dataclass(frozen=True)
class ClosedSublocale:
    ambient: FinLocale
    members: int

    def __post_init__(self):
        if not self.ambient.points.is_downset(self.members):
            raise OrderError("closed sublocales are down-closed sets of points")

    def labels(self) -> list[str]:
        return [self.ambient.points.elements[i] for i in bits(self.members)]


@dataclass(frozen=True)
class SupLatticePoint:
    """A join-preserving map from a frame to the truth values ``{0, 1}``."""

    frame: FinLattice
    truth: tuple[int, ...]

    def __post_init__(self):
        t = self.truth
        if len(t) != self.frame.n or any(v not in (0, 1) for v in t):
            raise ValueError("truth must assign 0 or 1 to every frame element")
        if t[self.frame.bottom] != 0:
            raise OrderError("the empty join must be false")
        j = self.frame.join
        for a in range(self.frame.n):
            for b in range(a + 1, self.frame.n):
                if t[j[a, b]] != (t[a] | t[b]):
                    raise OrderError("truth does not preserve binary joins")


class PointSublocale:
    """A sublocale of a finite locale, given by its set of points.

    Membership may be given as an explicit index set or as a predicate; the
    predicate form keeps sublocales of very large point sets cheap to query.
    """

    def __init__(self, ambient: FinPoset, members: Iterable[int] | None = None, *,
                 predicate: Callable[[int], bool] | None = None, name: str = ""):
        self.ambient = ambient
        self.name = name
        if members is not None:
            fs = frozenset(int(i) for i in members)
            if any(not 0 <= i < ambient.n for i in fs):
                raise ValueError("member outside the ambient locale")
            self.__dict__["members"] = fs
            self._pred = fs.__contains__
        elif predicate is not None:
            self._pred = predicate
        else:
            raise ValueError("need members or a predicate")

    def contains(self, i: int) -> bool:
        return bool(self._pred(i))

    __contains__ = contains

    @cached_property
    def members(self) -> frozenset[int]:
        return frozenset(i for i in range(self.ambient.n) if self._pred(i))

    def __len__(self) -> int:
        return len(self.members)

    def __and__(self, other: "PointSublocale") -> "PointSublocale":
        if other.ambient is not self.ambient and other.ambient != self.ambient:
            raise ValueError("sublocales of different locales")
        return PointSublocale(self.ambient, predicate=lambda i: self.contains(i) and other.contains(i))

    def labels(self) -> list[str]:
        return [self.ambient.elements[i] for i in sorted(self.members)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSublocale):
            return NotImplemented
        return self.ambient == other.ambient and self.members == other.members

    def __repr__(self) -> str:
        return f"PointSublocale({self.name or '?'}, {len(self.members)}/{self.ambient.n})"

    @classmethod
    def whole(cls, ambient: FinPoset) -> "PointSublocale":
        return cls(ambient, range(ambient.n))


@lru_cache(maxsize=None)
def lower_power(l: FinLocale) -> FinLocale:
    """Points are the down-closed subsets of ``l``'s points, ordered by inclusion.

    The frame of the result is `upsets` of that poset; `coherence_map`
    certifies it against the free frame on ``l.frame``.
    """
    elements = l.points.elements
    return FinLocale(FinPoset.from_sets(l.points.downset_masks(), label=lambda m: subset_label(elements, m)))


def coherence_map(l: FinLocale) -> LatticeMap:
    """Frame map ``Σ(O l) -> O(P_L l)`` sending ``◇U`` to ``{F : F ∩ U ≠ ∅}``."""
    sigma = free_frame_on_suplattice(l.frame)
    pl = lower_power(l)
    target = pl.frame
    values = []
    for u in l.frame.sets:
        hits = 0
        for k, f in enumerate(pl.points.sets):
            if f & u:
                hits |= 1 << k
        values.append(target.carrier.index_of_set(hits))
    return sigma.universal_map(target, values)


def certify_lower_power(l: FinLocale) -> bool:
    f = coherence_map(l)
    return check_kind(f) and is_isomorphism(f)


def sublocale_to_point(F: ClosedSublocale) -> SupLatticePoint:
    """``U ↦ [U ∩ F is non-empty]``."""
    frame = F.ambient.frame
    return SupLatticePoint(frame, tuple(int(bool(u & F.members)) for u in frame.sets))


def point_to_sublocale(p: SupLatticePoint, l: FinLocale) -> ClosedSublocale:
    """Points ``x`` such that every open containing ``x`` is true under ``p``."""
    if p.frame != l.frame:
        raise ValueError("point is not on this locale's frame")
    members = 0
    for x in range(l.n):
        if all(p.truth[k] for k, u in enumerate(p.frame.sets) if u >> x & 1):
            members |= 1 << x
    return ClosedSublocale(l, members)


def _image_mask(table: Sequence[int], mask: int) -> int:
    out = 0
    for x in bits(mask):
        out |= 1 << table[x]
    return out


def pl_map(f: MonotoneMap) -> MonotoneMap:
    """``P_L(f)``: a down-set ``F`` goes to the down-closure of ``f(F)``."""
    src = lower_power(FinLocale(f.source)).points
    tgt = lower_power(FinLocale(f.target)).points
    table = f.table
    close = f.target.down_closure

    def apply(i: int) -> int:
        return tgt.index_of_set(close(_image_mask(table, src.sets[i])))

    if src.n <= TABLE_LIMIT:
        return MonotoneMap(src, tgt, [apply(i) for i in range(src.n)], check=False)
    return MonotoneMap(src, tgt, fn=apply)


def pl_image(f: MonotoneMap) -> PointSublocale:
    """Image of ``P_L(f)`` inside ``P_L(target)``.

    ``G`` is in the image iff the closure of ``f`` applied to the largest
    candidate preimage ``f⁻¹(G)`` gives back ``G``; this avoids enumerating
    the source.
    """
    tgt = lower_power(FinLocale(f.target)).points
    table = f.table
    close = f.target.down_closure

    def member(k: int) -> bool:
        g = tgt.sets[k]
        pre = 0
        for x, y in enumerate(table):
            if g >> y & 1:
                pre |= 1 << x
        return close(_image_mask(table, pre)) == g

    return PointSublocale(tgt, predicate=member, name="image")


def pl_pairs(l: FinLocale) -> tuple[FinLocale, MonotoneMap]:
    """Locale of pairs ``F₁ ⊆ F₂`` of points of ``P_L(l)``, embedded in the product."""
    pl = lower_power(l).points
    prod = pl.product(pl)
    idx = [i * pl.n + j for i in range(pl.n) for j in range(pl.n) if pl.le(i, j)]
    pairs = prod.restrict(idx)
    return FinLocale(pairs), MonotoneMap(pairs, prod, idx, check=False)


def pairs_sublocale(l: FinLocale) -> PointSublocale:
    """The pairs locale as a sublocale of ``P_L(l) × P_L(l)`` (point-level image)."""
    _, emb = pl_pairs(l)
    return PointSublocale(emb.target, emb.table, name="pairs")


def pl_product_map(l: FinLocale, m: FinLocale) -> MonotoneMap:
    """``P_L(l) × P_L(m) -> P_L(l × m)``, ``(F, G) ↦ F × G``."""
    pl, pm = lower_power(l).points, lower_power(m).points
    prod_points = l.points.product(m.points)
    target = lower_power(FinLocale(prod_points)).points
    src = pl.product(pm)
    w = m.n

    def apply(i: int) -> int:
        f, g = pl.sets[i // pm.n], pm.sets[i % pm.n]
        out = 0
        for a in bits(f):
            out |= g << (a * w)
        return target.index_of_set(out)

    if src.n <= TABLE_LIMIT:
        return MonotoneMap(src, target, [apply(i) for i in range(src.n)], check=False)
    return MonotoneMap(src, target, fn=apply)


def diagonal(p: FinPoset) -> MonotoneMap:
    return MonotoneMap(p, p.product(p), [i * p.n + i for i in range(p.n)], check=False)


def pairing(f: MonotoneMap, g: MonotoneMap, product: FinPoset | None = None) -> MonotoneMap:
    """``x ↦ (f(x), g(x))`` into ``f.target × g.target``."""
    product = product if product is not None else f.target.product(g.target)
    w = g.target.n
    return MonotoneMap(f.source, product, fn=lambda i: f(i) * w + g(i))


def alexandrov_presentation(p: FinPoset) -> FramePresentation:
    """Generators ``↑x`` with the relations that make the presented frame ``upsets(p)``.

    ``↑x ≤ ↑y`` for ``y ≤ x``, ``↑x ∧ ↑y ≤ ⋁{↑z : z ≥ x, y}``, and the top is
    covered by all generators.
    """
    n = p.n
    rel = [(0, tuple(1 << x for x in range(n)))]
    for x in range(n):
        for y in range(n):
            if x != y and p.le(y, x):
                rel.append((1 << x, (1 << y,)))
            if x < y:
                rel.append(((1 << x) | (1 << y), tuple(1 << z for z in range(n) if p.le(x, z) and p.le(y, z))))
    return FramePresentation(tuple(f"↑{e}" for e in p.elements), tuple(rel))
