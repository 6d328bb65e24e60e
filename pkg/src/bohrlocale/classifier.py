"""Sublocale calculus on finite locales and the classifier of commutative subalgebras.

`build_classifier` cuts the subalgebra classifier out of ``P_L(A)`` for a
finite model algebra ``A``, one algebraic axiom at a time:

* star-stability is the equalizer of the identity and ``P_L(star)``;
* stability under a binary operation is the pullback of the pairs locale
  along ``F ↦ (op(F × F), F)``; unary operations use ``F ↦ (u(F), F)``;
* commutativity is the pullback of ``P_L(C)`` along ``F ↦ F × F`` where
  ``C ⊆ A × A`` is the commuting pairs;
* the unit condition is the pullback of the pairs locale along
  ``F ↦ ({1}, F)``.

Every finite locale is spatial and so is each of its sublocales, so a
sublocale is faithfully a set of points and intersection is set intersection.
`enumerate_nuclei` and `induced_nucleus` are there to certify that claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import OrderError, ResourceError
from .lattice import FinLattice, FinPoset, MonotoneMap, bits
from .power import (
    FinLocale,
    PointSublocale,
    diagonal,
    lower_power,
    pairing,
    pairs_sublocale,
    pl_image,
    pl_map,
    pl_pairs,
    pl_product_map,
)

NUCLEI_FRAME_LIMIT = 12


@dataclass(frozen=True)
class FinModelAlgebra:
    """Finite carrier with operation tables standing in for a C*-locale.

    ``extra_unaries`` models scalar multiplication as a finite family of
    named unary operations.
    """

    carrier: FinLocale
    add: tuple[tuple[int, ...], ...]
    mul: tuple[tuple[int, ...], ...]
    star: tuple[int, ...]
    unit: int | None = None
    extra_unaries: tuple[tuple[str, tuple[int, ...]], ...] = field(default=())

    def __post_init__(self):
        n = self.carrier.n
        conv2 = lambda t: tuple(tuple(int(v) for v in row) for row in t)
        object.__setattr__(self, "add", conv2(self.add))
        object.__setattr__(self, "mul", conv2(self.mul))
        object.__setattr__(self, "star", tuple(int(v) for v in self.star))
        unaries = self.extra_unaries.items() if isinstance(self.extra_unaries, Mapping) else self.extra_unaries
        object.__setattr__(self, "extra_unaries", tuple((str(k), tuple(int(v) for v in t)) for k, t in unaries))
        for name in ("add", "mul"):
            t = getattr(self, name)
            if len(t) != n or any(len(r) != n for r in t) or any(not 0 <= v < n for r in t for v in r):
                raise ValueError(f"{name} must be an {n}x{n} table over the carrier")
        for name, t in (("star", self.star),) + self.extra_unaries:
            if len(t) != n or any(not 0 <= v < n for v in t):
                raise ValueError(f"{name} must be a length-{n} table over the carrier")
        if any(self.star[self.star[x]] != x for x in range(n)):
            raise ValueError("star must be an involution")
        le = self.carrier.points.le
        for x in range(n):
            for y in range(n):
                if not le(x, y):
                    continue
                if not le(self.star[x], self.star[y]):
                    raise OrderError("star is not monotone")
                if any(not le(t[x], t[y]) for _, t in self.extra_unaries):
                    raise OrderError("a unary operation is not monotone")
                for z in range(n):
                    for t in (self.add, self.mul):
                        if not (le(t[x][z], t[y][z]) and le(t[z][x], t[z][y])):
                            raise OrderError("a binary operation is not monotone")
        if self.unit is not None:
            u = self.unit
            if not 0 <= u < n or any(self.mul[u][x] != x or self.mul[x][u] != x for x in range(n)):
                raise ValueError("unit is not a two-sided identity for mul")

    @classmethod
    def discrete(cls, n: int, add, mul, star, unit=None, unaries=(), labels=None) -> "FinModelAlgebra":
        labels = labels or [f"a{i}" for i in range(n)]
        return cls(FinLocale.discrete(labels), add, mul, star, unit, unaries)

    @property
    def n(self) -> int:
        return self.carrier.n

    def binary_map(self, op: str) -> MonotoneMap:
        t = getattr(self, op)
        p = self.carrier.points
        return MonotoneMap(p.product(p), p, [t[x][y] for x in range(p.n) for y in range(p.n)], check=False)

    def unary_map(self, name: str) -> MonotoneMap:
        table = self.star if name == "star" else dict(self.extra_unaries)[name]
        return MonotoneMap(self.carrier.points, self.carrier.points, table, check=False)

    def to_dict(self) -> dict:
        d = self.carrier.points.to_dict()
        d.update(add=[list(r) for r in self.add], mul=[list(r) for r in self.mul], star=list(self.star),
                 unit=self.unit, unaries={k: list(v) for k, v in self.extra_unaries})
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "FinModelAlgebra":
        elements = data["elements"]
        leq = data.get("leq")
        points = FinPoset(elements, np.eye(len(elements), dtype=bool) if leq is None else leq)
        return cls(FinLocale(points), data["add"], data["mul"], data["star"], data.get("unit"),
                   tuple(data.get("unaries", {}).items()))


def equalizer(f: MonotoneMap, g: MonotoneMap) -> PointSublocale:
    """Largest sublocale of the source on which ``f`` and ``g`` agree."""
    if f.source != g.source or f.target != g.target:
        raise ValueError("equalizer needs parallel maps")
    return PointSublocale(f.source, [x for x in range(f.source.n) if f(x) == g(x)], name="equalizer")


def pullback_sublocale(s: PointSublocale, f: MonotoneMap) -> PointSublocale:
    """``f⁻¹(s)``: points of the source mapped into ``s``."""
    if s.ambient != f.target:
        raise ValueError("sublocale does not live on the map's target")
    return PointSublocale(f.source, [x for x in range(f.source.n) if s.contains(f(x))], name="pullback")


def stability_map_binary(m: FinModelAlgebra, op: str) -> MonotoneMap:
    """``P_L(A) -> P_L(A)``, ``F ↦ closure(op(F × F))``, built as a composite."""
    pl = lower_power(m.carrier).points
    to_square = pl_product_map(m.carrier, m.carrier).compose(diagonal(pl))
    return pl_map(m.binary_map(op)).compose(to_square)


def _stability_sublocale(m: FinModelAlgebra, image_map: MonotoneMap, name: str) -> PointSublocale:
    pl = lower_power(m.carrier).points
    pairs = pairs_sublocale(m.carrier)
    paired = pairing(image_map, MonotoneMap.identity(pl), product=pairs.ambient)
    out = pullback_sublocale(pairs, paired)
    out.name = name
    return out


def binary_stability_sublocale(m: FinModelAlgebra, op: str) -> PointSublocale:
    return _stability_sublocale(m, stability_map_binary(m, op), f"{op}-stable")


def unary_stability_sublocale(m: FinModelAlgebra, name: str) -> PointSublocale:
    return _stability_sublocale(m, pl_map(m.unary_map(name)), f"{name}-stable")


def star_sublocale(m: FinModelAlgebra) -> PointSublocale:
    pl = lower_power(m.carrier).points
    out = equalizer(MonotoneMap.identity(pl), pl_map(m.unary_map("star")))
    out.name = "star-stable"
    return out


def commuting_pairs(m: FinModelAlgebra) -> PointSublocale:
    """Pairs ``(x, y)`` with ``xy = yx``, as a closed sublocale of ``A × A``."""
    p = m.carrier.points
    square = p.product(p)
    members = [x * p.n + y for x in range(p.n) for y in range(p.n) if m.mul[x][y] == m.mul[y][x]]
    mask = sum(1 << k for k in members)
    if not square.is_downset(mask):
        raise OrderError("commuting pairs are not a closed sublocale of A x A")
    return PointSublocale(square, members, name="commuting-pairs")


def commutativity_sublocale(m: FinModelAlgebra) -> PointSublocale:
    """Pullback of ``P_L(C) ⊆ P_L(A × A)`` along ``F ↦ F × F``."""
    c = commuting_pairs(m)
    idx = sorted(c.members)
    inclusion = MonotoneMap(c.ambient.restrict(idx), c.ambient, idx, check=False)
    pl_c = pl_image(inclusion)
    pl = lower_power(m.carrier).points
    square = pl_product_map(m.carrier, m.carrier).compose(diagonal(pl))
    out = pullback_sublocale(pl_c, square)
    out.name = "commutative"
    return out


def unital_sublocale(m: FinModelAlgebra) -> PointSublocale:
    if m.unit is None:
        raise ValueError("model has no unit")
    pl = lower_power(m.carrier).points
    one = pl.index_of_set(m.carrier.points.down_masks[m.unit])
    pairs = pairs_sublocale(m.carrier)
    paired = pairing(MonotoneMap.constant(pl, pl, one), MonotoneMap.identity(pl), product=pairs.ambient)
    out = pullback_sublocale(pairs, paired)
    out.name = "unital"
    return out


@dataclass
class ClassifierResult:
    ambient: FinLocale
    pieces: dict[str, PointSublocale]
    intersection: PointSublocale

    def point_sets(self) -> list[int]:
        """Points of the intersection as bitsets over the model carrier."""
        sets = self.ambient.points.sets
        return sorted((sets[i] for i in self.intersection.members), key=lambda s: (s.bit_count(), s))

    def report(self) -> dict:
        return {
            "ambient_points": self.ambient.n,
            "pieces": {k: len(v) for k, v in self.pieces.items()},
            "points": [self.ambient.points.elements[i] for i in sorted(self.intersection.members)],
        }


def build_classifier(m: FinModelAlgebra, unital: bool = False, skip: Sequence[str] = ()) -> ClassifierResult:
    """Intersect all the axiom sublocales of ``P_L(A)``; ``skip`` drops named pieces."""
    builders = {"star-stable": lambda: star_sublocale(m),
                "add-stable": lambda: binary_stability_sublocale(m, "add"),
                "mul-stable": lambda: binary_stability_sublocale(m, "mul")}
    for name, _ in m.extra_unaries:
        builders[f"{name}-stable"] = lambda name=name: unary_stability_sublocale(m, name)
    builders["commutative"] = lambda: commutativity_sublocale(m)
    if unital:
        builders["unital"] = lambda: unital_sublocale(m)
    pl = lower_power(m.carrier)
    pieces = {k: b() for k, b in builders.items() if k not in skip}
    members = set(range(pl.n))
    for piece in pieces.values():
        members &= piece.members
    return ClassifierResult(pl, pieces, PointSublocale(pl.points, members, name="S(A)"))


class Nucleus:
    """Inflationary, idempotent, meet-preserving endomap of a finite frame."""

    def __init__(self, frame: FinLattice, table: Sequence[int], check: bool = True):
        self.frame = frame
        self.table = tuple(int(v) for v in table)
        if check and not self.is_valid():
            raise OrderError("table is not a nucleus")

    def is_valid(self) -> bool:
        f, j = self.frame, np.asarray(self.table)
        if len(j) != f.n:
            return False
        idx = np.arange(f.n)
        inflationary = all(f.le(int(a), int(b)) for a, b in zip(idx, j))
        idempotent = np.array_equal(j[j], j)
        meets = np.array_equal(j[f.meet], f.meet[j[:, None], j[None, :]])
        return bool(inflationary and idempotent and meets)

    def fixed_points(self) -> list[int]:
        return [a for a in range(self.frame.n) if self.table[a] == a]

    def __eq__(self, other) -> bool:
        return isinstance(other, Nucleus) and self.frame == other.frame and self.table == other.table

    def __hash__(self) -> int:
        return hash(self.table)

    def __repr__(self) -> str:
        return f"Nucleus({self.table})"


def enumerate_nuclei(frame: FinLattice, limit: int = NUCLEI_FRAME_LIMIT) -> list[Nucleus]:
    """Every nucleus on a small frame, by pruned exhaustive search."""
    if frame.n > limit:
        raise ResourceError(f"nucleus search is limited to frames of {limit} elements")
    order = frame.carrier.linear_extension()
    j = [-1] * frame.n
    out = []

    def rec(k: int) -> None:
        if k == frame.n:
            if all(j[j[a]] == j[a] for a in range(frame.n)):
                out.append(Nucleus(frame, j, check=False))
            return
        x = order[k]
        for y in range(frame.n):
            if not frame.le(x, y):
                continue
            ok = True
            for w in order[:k]:
                if frame.le(w, x) and not frame.le(j[w], y):
                    ok = False
                    break
                mw = int(frame.meet[x, w])
                if j[mw] != int(frame.meet[y, j[w]]):
                    ok = False
                    break
            if ok:
                j[x] = y
                rec(k + 1)
        j[x] = -1

    rec(0)
    return sorted(out, key=lambda n: n.table)


def induced_nucleus(l: FinLocale, points: int) -> Nucleus:
    """Nucleus of the sublocale on a set of points: ``U ↦ {x : ↑x ∩ S ⊆ U}``."""
    frame = l.frame
    up = l.points.up_masks
    table = []
    for u in frame.sets:
        v = 0
        for x in range(l.n):
            if (up[x] & points & ~u) == 0:
                v |= 1 << x
        table.append(frame.carrier.index_of_set(v))
    return Nucleus(frame, table)
