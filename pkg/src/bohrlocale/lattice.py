"""Finite posets, finite lattices and the maps between them.

Subsets of a finite poset are passed around as Python ints used as bitsets:
bit ``i`` is set when element ``i`` belongs to the subset.  A finite poset is
also a finite locale (its opens are the up-sets, the Alexandrov topology), so
`upsets` is the frame of opens and `frame_of_locale_map` is the inverse-image
frame homomorphism of a monotone map of points.
"""

from __future__ import annotations

from functools import cached_property, lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import OrderError

ISO_SEARCH_LIMIT = 10


def bits(mask: int) -> list[int]:
    """Indices of the set bits of ``mask``, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _check_partial_order(leq: np.ndarray) -> None:
    n = len(leq)
    if n == 0:
        return
    if not leq.diagonal().all():
        raise OrderError("relation is not reflexive")
    both = leq & leq.T
    if (both & ~np.eye(n, dtype=bool)).any():
        i, j = np.argwhere(both & ~np.eye(n, dtype=bool))[0]
        raise OrderError(f"antisymmetry fails for elements {i} and {j}")
    composed = (leq.astype(np.int64) @ leq.astype(np.int64)) > 0
    if (composed & ~leq).any():
        raise OrderError("relation is not transitive")


def subset_label(elements: Sequence[str], mask: int) -> str:
    return "{" + ",".join(elements[i] for i in bits(mask)) + "}"


class FinPoset:
    """Immutable finite partial order on labelled elements ``0..n-1``.

    ``leq[i, j]`` is true iff element ``i`` is below element ``j``.  Posets of
    subsets (``from_sets``) keep the subsets as bitsets and only build the
    dense order matrix when asked for it, so very large set families can be
    indexed without paying for ``n**2`` storage.
    """

    def __init__(self, elements: Sequence, leq, *, check: bool = True):
        elements = tuple(str(e) for e in elements)
        leq = np.array(leq, dtype=bool).reshape(len(elements), len(elements))
        if len(set(elements)) != len(elements):
            raise OrderError("element labels must be distinct")
        if check:
            _check_partial_order(leq)
        leq.setflags(write=False)
        self.n = len(elements)
        self._elements = elements
        self._leq = leq
        self.sets: tuple[int, ...] | None = None
        self._label_fn = None

    @classmethod
    def from_sets(cls, sets: Sequence[int], label: Callable[[int], str] | None = None) -> "FinPoset":
        """Poset of distinct bitsets ordered by inclusion."""
        sets = tuple(int(s) for s in sets)
        if len(set(sets)) != len(sets):
            raise OrderError("set family contains duplicates")
        obj = cls.__new__(cls)
        obj.n = len(sets)
        obj.sets = sets
        obj._elements = None
        obj._leq = None
        obj._label_fn = label or (lambda m: "{" + ",".join(map(str, bits(m))) + "}")
        return obj

    @classmethod
    def from_covers(cls, elements: Sequence, pairs: Iterable[tuple]) -> "FinPoset":
        """Reflexive-transitive closure of the given ``(lower, upper)`` label pairs."""
        elements = tuple(str(e) for e in elements)
        idx = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        leq = np.eye(n, dtype=bool)
        for a, b in pairs:
            leq[idx[str(a)], idx[str(b)]] = True
        for k in range(n):
            leq |= leq[:, k : k + 1] & leq[k : k + 1, :]
        return cls(elements, leq)

    @classmethod
    def chain(cls, n: int, prefix: str = "c") -> "FinPoset":
        return cls([f"{prefix}{i}" for i in range(n)], np.triu(np.ones((n, n), dtype=bool)))

    @classmethod
    def antichain(cls, n: int, prefix: str = "x") -> "FinPoset":
        return cls([f"{prefix}{i}" for i in range(n)], np.eye(n, dtype=bool))

    # -- basic access -----------------------------------------------------

    @property
    def elements(self) -> tuple[str, ...]:
        if self._elements is None:
            self._elements = tuple(self._label_fn(s) for s in self.sets)
        return self._elements

    @property
    def leq(self) -> np.ndarray:
        if self._leq is None:
            s = self.sets
            leq = np.array([[(a & ~b) == 0 for b in s] for a in s], dtype=bool).reshape(self.n, self.n)
            leq.setflags(write=False)
            self._leq = leq
        return self._leq

    def le(self, i: int, j: int) -> bool:
        if self.sets is not None:
            return (self.sets[i] & ~self.sets[j]) == 0
        return bool(self._leq[i, j])

    @cached_property
    def _index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.elements)}

    def index(self, label: str) -> int:
        return self._index[label]

    @cached_property
    def _set_index(self) -> dict[int, int]:
        return {s: i for i, s in enumerate(self.sets)}

    def index_of_set(self, mask: int) -> int:
        """Position of the bitset ``mask`` in a set-family poset."""
        return self._set_index[mask]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        if self.n > 12:
            return f"FinPoset(n={self.n})"
        return f"FinPoset({list(self.elements)}, covers={self.cover_labels()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinPoset):
            return NotImplemented
        if self is other:
            return True
        if self.n != other.n or self.elements != other.elements:
            return False
        if self.sets is not None and other.sets is not None:
            return self.sets == other.sets
        return bool(np.array_equal(self.leq, other.leq))

    def __hash__(self) -> int:
        return hash((self.n, self.elements))

    # -- derived structure --------------------------------------------------

    @cached_property
    def up_masks(self) -> tuple[int, ...]:
        """``up_masks[i]`` is the principal up-set of ``i`` as a bitset."""
        return tuple(mask_of(np.flatnonzero(row)) for row in self.leq)

    @cached_property
    def down_masks(self) -> tuple[int, ...]:
        return tuple(mask_of(np.flatnonzero(col)) for col in self.leq.T)

    def covers(self) -> list[tuple[int, int]]:
        """Covering pairs ``(i, j)``: ``i < j`` with nothing in between."""
        lt = self.leq & ~np.eye(self.n, dtype=bool)
        between = (lt.astype(np.int64) @ lt.astype(np.int64)) > 0
        return [(int(i), int(j)) for i, j in np.argwhere(lt & ~between)]

    def cover_labels(self) -> list[tuple[str, str]]:
        e = self.elements
        return [(e[i], e[j]) for i, j in self.covers()]

    def linear_extension(self) -> list[int]:
        """Indices sorted so that every element follows everything below it."""
        counts = self.leq.sum(axis=0)
        return sorted(range(self.n), key=lambda i: (int(counts[i]), i))

    def dual(self) -> "FinPoset":
        return FinPoset(self.elements, self.leq.T, check=False)

    def product(self, other: "FinPoset") -> "FinPoset":
        """Componentwise order; the pair ``(i, j)`` sits at index ``i * other.n + j``."""
        cache = self.__dict__.setdefault("_products", {})
        key = id(other)
        if key not in cache or cache[key][0] is not other:
            cache[key] = (other, self._product(other))
        return cache[key][1]

    def _product(self, other: "FinPoset") -> "FinPoset":
        labels = [f"({a},{b})" for a in self.elements for b in other.elements]
        leq = np.einsum("ik,jl->ijkl", self.leq, other.leq).reshape(self.n * other.n, self.n * other.n)
        return FinPoset(labels, leq, check=False)

    def restrict(self, indices: Sequence[int]) -> "FinPoset":
        indices = list(indices)
        sub = self.leq[np.ix_(indices, indices)]
        return FinPoset([self.elements[i] for i in indices], sub, check=False)

    def is_downset(self, mask: int) -> bool:
        return all((self.down_masks[i] & ~mask) == 0 for i in bits(mask))

    def is_upset(self, mask: int) -> bool:
        return all((self.up_masks[i] & ~mask) == 0 for i in bits(mask))

    def down_closure(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.down_masks[i]
        return out

    def up_closure(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.up_masks[i]
        return out

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def downset_masks(self) -> list[int]:
        """All down-closed subsets, sorted by size then bitset value."""
        strict_below = [d & ~(1 << i) for i, d in enumerate(self.down_masks)]
        found = [0]
        for i in self.linear_extension():
            bit = 1 << i
            found += [m | bit for m in found if (strict_below[i] & ~m) == 0]
        return sorted(found, key=lambda m: (m.bit_count(), m))

    def upset_masks(self) -> list[int]:
        full = self.full_mask
        return sorted((full & ~m for m in self.downset_masks()), key=lambda m: (m.bit_count(), m))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {"elements": list(self.elements), "leq": self.leq.astype(int).tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "FinPoset":
        return cls(data["elements"], np.array(data["leq"], dtype=bool).reshape(len(data["elements"]), -1))

    def to_dot(self, name: str = "poset") -> str:
        """Hasse diagram in DOT; nodes and edges sorted by label."""
        lines = [f"digraph {name} {{", "  rankdir=BT;"]
        for label in sorted(self.elements):
            lines.append(f'  "{label}";')
        for a, b in sorted(self.cover_labels()):
            lines.append(f'  "{a}" -> "{b}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _least_bounds(leq: np.ndarray) -> np.ndarray:
    """Table of least upper bounds, ``-1`` where none exists."""
    n = len(leq)
    up_count = leq.sum(axis=1)
    table = np.full((n, n), -1, dtype=np.int64)
    for i in range(n):
        ub = leq[i][None, :] & leq
        cnt = ub.sum(axis=1)
        cand = ub & (up_count[None, :] == cnt[:, None])
        table[i] = np.where(cand.any(axis=1), cand.argmax(axis=1), -1)
    return table


class FinLattice:
    """A finite lattice: carrier poset plus join and meet tables.

    Every finite lattice has all joins, so it is also a sup-lattice.  With
    ``frame=True`` the lattice is certified distributive, which for finite
    lattices is the frame condition.
    """

    def __init__(self, carrier: FinPoset, join, meet, *, frame: bool = False, check: bool = True):
        if carrier.n == 0:
            raise OrderError("a lattice has at least one element")
        self.carrier = carrier
        self.join = np.asarray(join, dtype=np.int64)
        self.meet = np.asarray(meet, dtype=np.int64)
        self.join.setflags(write=False)
        self.meet.setflags(write=False)
        n = carrier.n
        self.bottom = self._extreme(lowest=True)
        self.top = self._extreme(lowest=False)
        if check:
            lub = _least_bounds(carrier.leq)
            glb = _least_bounds(carrier.leq.T)
            if (lub < 0).any() or (glb < 0).any():
                raise OrderError("carrier is not a lattice")
            if not (np.array_equal(lub, self.join) and np.array_equal(glb, self.meet)):
                raise OrderError("join/meet tables disagree with the order")
        self.frame = frame
        if frame and check and not self.is_distributive():
            raise OrderError("lattice flagged as a frame is not distributive")
        assert self.join.shape == (n, n)

    def _extreme(self, lowest: bool) -> int:
        n = self.carrier.n
        acc = 0
        for i in range(1, n):
            acc = int(self.meet[acc, i] if lowest else self.join[acc, i])
        return acc

    @classmethod
    def from_poset(cls, carrier: FinPoset, *, frame: bool = False) -> "FinLattice":
        if carrier.n == 0:
            raise OrderError("a lattice has at least one element")
        lub = _least_bounds(carrier.leq)
        glb = _least_bounds(carrier.leq.T)
        if (lub < 0).any() or (glb < 0).any():
            raise OrderError("carrier is not a lattice")
        lat = cls(carrier, lub, glb, check=False)
        if frame:
            if not lat.is_distributive():
                raise OrderError("lattice is not distributive")
            lat.frame = True
        return lat

    @property
    def n(self) -> int:
        return self.carrier.n

    @property
    def elements(self) -> tuple[str, ...]:
        return self.carrier.elements

    @property
    def sets(self) -> tuple[int, ...] | None:
        return self.carrier.sets

    def le(self, i: int, j: int) -> bool:
        return self.carrier.le(i, j)

    def index(self, label: str) -> int:
        return self.carrier.index(label)

    def join_all(self, items: Iterable[int]) -> int:
        acc = self.bottom
        for x in items:
            acc = int(self.join[acc, x])
        return acc

    def meet_all(self, items: Iterable[int]) -> int:
        acc = self.top
        for x in items:
            acc = int(self.meet[acc, x])
        return acc

    def is_distributive(self) -> bool:
        j, m = self.join, self.meet
        a = np.arange(self.n)
        lhs = m[a[:, None, None], j[None, :, :]]
        rhs = j[m[:, :, None], m[:, None, :]]
        return bool(np.array_equal(lhs, rhs))

    def lower_covers(self, i: int) -> list[int]:
        below = [k for k in range(self.n) if k != i and self.le(k, i)]
        return [k for k in below if not any(k != k2 and self.le(k, k2) for k2 in below)]

    def join_irreducibles(self) -> list[int]:
        """Non-bottom elements with exactly one lower cover."""
        return [i for i in range(self.n) if i != self.bottom and len(self.lower_covers(i)) == 1]

    def meet_irreducibles(self) -> list[int]:
        dual = FinLattice(self.carrier.dual(), self.meet, self.join, check=False)
        return dual.join_irreducibles()

    def __repr__(self) -> str:
        return f"FinLattice(n={self.n}, frame={self.frame})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinLattice):
            return NotImplemented
        return self is other or (
            self.carrier == other.carrier
            and np.array_equal(self.join, other.join)
            and np.array_equal(self.meet, other.meet)
        )

    def __hash__(self) -> int:
        return hash((self.carrier, self.join.tobytes()))


class LatticeMap:
    """A table-defined map between finite lattices, tagged ``"sup"`` or ``"frame"``.

    The tag is a claim; `check_kind` verifies it.
    """

    KINDS = ("sup", "frame")

    def __init__(self, source: FinLattice, target: FinLattice, table: Sequence[int], kind: str = "sup"):
        if kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}")
        table = tuple(int(x) for x in table)
        if len(table) != source.n or any(not 0 <= x < target.n for x in table):
            raise ValueError("table does not map source elements into target")
        self.source = source
        self.target = target
        self.table = table
        self.kind = kind

    def __call__(self, i: int) -> int:
        return self.table[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeMap):
            return NotImplemented
        return (self.source, self.target, self.table) == (other.source, other.target, other.table)

    def __hash__(self) -> int:
        return hash(self.table)

    def __repr__(self) -> str:
        return f"LatticeMap({self.kind}, {self.source.n}->{self.target.n})"

    def compose(self, first: "LatticeMap") -> "LatticeMap":
        """``self`` after ``first``."""
        kind = "frame" if self.kind == first.kind == "frame" else "sup"
        return LatticeMap(first.source, self.target, [self.table[x] for x in first.table], kind)

    @classmethod
    def identity(cls, lat: FinLattice, kind: str = "frame") -> "LatticeMap":
        return cls(lat, lat, range(lat.n), kind)


def is_monotone_table(source: FinPoset, target: FinPoset, table: Sequence[int]) -> bool:
    return all(target.le(table[i], table[j]) for i, j in source.covers())


def preserves_joins(f: LatticeMap) -> bool:
    """Bottom and binary joins preserved (hence every finite join)."""
    s, t = f.source, f.target
    tab = np.asarray(f.table)
    if tab[s.bottom] != t.bottom:
        return False
    return bool(np.array_equal(tab[s.join], t.join[tab[:, None], tab[None, :]]))


def preserves_meets(f: LatticeMap) -> bool:
    s, t = f.source, f.target
    tab = np.asarray(f.table)
    if tab[s.top] != t.top:
        return False
    return bool(np.array_equal(tab[s.meet], t.meet[tab[:, None], tab[None, :]]))


def check_kind(f: LatticeMap) -> bool:
    """Does ``f`` satisfy the laws of its declared kind?"""
    if not is_monotone_table(f.source.carrier, f.target.carrier, f.table):
        return False
    if not preserves_joins(f):
        return False
    return f.kind == "sup" or preserves_meets(f)


def is_surjective(f: LatticeMap) -> bool:
    return len(set(f.table)) == f.target.n


def is_isomorphism(f: LatticeMap) -> bool:
    """Bijective and order-reflecting as well as order-preserving."""
    if not is_surjective(f) or f.source.n != f.target.n:
        return False
    s, t = f.source.carrier, f.target.carrier
    tab = np.asarray(f.table)
    return bool(np.array_equal(s.leq, t.leq[np.ix_(tab, tab)]))


class MonotoneMap:
    """An order-preserving map between finite posets.

    Either a full ``table`` is given, or a function ``fn`` on indices; in the
    latter case the table is only materialized if someone asks for it, which
    keeps composites through very large posets cheap to evaluate pointwise.
    """

    def __init__(self, source: FinPoset, target: FinPoset, table: Sequence[int] | None = None,
                 *, fn: Callable[[int], int] | None = None, check: bool = True):
        self.source = source
        self.target = target
        if table is not None:
            table = tuple(int(x) for x in table)
            if len(table) != source.n or any(not 0 <= x < target.n for x in table):
                raise ValueError("table does not map source into target")
            if check and not is_monotone_table(source, target, table):
                raise OrderError("map is not order-preserving")
            self.__dict__["table"] = table
            self._fn = table.__getitem__
        elif fn is not None:
            self._fn = fn
        else:
            raise ValueError("need a table or a function")

    def __call__(self, i: int) -> int:
        return self._fn(i)

    @cached_property
    def table(self) -> tuple[int, ...]:
        return tuple(self._fn(i) for i in range(self.source.n))

    def compose(self, first: "MonotoneMap") -> "MonotoneMap":
        """``self`` after ``first``, evaluated lazily."""
        if "table" in first.__dict__ and "table" in self.__dict__:
            return MonotoneMap(first.source, self.target, [self.table[x] for x in first.table], check=False)
        return MonotoneMap(first.source, self.target, fn=lambda i: self._fn(first._fn(i)))

    @classmethod
    def identity(cls, p: FinPoset) -> "MonotoneMap":
        return cls(p, p, range(p.n), check=False)

    @classmethod
    def constant(cls, source: FinPoset, target: FinPoset, value: int) -> "MonotoneMap":
        return cls(source, target, [value] * source.n, check=False)

    def is_monotone(self) -> bool:
        return is_monotone_table(self.source, self.target, self.table)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonotoneMap):
            return NotImplemented
        return (self.source, self.target, self.table) == (other.source, other.target, other.table)

    def __hash__(self) -> int:
        return hash(self.table)

    def __repr__(self) -> str:
        return f"MonotoneMap({self.source.n}->{self.target.n})"


def _subset_lattice(p: FinPoset, masks: list[int], frame: bool) -> FinLattice:
    carrier = FinPoset.from_sets(masks, label=lambda m: subset_label(p.elements, m))
    idx = carrier._set_index
    join = [[idx[a | b] for b in masks] for a in masks]
    meet = [[idx[a & b] for b in masks] for a in masks]
    lat = FinLattice(carrier, join, meet, check=False)
    lat.frame = frame
    return lat


@lru_cache(maxsize=None)
def upsets(p: FinPoset) -> FinLattice:
    """Frame of opens of the finite locale ``p``: up-sets ordered by inclusion."""
    return _subset_lattice(p, p.upset_masks(), frame=True)


@lru_cache(maxsize=None)
def downsets(p: FinPoset) -> FinLattice:
    """Down-sets ordered by inclusion (the closed sets of the locale ``p``)."""
    return _subset_lattice(p, p.downset_masks(), frame=True)


def frame_of_locale_map(f: MonotoneMap) -> LatticeMap:
    """Inverse-image frame homomorphism ``upsets(target) -> upsets(source)``."""
    src, tgt = upsets(f.target), upsets(f.source)
    fibres = [0] * f.target.n
    for x, y in enumerate(f.table):
        fibres[y] |= 1 << x
    table = []
    for u in src.sets:
        pre = 0
        for y in bits(u):
            pre |= fibres[y]
        table.append(tgt.carrier.index_of_set(pre))
    return LatticeMap(src, tgt, table, kind="frame")


def find_isomorphism(a: FinPoset, b: FinPoset) -> tuple[int, ...] | None:
    """Order isomorphism ``a -> b`` by backtracking, for small carriers only."""
    if a.n != b.n:
        return None
    if a.n > ISO_SEARCH_LIMIT:
        raise ValueError(f"isomorphism search is limited to {ISO_SEARCH_LIMIT} elements")
    la, lb = a.leq, b.leq
    sig_a = [(int(la[i].sum()), int(la[:, i].sum())) for i in range(a.n)]
    sig_b = [(int(lb[i].sum()), int(lb[:, i].sum())) for i in range(b.n)]
    if sorted(sig_a) != sorted(sig_b):
        return None
    order = a.linear_extension()
    image = [-1] * a.n
    used = [False] * b.n

    def extend(k: int) -> bool:
        if k == a.n:
            return True
        i = order[k]
        for j in range(b.n):
            if used[j] or sig_b[j] != sig_a[i]:
                continue
            if all(la[i, x] == lb[j, image[x]] and la[x, i] == lb[image[x], j] for x in order[:k]):
                image[i], used[j] = j, True
                if extend(k + 1):
                    return True
                image[i], used[j] = -1, False
        return False

    return tuple(image) if extend(0) else None


def lattices_isomorphic(a: FinLattice, b: FinLattice) -> bool:
    return find_isomorphism(a.carrier, b.carrier) is not None


def iter_subsets(mask: int) -> Iterator[int]:
    """All sub-bitsets of ``mask`` including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask
