"""Exhaustive and random generation of small posets, lattices and maps.

These are the brute-force engines behind the verification suites, so they
deliberately avoid the constructions they are used to check.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .errors import OrderError
from .lattice import FinLattice, FinPoset, LatticeMap, preserves_joins, preserves_meets

CANONICAL_LIMIT = 7


def canonical_key(p: FinPoset) -> bytes:
    """Isomorphism invariant: lexicographically least relabelled order matrix."""
    if p.n > CANONICAL_LIMIT:
        raise ValueError(f"canonical forms are limited to {CANONICAL_LIMIT} elements")
    leq = p.leq
    best = None
    for perm in itertools.permutations(range(p.n)):
        # only linear extensions: keeps the matrix upper-triangular and cuts the search
        if any(leq[perm[j], perm[i]] for i in range(p.n) for j in range(i + 1, p.n)):
            continue
        key = leq[np.ix_(perm, perm)].tobytes()
        if best is None or key < best:
            best = key
    return best if best is not None else b""


@lru_cache(maxsize=None)
def posets_up_to_iso(n: int) -> tuple[FinPoset, ...]:
    """One representative per isomorphism class of ``n``-element posets."""
    labels = [f"p{i}" for i in range(n)]
    if n == 0:
        return (FinPoset([], np.zeros((0, 0), dtype=bool)),)
    seen: dict[bytes, FinPoset] = {}
    for base in posets_up_to_iso(n - 1):
        for below in base.downset_masks():
            leq = np.zeros((n, n), dtype=bool)
            leq[: n - 1, : n - 1] = base.leq
            leq[n - 1, n - 1] = True
            for i in range(n - 1):
                leq[i, n - 1] = bool(below >> i & 1)
            p = FinPoset(labels, leq, check=False)
            seen.setdefault(canonical_key(p), p)
    return tuple(seen[k] for k in sorted(seen))


@lru_cache(maxsize=None)
def lattices_up_to_iso(n: int) -> tuple[FinLattice, ...]:
    out = []
    for p in posets_up_to_iso(n):
        try:
            out.append(FinLattice.from_poset(p))
        except OrderError:
            continue
    return tuple(out)


def random_poset(n: int, rng: np.random.Generator, density: float | None = None) -> FinPoset:
    """Random order: transitive closure of a random DAG under a random labelling."""
    density = rng.uniform(0.1, 0.7) if density is None else density
    rel = np.triu(rng.random((n, n)) < density, k=1) | np.eye(n, dtype=bool)
    for k in range(n):
        rel |= rel[:, k : k + 1] & rel[k : k + 1, :]
    perm = rng.permutation(n)
    return FinPoset([f"p{i}" for i in range(n)], rel[np.ix_(perm, perm)], check=False)


def _search(source: FinPoset, target: FinPoset, fixed: dict[int, int],
            forced: Callable[[int, list[int]], int | None]) -> Iterator[list[int]]:
    """Backtracking over monotone maps; ``forced`` may pin a value from earlier ones."""
    order = source.linear_extension()
    image = [-1] * source.n

    def rec(k: int) -> Iterator[list[int]]:
        if k == len(order):
            yield list(image)
            return
        x = order[k]
        pinned = fixed.get(x)
        if pinned is None:
            pinned = forced(x, image)
        candidates = range(target.n) if pinned is None else (pinned,)
        for y in candidates:
            if all(target.le(image[w], y) for w in order[:k] if source.le(w, x)):
                image[x] = y
                yield from rec(k + 1)
        image[x] = -1

    yield from rec(0)


def monotone_maps(source: FinPoset, target: FinPoset) -> Iterator[tuple[int, ...]]:
    for table in _search(source, target, {}, lambda x, img: None):
        yield tuple(table)


def _join_forcing(s: FinLattice, t: FinLattice) -> Callable[[int, list[int]], int | None]:
    """A join of two strictly smaller elements has its image determined by theirs."""
    split = {}
    for a in range(s.n):
        for b in range(a + 1, s.n):
            j = int(s.join[a, b])
            if j not in (a, b):
                split.setdefault(j, (a, b))

    def forced(x: int, image: list[int]) -> int | None:
        if x in split:
            a, b = split[x]
            return int(t.join[image[a], image[b]])
        return None

    return forced


def sup_maps(s: FinLattice, t: FinLattice) -> Iterator[LatticeMap]:
    """All maps preserving every join (bottom and binary joins), by search."""
    for table in _search(s.carrier, t.carrier, {s.bottom: t.bottom}, _join_forcing(s, t)):
        f = LatticeMap(s, t, table, "sup")
        if preserves_joins(f):
            yield f


def frame_maps(s: FinLattice, t: FinLattice) -> Iterator[LatticeMap]:
    """All maps preserving finite meets and all joins, by search."""
    fixed = {s.bottom: t.bottom, s.top: t.top}
    if s.bottom == s.top and t.bottom != t.top:
        return
    for table in _search(s.carrier, t.carrier, fixed, _join_forcing(s, t)):
        f = LatticeMap(s, t, table, "frame")
        if preserves_joins(f) and preserves_meets(f):
            yield f


def two() -> FinLattice:
    """The two-element frame of truth values."""
    return FinLattice.from_poset(FinPoset(["0", "1"], [[1, 1], [0, 1]]), frame=True)
