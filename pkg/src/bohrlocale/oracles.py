"""Brute-force reference computations.

Each function here answers a question by direct enumeration over the raw
definitions, without going through the constructions it is used to check.
"""

from __future__ import annotations

import numpy as np

from .classifier import FinModelAlgebra
from .enumeration import sup_maps, two
from .lattice import FinLattice, FinPoset
from .matalg import StarSubalgebra


def downsets_by_scan(p: FinPoset) -> list[int]:
    """Every subset of ``p`` tested for down-closure against the order matrix."""
    leq = p.leq
    out = []
    for s in range(1 << p.n):
        members = [i for i in range(p.n) if s >> i & 1]
        if all(s >> j & 1 for i in members for j in range(p.n) if leq[j, i]):
            out.append(s)
    return out


def truth_maps(frame: FinLattice) -> set[tuple[int, ...]]:
    """All join-preserving maps ``frame -> {0, 1}`` as truth tables."""
    return {f.table for f in sup_maps(frame, two())}


def principal_truth_map(s: FinLattice, a: int) -> tuple[int, ...]:
    """``s' ↦ [s' ≰ a]``."""
    return tuple(int(not s.le(x, a)) for x in range(s.n))


def closed_subsets(m: FinModelAlgebra, unital: bool) -> list[int]:
    """Subsets closed under every operation, commutative, and with the unit if asked."""
    n = m.n
    out = []
    for s in range(1 << n):
        el = [x for x in range(n) if s >> x & 1]
        inside = lambda v: bool(s >> v & 1)
        ok = all(inside(m.star[x]) for x in el)
        ok = ok and all(inside(t[x]) for _, t in m.extra_unaries for x in el)
        ok = ok and all(inside(m.add[x][y]) and inside(m.mul[x][y]) for x in el for y in el)
        ok = ok and all(m.mul[x][y] == m.mul[y][x] for x in el for y in el)
        if unital:
            ok = ok and inside(m.unit)
        if ok:
            out.append(s)
    return sorted(out, key=lambda s: (s.bit_count(), s))


def included_by_rank(b1: StarSubalgebra, b2: StarSubalgebra, tol: float) -> bool:
    """``b1 ⊆ b2`` iff adjoining ``b1``'s basis does not raise the rank of ``b2``'s."""
    k = b1.n * b1.n
    both = np.vstack([b2.basis.reshape(b2.dim, k), b1.basis.reshape(b1.dim, k)])
    if len(both) == 0:
        return True
    s = np.linalg.svd(both, compute_uv=False)
    return int((s > np.sqrt(tol)).sum()) == b2.dim
