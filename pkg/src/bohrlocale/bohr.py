"""Sampled point-space of the Bohr locale of M_n(C) and its basic opens.

A point is a commutative *-subalgebra ``B``.  A basic open ``W_U`` is given by
an open ball ``U`` of the matrix algebra; ``B`` lies in ``W_U`` when ``B``
meets ``U``, i.e. when the centre of the ball is closer to ``B`` than the
radius.  The point set is always a finite sample; what is checked are the
relations between the ball topology and the inclusion order on that sample.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import FinPoset
from .matalg import (
    DEFAULT_TOL,
    Character,
    StarSubalgebra,
    as_cmatrix,
    characters,
    contains,
    distance_to_subalgebra,
    farthest_unit_element,
    is_commutative,
    matrix_from_json,
    matrix_to_json,
)


@dataclass(frozen=True, eq=False)
class BasicOpen:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_cmatrix(self.center))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def to_dict(self) -> dict:
        return {"center": matrix_to_json(self.center), "radius": float(self.radius)}

    @classmethod
    def from_dict(cls, data: dict) -> "BasicOpen":
        return cls(matrix_from_json(data["center"]), float(data["radius"]))


class BohrPointSet:
    """Distinct commutative subalgebras of one matrix algebra."""

    def __init__(self, points: Sequence[StarSubalgebra], tol: float = DEFAULT_TOL):
        if not points:
            raise ValueError("a point set needs at least one subalgebra")
        n = points[0].n
        kept: list[StarSubalgebra] = []
        for b in points:
            if b.n != n:
                raise ValueError("points live in different matrix algebras")
            if not is_commutative(b, tol):
                raise ValueError("points of the Bohr locale are commutative subalgebras")
            if not any(contains(b, c, tol) and contains(c, b, tol) for c in kept):
                kept.append(b)
        self.points = kept
        self.n = n
        self.tol = tol

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def inclusion(self) -> np.ndarray:
        """``out[i, j]`` iff point ``i`` is contained in point ``j``."""
        k = len(self.points)
        return np.array([[contains(a, b, self.tol) for b in self.points] for a in self.points]).reshape(k, k)


def discrete_poset(ps: BohrPointSet) -> FinPoset:
    """The sampled points under the inclusion order alone."""
    return FinPoset([f"B{i}" for i in range(len(ps))], ps.inclusion())


def in_basic_open(b: StarSubalgebra, u: BasicOpen, tol: float = DEFAULT_TOL) -> bool:
    """Does ``b`` meet the ball ``u``?"""
    return distance_to_subalgebra(u.center, b) < u.radius - tol


def specialization_leq(b1: StarSubalgebra, b2: StarSubalgebra,
                       tol: float = DEFAULT_TOL) -> tuple[bool, BasicOpen | None]:
    """Is ``b1`` below ``b2``?  If not, a basic open containing ``b1`` but not ``b2``."""
    if contains(b1, b2, tol):
        return True, None
    c, d = farthest_unit_element(b1, b2)
    return False, BasicOpen(c, d / 2)


def comparison_map_check(ps: BohrPointSet, opens: Sequence[BasicOpen], tol: float = DEFAULT_TOL) -> dict:
    """Every ``W_U`` must be up-closed for inclusion on the sample."""
    inc = ps.inclusion()
    violations = []
    for k, u in enumerate(opens):
        hit = [in_basic_open(b, u, tol) for b in ps]
        for i, j in zip(*np.nonzero(inc)):
            if hit[i] and not hit[j]:
                violations.append({"open": k, "smaller": int(i), "larger": int(j)})
    return {"points": len(ps), "opens": len(opens), "violations": violations}


def sigma_fiber(b: StarSubalgebra, tol: float = DEFAULT_TOL, seed: int = 0) -> list[tuple[StarSubalgebra, Character]]:
    """Fiber of the spectral bundle over ``b``: the pairs ``(b, χ)``."""
    return [(b, chi) for chi in characters(b, tol, seed)]


def incidence(ps: BohrPointSet, opens: Sequence[BasicOpen], tol: float = DEFAULT_TOL) -> np.ndarray:
    k = len(ps)
    return np.array([[in_basic_open(b, u, tol) for u in opens] for b in ps], dtype=bool).reshape(k, len(opens))


def basis_topology_report(ps: BohrPointSet, opens: Sequence[BasicOpen], tol: float = DEFAULT_TOL) -> dict:
    """Incidence of points and opens, the preorder it induces, and how that compares to inclusion."""
    inc = incidence(ps, opens, tol)
    # b1 ≼ b2 iff every listed open containing b1 contains b2
    derived = ~np.any(inc[:, None, :] & ~inc[None, :, :], axis=2)
    inclusion = ps.inclusion()
    mismatches = [(int(i), int(j)) for i, j in zip(*np.nonzero(derived != inclusion))]
    collapsed = [(int(i), int(j)) for i, j in zip(*np.nonzero(derived & derived.T)) if i < j]
    return {
        "points": len(ps),
        "opens": len(opens),
        "incidence": inc.astype(int).tolist(),
        "derived_preorder": derived.astype(int).tolist(),
        "inclusion": inclusion.astype(int).tolist(),
        "agrees_with_inclusion": not mismatches,
        "mismatches": mismatches,
        "t0": not collapsed,
    }


def certificate_opens(ps: BohrPointSet, tol: float = DEFAULT_TOL) -> list[BasicOpen]:
    """One separating open per non-included ordered pair of points."""
    out = []
    for a in ps:
        for b in ps:
            ok, cert = specialization_leq(a, b, tol)
            if not ok:
                out.append(cert)
    return out


def random_open(ps: BohrPointSet, rng: np.random.Generator, spread: float = 0.5) -> BasicOpen:
    """A ball centred near a random element of a random point."""
    b = ps.points[rng.integers(len(ps))]
    coeff = rng.standard_normal(b.dim) + 1j * rng.standard_normal(b.dim)
    centre = np.tensordot(coeff / np.linalg.norm(coeff), b.basis, axes=1)
    noise = rng.standard_normal((ps.n, ps.n)) + 1j * rng.standard_normal((ps.n, ps.n))
    centre = centre + spread * rng.random() * noise / np.linalg.norm(noise)
    return BasicOpen(centre, float(rng.uniform(0.05, 1.0)))


def incidence_csv(ps: BohrPointSet, opens: Sequence[BasicOpen], tol: float = DEFAULT_TOL) -> str:
    inc = incidence(ps, opens, tol)
    buf = io.StringIO()
    buf.write(",".join(["point"] + [f"U{k}" for k in range(len(opens))]) + "\n")
    for i, row in enumerate(inc):
        buf.write(",".join([f"B{i}"] + [str(int(v)) for v in row]) + "\n")
    return buf.getvalue()
