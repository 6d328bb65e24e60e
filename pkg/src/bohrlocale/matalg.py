"""Finite-dimensional *-subalgebras of M_n(C), handled numerically.

Matrices are plain complex ``numpy`` arrays.  A subalgebra is stored as a
Hilbert-Schmidt orthonormal basis, which makes orthogonal projection, and so
distance and inclusion tests, a single inner-product expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-9
GAP_TOL = 1e-6
MAX_RETRIES = 20


def as_cmatrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix has non-finite entries")
    return a


def adjoint(x: np.ndarray) -> np.ndarray:
    return x.conj().T


def hs_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def _orthonormal_rows(vecs: np.ndarray, tol: float) -> np.ndarray:
    if len(vecs) == 0:
        return vecs
    _, s, vh = np.linalg.svd(vecs, full_matrices=False)
    return vh[s > tol]


@dataclass(frozen=True, eq=False)
class StarSubalgebra:
    """A *-closed subalgebra of M_n(C) spanned by an orthonormal basis.

    ``unital`` records whether the identity matrix lies in the span and
    ``commutative`` whether the basis elements commute; both are measured,
    never declared.
    """

    n: int
    basis: np.ndarray
    unital: bool
    commutative: bool

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def _flat(self) -> np.ndarray:
        return self.basis.reshape(self.dim, self.n * self.n)

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        return self._flat.conj() @ np.asarray(x).reshape(-1)

    def project(self, x: np.ndarray) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((self.n, self.n), dtype=complex)
        return (self.coefficients(x) @ self._flat).reshape(self.n, self.n)

    def residual(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) - self.project(x)

    def conjugate(self, u: np.ndarray) -> "StarSubalgebra":
        """``u B u*`` for a unitary ``u``."""
        basis = np.array([u @ b @ adjoint(u) for b in self.basis]).reshape(self.dim, self.n, self.n)
        return StarSubalgebra(self.n, basis, self.unital, self.commutative)

    def to_dict(self) -> dict:
        return {"n": self.n, "dim": self.dim, "unital": self.unital, "commutative": self.commutative,
                "basis": [matrix_to_json(b) for b in self.basis]}

    def __repr__(self) -> str:
        return f"StarSubalgebra(n={self.n}, dim={self.dim}, unital={self.unital}, commutative={self.commutative})"


def _flags(n: int, basis: np.ndarray, tol: float) -> tuple[bool, bool]:
    b = StarSubalgebra(n, basis, False, False)
    unital = hs_norm(b.residual(np.eye(n))) <= 10 * tol
    return unital, _commutator_norm(basis) <= tol


def _commutator_norm(basis: np.ndarray) -> float:
    worst = 0.0
    for i, x in enumerate(basis):
        for y in basis[i + 1:]:
            worst = max(worst, hs_norm(x @ y - y @ x))
    return worst


def generate_subalgebra(gens: Sequence, unital: bool = False, tol: float = DEFAULT_TOL,
                        n: int | None = None) -> StarSubalgebra:
    """Smallest *-subalgebra containing ``gens`` (and the identity if ``unital``)."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    mats = [as_cmatrix(g) for g in gens]
    if not mats and n is None:
        raise ValueError("need generators or an explicit dimension")
    n = mats[0].shape[0] if mats else n
    if any(m.shape != (n, n) for m in mats):
        raise ValueError("generators have mismatched dimensions")
    seeds = mats + [adjoint(m) for m in mats] + ([np.eye(n, dtype=complex)] if unital else [])
    flat = _orthonormal_rows(np.array(seeds).reshape(len(seeds), n * n), tol) if seeds else np.zeros((0, n * n))
    for _ in range(n * n + 1):
        basis = flat.reshape(-1, n, n)
        new = [x @ y for x in basis for y in basis] + [adjoint(x) for x in basis]
        if not new:
            break
        cand = np.array(new).reshape(len(new), n * n)
        resid = cand - (cand @ flat.conj().T) @ flat
        extra = _orthonormal_rows(resid, tol)
        if len(extra) == 0:
            break
        flat = _orthonormal_rows(np.vstack([flat, extra]), tol)
    basis = flat.reshape(-1, n, n)
    has_unit, comm = _flags(n, basis, tol)
    return StarSubalgebra(n, basis, has_unit, comm)


def scalars(n: int) -> StarSubalgebra:
    return generate_subalgebra([np.eye(n)], unital=True)


def diagonal_algebra(n: int) -> StarSubalgebra:
    return generate_subalgebra([np.diag(np.arange(1, n + 1, dtype=float))], unital=True)


def full_algebra(n: int) -> StarSubalgebra:
    units = [np.eye(n)[:, [i]] @ np.eye(n)[[j], :] for i in range(n) for j in range(n)]
    return generate_subalgebra(units)


def is_commutative(b: StarSubalgebra, tol: float = DEFAULT_TOL) -> bool:
    return _commutator_norm(b.basis) <= tol


def contains(b1: StarSubalgebra, b2: StarSubalgebra, tol: float = DEFAULT_TOL) -> bool:
    """Is ``b1`` contained in ``b2``?"""
    if b1.n != b2.n:
        raise ValueError("subalgebras of different matrix algebras")
    return all(hs_norm(b2.residual(x)) <= tol for x in b1.basis)


def distance_to_subalgebra(x, b: StarSubalgebra) -> float:
    x = as_cmatrix(x)
    if x.shape != (b.n, b.n):
        raise ValueError("matrix and subalgebra dimensions differ")
    return hs_norm(b.residual(x))


def farthest_unit_element(b1: StarSubalgebra, b2: StarSubalgebra) -> tuple[np.ndarray, float]:
    """Unit vector of ``b1`` farthest from ``b2`` and its distance."""
    resid = np.array([b2.residual(x).reshape(-1) for x in b1.basis])
    _, s, vh = np.linalg.svd(resid.T, full_matrices=False)
    coeff = vh[0].conj()
    c = np.tensordot(coeff, b1.basis, axes=1)
    k = np.flatnonzero(np.abs(c.reshape(-1)) > 1e-12)
    if len(k):
        c = c * (abs(c.reshape(-1)[k[0]]) / c.reshape(-1)[k[0]])
    return c, float(s[0])


@dataclass(frozen=True, eq=False)
class Character:
    """``χ(x) = tr(p x) / tr(p)`` for a minimal projection ``p`` of a commutative algebra."""

    algebra: StarSubalgebra
    projection: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.projection / np.trace(self.projection).real

    def __call__(self, x) -> complex:
        return complex(np.trace(self.weights @ np.asarray(x)))

    def defect(self) -> float:
        """Worst violation of multiplicativity and *-compatibility over basis pairs."""
        worst = 0.0
        for x in self.algebra.basis:
            worst = max(worst, abs(self(adjoint(x)) - np.conj(self(x))))
            for y in self.algebra.basis:
                worst = max(worst, abs(self(x @ y) - self(x) * self(y)))
        return worst


def characters(b: StarSubalgebra, tol: float = DEFAULT_TOL, seed: int = 0) -> list[Character]:
    """One character per minimal projection, via a generic self-adjoint element."""
    if not is_commutative(b, tol):
        raise ValueError("characters are only defined here for commutative algebras")
    if b.dim == 0:
        return []
    rng = np.random.default_rng(seed)
    herm = [(x + adjoint(x)) / 2 for x in b.basis] + [(x - adjoint(x)) / 2j for x in b.basis]
    for _ in range(MAX_RETRIES):
        coeff = rng.standard_normal(len(herm))
        h = np.tensordot(coeff, np.array(herm), axes=1)
        h = (h + adjoint(h)) / 2
        vals, vecs = np.linalg.eigh(h)
        gaps = np.diff(vals)
        if np.any((gaps > tol) & (gaps < GAP_TOL)):
            continue
        groups = np.split(np.arange(b.n), np.flatnonzero(gaps >= GAP_TOL) + 1)
        out = []
        for g in groups:
            v = vecs[:, g]
            p = v @ adjoint(v)
            if hs_norm(b.residual(p)) <= 10 * tol * max(1.0, np.sqrt(len(g))):
                out.append(Character(b, p))
            elif abs(vals[g]).max() > GAP_TOL:
                break
        else:
            if len(out) == b.dim:
                return out
    raise RuntimeError("could not separate the characters of the algebra")


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def masa(u: np.ndarray) -> StarSubalgebra:
    """Maximal abelian subalgebra ``u · diagonals · u*``."""
    n = len(u)
    return generate_subalgebra([u @ np.diag(np.arange(1.0, n + 1)) @ adjoint(u)], unital=True)


def enumerate_m2_subalgebras(k: int, seed: int) -> list[StarSubalgebra]:
    """``C·1`` followed by ``k`` maximal abelian subalgebras from Haar-random bases."""
    if k < 0:
        raise ValueError("k must be non-negative")
    rng = np.random.default_rng(seed)
    return [scalars(2)] + [masa(haar_unitary(2, rng)) for _ in range(k)]


def random_commutative_subalgebra(n: int, rng: np.random.Generator, unital: bool | None = None) -> StarSubalgebra:
    """Span of orthogonal projections onto blocks of a random orthonormal basis.

    Blocks are a random partition of the basis vectors; in the non-unital
    case some vectors may be left out so the algebra has a proper unit.
    """
    unital = bool(rng.integers(2)) if unital is None else unital
    u = haar_unitary(n, rng)
    labels = rng.integers(0, n, size=n)
    if not unital:
        labels[rng.random(n) < 0.3] = -1
        if (labels < 0).all():
            labels[0] = 0
    values = {lab: float(i + 1) for i, lab in enumerate(sorted(set(labels.tolist()) - {-1}))}
    d = np.array([values.get(lab, 0.0) for lab in labels.tolist()])
    return generate_subalgebra([u @ np.diag(d) @ adjoint(u)], unital=unital)


def matrix_to_json(x: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(x, dtype=complex)]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrices are serialized as rows of [re, im] pairs")
    return as_cmatrix(arr[..., 0] + 1j * arr[..., 1])
