import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohrlocale.matalg import (
    DEFAULT_TOL,
    characters,
    contains,
    diagonal_algebra,
    distance_to_subalgebra,
    enumerate_m2_subalgebras,
    farthest_unit_element,
    full_algebra,
    generate_subalgebra,
    haar_unitary,
    is_commutative,
    masa,
    matrix_from_json,
    matrix_to_json,
    random_commutative_subalgebra,
    scalars,
)
from bohrlocale.oracles import included_by_rank

TOL = DEFAULT_TOL
E12 = np.array([[0, 1], [0, 0]])
seeds = st.integers(0, 2**32 - 1)


def closure_defect(b) -> float:
    """Largest residual of a product or adjoint of basis elements."""
    worst = 0.0
    for x in b.basis:
        worst = max(worst, np.linalg.norm(b.residual(x.conj().T)))
        for y in b.basis:
            worst = max(worst, np.linalg.norm(b.residual(x @ y)))
    return worst


# -- generation ------------------------------------------------------------------

def test_identity_generates_scalars():
    b = generate_subalgebra([np.eye(2)], unital=True)
    assert b.dim == 1 and b.unital and b.commutative


def test_projection_generates_diagonals():
    b = generate_subalgebra([np.diag([1, 0])], unital=True)
    assert b.dim == 2
    assert contains(b, diagonal_algebra(2)) and contains(diagonal_algebra(2), b)


def test_matrix_unit_generates_everything():
    b = generate_subalgebra([E12], unital=True)
    assert b.dim == 4
    assert not b.commutative


def test_non_unital_projection_algebra():
    b = generate_subalgebra([np.diag([1, 0])])
    assert b.dim == 1 and not b.unital


def test_bad_generators_rejected():
    with pytest.raises(ValueError):
        generate_subalgebra([np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        generate_subalgebra([np.full((2, 2), np.nan)])
    with pytest.raises(ValueError):
        generate_subalgebra([np.eye(2)], tol=0)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4))
def test_generation_idempotent_and_closed(seed, n):
    rng = np.random.default_rng(seed)
    gens = [rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.4) for _ in range(2)]
    b = generate_subalgebra(gens, unital=bool(rng.integers(2)))
    assert closure_defect(b) <= 10 * TOL
    again = generate_subalgebra(list(b.basis), unital=b.unital, n=n)
    assert again.dim == b.dim and contains(again, b) and contains(b, again)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 3))
def test_generation_monotone(seed, n):
    rng = np.random.default_rng(seed)
    gens = [rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.3) for _ in range(3)]
    small = generate_subalgebra(gens[:1], n=n)
    large = generate_subalgebra(gens, n=n)
    assert contains(small, large)
    assert included_by_rank(small, large, TOL)


# -- predicates -----------------------------------------------------------------

def test_commutativity_examples():
    assert is_commutative(diagonal_algebra(2))
    assert not is_commutative(full_algebra(2))
    u = haar_unitary(2, np.random.default_rng(0))
    assert is_commutative(diagonal_algebra(2).conjugate(u))


def test_containment_examples():
    d = diagonal_algebra(2)
    assert contains(scalars(2), d)
    assert contains(d, d)
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert not contains(d, masa(h))
    # the residual is bounded away from zero, not merely above tolerance
    assert distance_to_subalgebra(np.diag([1, -1]) / np.sqrt(2), masa(h)) > 0.5


def test_distance_examples():
    d = diagonal_algebra(2)
    assert distance_to_subalgebra(np.diag([3, 4]), d) <= TOL
    assert distance_to_subalgebra(E12, d) == pytest.approx(1.0, abs=10 * TOL)
    assert distance_to_subalgebra(np.diag([1, -1]), scalars(2)) == pytest.approx(np.sqrt(2), abs=10 * TOL)


def test_farthest_unit_element():
    c, dist = farthest_unit_element(diagonal_algebra(2), scalars(2))
    assert dist == pytest.approx(1.0, abs=10 * TOL)
    assert np.allclose(c, np.diag([1, -1]) / np.sqrt(2), atol=10 * TOL)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4))
def test_conjugation_equivariance(seed, n):
    rng = np.random.default_rng(seed)
    b = generate_subalgebra([rng.standard_normal((n, n))], n=n) if rng.random() < 0.3 \
        else random_commutative_subalgebra(n, rng)
    u = haar_unitary(n, rng)
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    ub = b.conjugate(u)
    assert is_commutative(ub) == is_commutative(b)
    assert distance_to_subalgebra(u @ x @ u.conj().T, ub) == pytest.approx(distance_to_subalgebra(x, b), abs=10 * TOL)


# -- characters -------------------------------------------------------------------

def test_characters_of_scalars():
    chis = characters(scalars(2))
    assert len(chis) == 1
    assert chis[0](3.5 * np.eye(2)) == pytest.approx(3.5)


def test_characters_of_diagonals():
    chis = characters(diagonal_algebra(2))
    values = sorted((chi(np.diag([2.0, 5.0])).real for chi in chis))
    assert values == pytest.approx([2.0, 5.0])
    assert len(characters(diagonal_algebra(3))) == 3


def test_characters_need_commutative_algebra():
    with pytest.raises(ValueError):
        characters(full_algebra(2))


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 4))
def test_character_count_is_dimension(seed, n):
    b = random_commutative_subalgebra(n, np.random.default_rng(seed))
    chis = characters(b, seed=seed % 1000)
    assert len(chis) == b.dim
    assert all(chi.defect() <= 1e-8 for chi in chis)


# -- sampling and serialization -----------------------------------------------------

def test_haar_unitary_is_unitary():
    u = haar_unitary(3, np.random.default_rng(1))
    assert np.allclose(u @ u.conj().T, np.eye(3))


def test_m2_enumeration():
    assert len(enumerate_m2_subalgebras(0, 0)) == 1
    algs = enumerate_m2_subalgebras(6, 3)
    assert algs[0].dim == 1
    for b in algs[1:]:
        assert b.dim == 2 and b.commutative and b.unital
    for b1 in algs[1:]:
        for b2 in algs[1:]:
            if b1 is not b2:
                assert not contains(b1, b2) and not contains(b2, b1)


def test_m2_enumeration_is_seeded():
    a = enumerate_m2_subalgebras(3, 7)
    b = enumerate_m2_subalgebras(3, 7)
    assert all(np.array_equal(x.basis, y.basis) for x, y in zip(a, b))


def test_matrix_json_round_trip():
    x = np.array([[1 + 2j, -0.5], [3j, 4]])
    assert np.array_equal(matrix_from_json(matrix_to_json(x)), x)
    with pytest.raises(ValueError):
        matrix_from_json([[1, 2], [3, 4]])
