import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohrlocale.classifier import (
    FinModelAlgebra,
    Nucleus,
    binary_stability_sublocale,
    build_classifier,
    commutativity_sublocale,
    commuting_pairs,
    enumerate_nuclei,
    equalizer,
    induced_nucleus,
    pullback_sublocale,
    stability_map_binary,
    star_sublocale,
    unital_sublocale,
)
from bohrlocale.enumeration import monotone_maps, posets_up_to_iso, random_poset
from bohrlocale.errors import OrderError
from bohrlocale.lattice import FinPoset, MonotoneMap, upsets
from bohrlocale.oracles import closed_subsets
from bohrlocale.power import FinLocale, PointSublocale, lower_power, pairing, pairs_sublocale, pl_map
from bohrlocale.suites import random_model


def model(n, add, mul, star=None, unit=None, **unaries):
    return FinModelAlgebra.discrete(n, add, mul, list(range(n)) if star is None else star, unit, unaries)


def point_sets(piece: PointSublocale, pl: FinLocale) -> list[int]:
    return sorted((pl.points.sets[k] for k in piece.members), key=lambda s: (s.bit_count(), s))


ZERO2 = [[0, 0], [0, 0]]


# -- the model type -----------------------------------------------------------

def test_star_must_be_involution():
    with pytest.raises(ValueError):
        model(3, np.zeros((3, 3), int), np.zeros((3, 3), int), star=[1, 2, 0])


def test_table_shape_checked():
    with pytest.raises(ValueError):
        model(2, [[0, 0]], ZERO2)


def test_unit_must_be_identity():
    with pytest.raises(ValueError):
        model(2, ZERO2, ZERO2, unit=1)


def test_operations_must_be_monotone_on_ordered_carrier():
    chain = FinLocale(FinPoset.chain(2))
    with pytest.raises(OrderError):
        FinModelAlgebra(chain, [[1, 1], [0, 0]], ZERO2, [0, 1])


def test_model_dict_round_trip():
    m = model(2, [[0, 1], [1, 0]], [[0, 0], [0, 1]], unit=1, i=[0, 1])
    back = FinModelAlgebra.from_dict(m.to_dict())
    assert back.to_dict() == m.to_dict()


# -- equalizers and pullbacks --------------------------------------------------

def test_equalizer_of_equal_maps_is_everything():
    p = FinPoset.chain(3)
    f = MonotoneMap.identity(p)
    assert equalizer(f, f).members == frozenset(range(3))


def test_equalizer_with_constant_is_its_value():
    p = FinPoset.antichain(2)
    assert equalizer(MonotoneMap.identity(p), MonotoneMap.constant(p, p, 1)).members == {1}


def test_star_swap_fixed_points():
    m = model(2, ZERO2, ZERO2, star=[1, 0])
    pl = lower_power(m.carrier)
    piece = equalizer(MonotoneMap.identity(pl.points), pl_map(m.unary_map("star")))
    assert point_sets(piece, pl) == [0b00, 0b11]
    assert star_sublocale(m).members == piece.members


def test_pullback_of_whole_and_empty():
    p = FinPoset.chain(2)
    f = MonotoneMap.constant(FinPoset.antichain(3), p, 1)
    assert pullback_sublocale(PointSublocale.whole(p), f).members == frozenset(range(3))
    assert pullback_sublocale(PointSublocale(p, []), f).members == frozenset()


def test_pullback_of_pairs_along_empty_and_identity():
    l = FinLocale(FinPoset.antichain(1, "p"))
    pl = lower_power(l)
    f = pairing(MonotoneMap.constant(pl.points, pl.points, 0), MonotoneMap.identity(pl.points))
    assert pullback_sublocale(pairs_sublocale(l), f).members == frozenset(range(pl.n))


def _all_small_maps(max_n):
    posets = [p for k in range(max_n + 1) for p in posets_up_to_iso(k)]
    return posets, {(a, b): list(monotone_maps(p, q))
                    for (a, p), (b, q) in itertools.product(enumerate(posets), repeat=2)}


def test_equalizer_universal_property():
    posets, maps = _all_small_maps(3)
    small_q = [b for b, q in enumerate(posets) if q.n <= 2]
    for a, p in enumerate(posets):
        for b in small_q:
            for f, g in itertools.product(maps[(a, b)], repeat=2):
                eq = equalizer(MonotoneMap(p, posets[b], f), MonotoneMap(p, posets[b], g)).members
                for r in range(len(posets)):
                    for h in maps[(r, a)]:
                        if all(f[x] == g[x] for x in h):
                            assert set(h) <= eq


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pullback_is_natural(seed):
    rng = np.random.default_rng(seed)
    p, q, r = (random_poset(int(rng.integers(1, 5)), rng) for _ in range(3))
    fs, gs = list(monotone_maps(p, q)), list(monotone_maps(q, r))
    f = MonotoneMap(p, q, fs[rng.integers(len(fs))])
    g = MonotoneMap(q, r, gs[rng.integers(len(gs))])
    s = PointSublocale(r, [x for x in range(r.n) if rng.random() < 0.5])
    assert pullback_sublocale(pullback_sublocale(s, g), f) == pullback_sublocale(s, g.compose(f))


# -- the individual pieces ------------------------------------------------------

def test_stability_map_examples():
    m = model(2, ZERO2, [[0, 1], [1, 1]])
    pl = lower_power(m.carrier)
    st_mul = stability_map_binary(m, "mul")
    at = lambda mask: pl.points.sets[st_mul(pl.points.index_of_set(mask))]
    assert at(0b00) == 0b00
    # a0 is idempotent under mul
    assert at(0b01) == 0b01
    assert at(0b10) == 0b10


def test_stability_under_constant_operation():
    m = model(2, ZERO2, ZERO2)
    pl = lower_power(m.carrier)
    st_add = stability_map_binary(m, "add")
    assert pl.points.sets[st_add(pl.points.index_of_set(0b10))] == 0b01
    assert point_sets(binary_stability_sublocale(m, "add"), pl) == [0b00, 0b01, 0b11]


def test_commuting_pairs_examples():
    comm = model(2, ZERO2, [[0, 1], [1, 0]])
    assert len(commuting_pairs(comm)) == 4
    left = model(2, ZERO2, [[0, 0], [1, 1]])
    assert sorted(commuting_pairs(left).labels()) == ["(a0,a0)", "(a1,a1)"]
    magma = model(2, ZERO2, [[0, 0], [1, 0]])
    pairs = commuting_pairs(magma)
    missing = sorted(set(pairs.ambient.elements) - set(pairs.labels()))
    assert missing == ["(a0,a1)", "(a1,a0)"]


def test_commutativity_sublocale_examples():
    comm = model(2, ZERO2, [[0, 1], [1, 0]])
    assert len(commutativity_sublocale(comm)) == 4
    left = model(2, ZERO2, [[0, 0], [1, 1]])
    pl = lower_power(left.carrier)
    assert point_sets(commutativity_sublocale(left), pl) == [0b00, 0b01, 0b10]
    mul = np.zeros((3, 3), int)
    mul[0, 1], mul[1, 0] = 1, 2
    three = model(3, np.zeros((3, 3), int), mul)
    got = point_sets(commutativity_sublocale(three), lower_power(three.carrier))
    assert got == sorted((s for s in range(8) if s & 0b011 != 0b011), key=lambda s: (s.bit_count(), s))


def test_unital_sublocale_examples():
    m = model(2, [[0, 1], [1, 0]], [[0, 0], [0, 1]], unit=1)
    pl = lower_power(m.carrier)
    assert point_sets(unital_sublocale(m), pl) == [0b10, 0b11]
    with pytest.raises(ValueError):
        unital_sublocale(model(2, ZERO2, ZERO2))


# -- the classifier ---------------------------------------------------------------

def test_one_element_algebra():
    m = model(1, [[0]], [[0]], unit=0)
    assert build_classifier(m).point_sets() == [0, 1]
    assert build_classifier(m, unital=True).point_sets() == [1]


def test_boolean_like_model():
    m = model(2, [[0, 1], [1, 0]], [[0, 0], [0, 1]], unit=1)
    assert build_classifier(m, unital=True).point_sets() == closed_subsets(m, True) == [0b11]
    assert build_classifier(m).point_sets() == closed_subsets(m, False) == [0b00, 0b01, 0b11]


def test_star_asymmetric_subsets_excluded():
    m = model(3, np.zeros((3, 3), int), np.zeros((3, 3), int), star=[0, 2, 1])
    got = build_classifier(m).point_sets()
    assert got == closed_subsets(m, False)
    assert all((s >> 1 & 1) == (s >> 2 & 1) for s in got)


def test_report_lists_pieces():
    m = model(2, [[0, 1], [1, 0]], [[0, 0], [0, 1]], unit=1, i=[0, 1])
    rep = build_classifier(m, unital=True).report()
    assert set(rep["pieces"]) == {"star-stable", "add-stable", "mul-stable", "i-stable", "commutative", "unital"}
    assert rep["points"] == ["{a0,a1}"]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.booleans())
def test_classifier_matches_brute_force(seed, n, unital):
    m = random_model(np.random.default_rng(seed), n, unital)
    assert build_classifier(m, unital).point_sets() == closed_subsets(m, unital)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_dropping_a_piece_only_adds_points(seed, n):
    m = random_model(np.random.default_rng(seed), n, True)
    full = set(build_classifier(m, True).point_sets())
    for piece in ("commutative", "add-stable", "mul-stable", "star-stable", "unital"):
        assert full <= set(build_classifier(m, True, skip=[piece]).point_sets())


# -- nuclei ------------------------------------------------------------------------

def nuclei_by_brute_force(frame) -> set[tuple[int, ...]]:
    out = set()
    for table in itertools.product(range(frame.n), repeat=frame.n):
        if Nucleus(frame, table, check=False).is_valid():
            out.add(table)
    return out


def test_nuclei_on_two_element_frame():
    frame = upsets(FinPoset.antichain(1))
    tables = {n.table for n in enumerate_nuclei(frame)}
    assert tables == {(0, 1), (1, 1)}


def test_nuclei_on_three_chain():
    assert len(enumerate_nuclei(upsets(FinPoset.chain(2)))) == 4


def test_nuclei_on_diamond():
    frame = upsets(FinPoset.antichain(2))
    assert {n.table for n in enumerate_nuclei(frame)} == nuclei_by_brute_force(frame)
    assert len(enumerate_nuclei(frame)) == 4


def test_nuclei_search_matches_brute_force():
    for p in [p for k in range(4) for p in posets_up_to_iso(k)]:
        frame = upsets(p)
        if frame.n <= 6:
            assert {n.table for n in enumerate_nuclei(frame)} == nuclei_by_brute_force(frame)


@pytest.mark.parametrize("n", range(4))
def test_nuclei_are_point_sublocales(n):
    for p in posets_up_to_iso(n):
        l = FinLocale(p)
        nuclei = set(enumerate_nuclei(l.frame))
        induced = [induced_nucleus(l, s) for s in range(1 << n)]
        assert len(set(induced)) == 1 << n
        assert set(induced) == nuclei
        for s, nu in enumerate(induced):
            # the fixed opens are the traces of opens on S
            traces = {u & s for u in l.frame.sets}
            assert {l.frame.sets[u] & s for u in nu.fixed_points()} == traces


def test_invalid_nucleus_rejected():
    frame = upsets(FinPoset.antichain(1))
    with pytest.raises(OrderError):
        Nucleus(frame, (0, 0))
