import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohrlocale.enumeration import monotone_maps, posets_up_to_iso, random_poset
from bohrlocale.errors import OrderError
from bohrlocale.lattice import (
    FinPoset,
    MonotoneMap,
    check_kind,
    frame_of_locale_map,
    is_isomorphism,
    iter_subsets,
    upsets,
)
from bohrlocale.oracles import downsets_by_scan, truth_maps
from bohrlocale.power import (
    ClosedSublocale,
    FinLocale,
    SupLatticePoint,
    alexandrov_presentation,
    certify_lower_power,
    coherence_map,
    diagonal,
    lower_power,
    pairing,
    pl_image,
    pl_map,
    pl_pairs,
    pl_product_map,
    point_to_sublocale,
    sublocale_to_point,
)
from bohrlocale.presentation import sigma_of_map, solve_presentation


def antichain(n, prefix="a"):
    return FinLocale(FinPoset.antichain(n, prefix))


def label_set(l: FinLocale, mask: int) -> set[str]:
    return {l.points.elements[i] for i in range(l.n) if mask >> i & 1}


def point_of(pl: FinLocale, l: FinLocale, labels) -> int:
    return pl.points.index_of_set(sum(1 << l.points.index(x) for x in labels))


# -- the lower power locale ------------------------------------------------------

def test_lower_power_of_empty_locale():
    pl = lower_power(FinLocale(FinPoset([], np.zeros((0, 0), dtype=bool))))
    assert pl.n == 1
    assert pl.frame.n == 2


def test_lower_power_of_point():
    pl = lower_power(antichain(1, "p"))
    assert pl.points.elements == ("{}", "{p0}")
    assert pl.points.le(0, 1)


def test_lower_power_of_two_antichain_is_diamond():
    pl = lower_power(antichain(2))
    assert pl.n == 4
    assert sorted(pl.points.cover_labels()) == [
        ("{a0}", "{a0,a1}"), ("{a1}", "{a0,a1}"), ("{}", "{a0}"), ("{}", "{a1}")]
    assert pl.frame.n == 6


@pytest.mark.parametrize("n", range(5))
def test_lower_power_frame_is_free_frame(n):
    for p in posets_up_to_iso(n):
        assert certify_lower_power(FinLocale(p))


def test_coherence_sends_generator_to_hitting_set():
    l = antichain(2)
    theta = coherence_map(l)
    from bohrlocale.presentation import free_frame_on_suplattice

    sigma = free_frame_on_suplattice(l.frame)
    pl = lower_power(l)
    for u, s in enumerate(l.frame.sets):
        hit = sum(1 << k for k, f in enumerate(pl.points.sets) if f & s)
        assert pl.frame.sets[theta(sigma.generator_images[u])] == hit


# -- points versus closed sublocales ---------------------------------------------

def test_empty_sublocale_is_constant_zero():
    l = antichain(2)
    assert set(sublocale_to_point(ClosedSublocale(l, 0)).truth) == {0}


def test_whole_sublocale_detects_nonempty_opens():
    l = FinLocale(FinPoset.chain(3))
    pt = sublocale_to_point(ClosedSublocale(l, l.points.full_mask))
    assert pt.truth == tuple(int(s != 0) for s in l.frame.sets)


def test_point_of_singleton_in_antichain():
    l = antichain(2)
    pt = sublocale_to_point(ClosedSublocale(l, 1))
    got = {l.frame.elements[k]: pt.truth[k] for k in range(4)}
    assert got == {"{}": 0, "{a0}": 1, "{a1}": 0, "{a0,a1}": 1}


def test_non_downclosed_subset_rejected():
    l = FinLocale(FinPoset.chain(2))
    with pytest.raises(OrderError):
        ClosedSublocale(l, 0b10)


def test_non_join_preserving_truth_rejected():
    l = antichain(2)
    with pytest.raises(OrderError):
        SupLatticePoint(l.frame, (0, 1, 1, 0))


def _bijection_holds(p: FinPoset) -> bool:
    l = FinLocale(p)
    closed = downsets_by_scan(p)
    points = {sublocale_to_point(ClosedSublocale(l, f)).truth: f for f in closed}
    if len(points) != len(closed) or set(points) != truth_maps(l.frame):
        return False
    return all(point_to_sublocale(SupLatticePoint(l.frame, t), l).members == f for t, f in points.items())


@pytest.mark.parametrize("n", range(6))
def test_points_biject_with_closed_sublocales(n):
    assert all(_bijection_holds(p) for p in posets_up_to_iso(n))


# -- functoriality --------------------------------------------------------------

def test_pl_map_of_identity():
    p = FinPoset.chain(3)
    f = pl_map(MonotoneMap.identity(p))
    assert f.table == tuple(range(f.source.n))


def test_pl_map_of_constant_bottom():
    l = antichain(2)
    chain = FinLocale(FinPoset.chain(2))
    f = pl_map(MonotoneMap.constant(l.points, chain.points, 0))
    src, dst = lower_power(l), lower_power(chain)
    for k, s in enumerate(src.points.sets):
        assert dst.points.sets[f(k)] == (0 if s == 0 else 0b01)


def test_pl_map_closes_image_downwards():
    l = antichain(2)
    chain = FinLocale(FinPoset.chain(2))
    f = pl_map(MonotoneMap(l.points, chain.points, [1, 0]))
    src, dst = lower_power(l), lower_power(chain)
    assert label_set(chain, dst.points.sets[f(point_of(src, l, ["a0"]))]) == {"c0", "c1"}


def _functoriality_coherent(f: MonotoneMap) -> bool:
    lp, lq = FinLocale(f.source), FinLocale(f.target)
    left = coherence_map(lp).compose(sigma_of_map(frame_of_locale_map(f)))
    right = frame_of_locale_map(pl_map(f)).compose(coherence_map(lq))
    return left.table == right.table


@pytest.mark.parametrize("a,b", [(a, b) for a in range(4) for b in range(4)])
def test_sigma_map_matches_closure_of_image(a, b):
    for p, q in itertools.product(posets_up_to_iso(a), posets_up_to_iso(b)):
        for table in monotone_maps(p, q):
            assert _functoriality_coherent(MonotoneMap(p, q, table))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sigma_map_matches_closure_of_image_at_four(seed):
    rng = np.random.default_rng(seed)
    p, q = random_poset(4, rng), random_poset(int(rng.integers(1, 5)), rng)
    maps = list(monotone_maps(p, q))
    assert _functoriality_coherent(MonotoneMap(p, q, maps[rng.integers(len(maps))]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pl_map_preserves_composition(seed):
    rng = np.random.default_rng(seed)
    p, q, r = (random_poset(int(rng.integers(0, 4)), rng) for _ in range(3))
    fs, gs = list(monotone_maps(p, q)), list(monotone_maps(q, r))
    if not fs or not gs:
        return
    f = MonotoneMap(p, q, fs[rng.integers(len(fs))])
    g = MonotoneMap(q, r, gs[rng.integers(len(gs))])
    assert pl_map(g.compose(f)).table == pl_map(g).compose(pl_map(f)).table


@pytest.mark.parametrize("n", range(4))
def test_inclusions_lift_to_inclusions(n):
    """For a point subset S, P_L of the inclusion is an inclusion onto the down-sets inside S."""
    for p in posets_up_to_iso(n):
        for s in iter_subsets(p.full_mask):
            idx = [i for i in range(n) if s >> i & 1]
            sub = p.restrict(idx)
            f = pl_map(MonotoneMap(sub, p, idx))
            pl_sub, pl_p = lower_power(FinLocale(sub)), lower_power(FinLocale(p))
            table = f.table
            assert len(set(table)) == pl_sub.n
            assert all(pl_sub.points.le(i, j) == pl_p.points.le(table[i], table[j])
                       for i in range(pl_sub.n) for j in range(pl_sub.n))
            image = {pl_p.points.sets[k] for k in table}
            assert image == {d for d in pl_p.points.sets if p.down_closure(d & s) == d}
            if p.is_downset(s):
                assert image == {d for d in pl_p.points.sets if d & ~s == 0}
            assert set(pl_image(MonotoneMap(sub, p, idx)).members) == set(table)


# -- pairs and products ------------------------------------------------------------

def test_pairs_of_point():
    pairs, emb = pl_pairs(antichain(1, "p"))
    assert sorted(pairs.points.elements) == sorted(["({},{})", "({},{p0})", "({p0},{p0})"])


def test_pairs_of_two_antichain():
    pairs, _ = pl_pairs(antichain(2))
    assert pairs.n == 9


@pytest.mark.parametrize("n", range(4))
def test_pairs_structure(n):
    for p in posets_up_to_iso(n):
        l = FinLocale(p)
        pl = lower_power(l)
        pairs, emb = pl_pairs(l)
        prod = pl.points.product(pl.points)
        img = [emb(k) for k in range(pairs.n)]
        # contains the diagonal, and both projections land in P_L(l) with F ⊆ G
        assert {k * pl.n + k for k in range(pl.n)} <= set(img)
        for k in img:
            a, b = divmod(k, pl.n)
            assert pl.points.sets[a] & ~pl.points.sets[b] == 0
        assert all(pairs.points.le(i, j) == prod.le(img[i], img[j]) for i in range(pairs.n) for j in range(pairs.n))


def test_product_map_examples():
    l = antichain(1, "p")
    pl = lower_power(l)
    prod = lower_power(l.product(l))
    f = pl_product_map(l, l)
    empty, full = 0, 1
    assert prod.points.sets[f(empty * pl.n + full)] == 0
    assert prod.points.sets[f(full * pl.n + full)] == prod.points.sets[-1] == 1
    assert prod.points.elements[f(full * pl.n + full)] == "{(p0,p0)}"


def test_pairing_with_diagonal():
    p = FinPoset.chain(2)
    d = diagonal(p)
    ident = MonotoneMap.identity(p)
    assert pairing(ident, ident).table == d.table


# -- presentations of finite locales -------------------------------------------------

def _opens_iso(p: FinPoset) -> bool:
    u = upsets(p)
    pf = solve_presentation(alexandrov_presentation(p))
    vals = [u.carrier.index_of_set(p.up_closure(1 << x)) for x in range(p.n)]
    return is_isomorphism(pf.universal_map(u, vals))


@pytest.mark.parametrize("n", range(5))
def test_alexandrov_presentation(n):
    assert all(_opens_iso(p) for p in posets_up_to_iso(n))


@pytest.mark.parametrize("a,b", [(a, b) for a in range(4) for b in range(4)])
def test_product_frame_is_presented_tensor(a, b):
    for p, q in itertools.product(posets_up_to_iso(a), posets_up_to_iso(b)):
        pq = p.product(q)
        u = upsets(pq)
        pf = solve_presentation(alexandrov_presentation(p).coproduct(alexandrov_presentation(q)))
        left = [sum(1 << (i * q.n + j) for i in range(p.n) for j in range(q.n) if p.le(x, i)) for x in range(p.n)]
        right = [sum(1 << (i * q.n + j) for i in range(p.n) for j in range(q.n) if q.le(y, j)) for y in range(q.n)]
        m = pf.universal_map(u, [u.carrier.index_of_set(s) for s in left + right])
        assert check_kind(m) and is_isomorphism(m)
