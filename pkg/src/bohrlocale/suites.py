"""Verification suites run by ``bohrlocale verify``.

Each suite returns a plain dict: ``checked`` instance count, ``failures``
(short strings, capped), and ``passed``.  All randomness comes from one root
seed, split per suite by hashing the suite name.
"""

from __future__ import annotations

import itertools
import json
import os
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .bohr import (
    BohrPointSet,
    basis_topology_report,
    certificate_opens,
    comparison_map_check,
    in_basic_open,
    random_open,
    sigma_fiber,
    specialization_leq,
)
from .classifier import FinModelAlgebra, build_classifier, enumerate_nuclei, induced_nucleus
from .enumeration import lattices_up_to_iso, monotone_maps, posets_up_to_iso, random_poset, sup_maps, two
from .errors import ResourceError
from .lattice import (
    FinPoset,
    LatticeMap,
    MonotoneMap,
    check_kind,
    downsets,
    frame_of_locale_map,
    is_isomorphism,
    is_surjective,
)
from .matalg import (
    enumerate_m2_subalgebras,
    generate_subalgebra,
    haar_unitary,
    masa,
    random_commutative_subalgebra,
    scalars,
)
from .oracles import closed_subsets, downsets_by_scan, included_by_rank, principal_truth_map, truth_maps
from .power import (
    ClosedSublocale,
    FinLocale,
    SupLatticePoint,
    certify_lower_power,
    coherence_map,
    lower_power,
    pl_map,
    point_to_sublocale,
    sublocale_to_point,
)
from .presentation import free_frame_on_suplattice, sigma_of_map

MAX_REPORTED_FAILURES = 20


@dataclass
class RunConfig:
    suites: list[str] = field(default_factory=list)
    seed: int = 0
    tolerance: float = 1e-9
    max_ideals: int | None = None
    inject_fault: str | None = None
    classifier_models: int = 1000
    bijection_random: int = 200

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def suite_rng(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(label.encode())])


class _Tally:
    def __init__(self):
        self.checked = 0
        self.failures: list[str] = []
        self.extra: dict = {}

    def check(self, ok: bool, what: Callable[[], str] | str) -> None:
        self.checked += 1
        if not ok:
            self.failures.append(what() if callable(what) else what)

    def result(self) -> dict:
        return {"checked": self.checked, "failures": self.failures[:MAX_REPORTED_FAILURES],
                "failure_count": len(self.failures), "passed": not self.failures, **self.extra}


def _posets_through(n: int) -> list[FinPoset]:
    return [p for k in range(n + 1) for p in posets_up_to_iso(k)]


def suite_pl_bijection(cfg: RunConfig) -> dict:
    """Closed sublocales versus join-preserving truth maps on the frame."""
    t = _Tally()
    rng = suite_rng(cfg.seed, "pl-bijection")
    posets = _posets_through(4) + [random_poset(5, rng) for _ in range(cfg.bijection_random)]
    for p in posets:
        l = FinLocale(p)
        expected = truth_maps(l.frame)
        closed = downsets_by_scan(p)
        images = {}
        for f in closed:
            pt = sublocale_to_point(ClosedSublocale(l, f))
            images[pt.truth] = f
            t.check(point_to_sublocale(pt, l).members == f, lambda: f"round trip failed on {p!r}")
        t.check(len(images) == len(closed), lambda: f"two closed sublocales share a point on {p!r}")
        t.check(set(images) == expected, lambda: f"points differ from truth maps on {p!r}")
        for truth in expected:
            back = point_to_sublocale(SupLatticePoint(l.frame, truth), l)
            t.check(sublocale_to_point(back).truth == truth, lambda: f"inverse round trip failed on {p!r}")
    t.extra["posets"] = len(posets)
    return t.result()


def suite_sigma_structure(cfg: RunConfig) -> dict:
    """Free frame on a sup-lattice versus down-sets, and P_L's frame versus Σ."""
    t = _Tally()
    for k in range(1, 6):
        for s in lattices_up_to_iso(k):
            sigma = free_frame_on_suplattice(s)
            target = downsets(s.carrier)
            values = [target.carrier.index_of_set(sum(1 << a for a in range(s.n) if not s.le(u, a)))
                      for u in range(s.n)]
            iso = sigma.universal_map(target, values)
            t.check(check_kind(iso) and is_isomorphism(iso), lambda: f"Σ(s) ≇ downsets(s) for {s.elements}")
            t.check(all(iso(sigma.generator_images[u]) == values[u] for u in range(s.n)),
                    "generator images moved")
            pts = {f.table for f in sup_maps(s, two())}
            t.check(pts == {principal_truth_map(s, a) for a in range(s.n)} and len(pts) == s.n,
                    lambda: f"points of Σ(s) are not the elements of s for {s.elements}")
    for p in _posets_through(4):
        t.check(certify_lower_power(FinLocale(p)), lambda: f"P_L frame not ≅ Σ for {p!r}")
    return t.result()


def suite_pl_subloc(cfg: RunConfig) -> dict:
    """Σ of a surjective join-preserving map is a surjective frame map."""
    t = _Tally()
    lattices = [s for k in range(1, 6) for s in lattices_up_to_iso(k)]
    surjections = 0
    for s, u in itertools.product(lattices, repeat=2):
        for f in sup_maps(s, u):
            if not is_surjective(f):
                continue
            surjections += 1
            sf = sigma_of_map(f)
            if cfg.inject_fault == "sigma-map" and surjections == 1:
                table = list(sf.table)
                table[sf.source.top] = sf.target.bottom
                sf = LatticeMap(sf.source, sf.target, table, "frame")
            t.check(check_kind(sf) and is_surjective(sf), lambda: f"Σf not a surjective frame map for {f.table}")
    t.extra["surjections"] = surjections
    return t.result()


def _funct_check(t: _Tally, f: MonotoneMap, p: FinPoset, q: FinPoset) -> None:
    lp, lq = FinLocale(p), FinLocale(q)
    theta_p, theta_q = coherence_map(lp), coherence_map(lq)
    sigma_side = theta_p.compose(sigma_of_map(frame_of_locale_map(f)))
    point_side = frame_of_locale_map(pl_map(f)).compose(theta_q)
    t.check(sigma_side.table == point_side.table, lambda: f"Σ-map and closure-of-image disagree for {f.table}")


def suite_pl_funct(cfg: RunConfig) -> dict:
    """Frame-level Σ-maps agree with point-level closure of images; functoriality."""
    t = _Tally()
    small = _posets_through(3)
    tables: dict[tuple[int, int, tuple], tuple] = {}
    for (a, p), (b, q) in itertools.product(enumerate(small), repeat=2):
        for table in monotone_maps(p, q):
            f = MonotoneMap(p, q, table, check=False)
            _funct_check(t, f, p, q)
            tables[(a, b, table)] = pl_map(f).table
    for a, p in enumerate(small):
        t.check(tables[(a, a, tuple(range(p.n)))] == tuple(range(lower_power(FinLocale(p)).n)), "identity not preserved")
    by_source: dict[int, list] = {}
    for (a, b, table), plt in tables.items():
        by_source.setdefault(a, []).append((b, table, plt))
    for (a, b, f), plf in tables.items():
        for c, g, plg in by_source[b]:
            gf = tuple(g[x] for x in f)
            t.check(tables[(a, c, gf)] == tuple(plg[x] for x in plf), lambda: f"composition fails for {f}, {g}")
    rng = suite_rng(cfg.seed, "pl-funct")
    four = posets_up_to_iso(4)
    sampled = 0
    while sampled < 40:
        p = four[rng.integers(len(four))] if rng.random() < 0.5 else small[rng.integers(len(small))]
        q = four[rng.integers(len(four))] if p.n < 4 or rng.random() < 0.5 else small[rng.integers(len(small))]
        maps = list(monotone_maps(p, q))
        if not maps:
            continue
        f = MonotoneMap(p, q, maps[rng.integers(len(maps))], check=False)
        _funct_check(t, f, p, q)
        sampled += 1
    t.extra["sampled_at_four"] = sampled
    return t.result()


def random_model(rng: np.random.Generator, n: int, unital: bool) -> FinModelAlgebra:
    """Random tables biased so that some proper subsets are closed."""
    closed = [x for x in range(n) if rng.random() < 0.6] or [0]
    inside = np.array(closed)

    def table2() -> np.ndarray:
        t = rng.integers(0, n, (n, n))
        if rng.random() < 0.7:
            t[np.ix_(inside, inside)] = rng.choice(inside, (len(inside), len(inside)))
        if rng.random() < 0.4:
            t = np.triu(t) + np.triu(t, 1).T
        return t

    add, mul = table2(), table2()
    star = np.arange(n)
    for group in (closed, [x for x in range(n) if x not in closed]):
        g = list(rng.permutation(group))
        while len(g) >= 2 and rng.random() < 0.5:
            a, b = g.pop(), g.pop()
            star[a], star[b] = b, a
    unit = None
    if unital:
        unit = int(rng.choice(inside)) if rng.random() < 0.7 else int(rng.integers(n))
        mul[unit, :] = np.arange(n)
        mul[:, unit] = np.arange(n)
    unaries = {}
    if rng.random() < 0.4:
        u = rng.integers(0, n, n)
        if rng.random() < 0.7:
            u[inside] = rng.choice(inside, len(inside))
        unaries["i"] = u
    return FinModelAlgebra.discrete(n, add, mul, star, unit, unaries)


def suite_classifier(cfg: RunConfig) -> dict:
    """Points of the classifier equal the brute-force closed commutative subsets."""
    t = _Tally()
    rng = suite_rng(cfg.seed, "classifier")
    nontrivial = 0
    for k in range(cfg.classifier_models):
        n = int(rng.integers(2, 5))
        unital = bool(k % 2)
        m = random_model(rng, n, unital)
        got = build_classifier(m, unital).point_sets()
        want = closed_subsets(m, unital)
        nontrivial += len(want) > 1
        t.check(got == want, lambda: f"model {k}: classifier {got} != oracle {want}")
    t.extra["models_with_several_points"] = nontrivial
    return t.result()


def suite_nuclei(cfg: RunConfig) -> dict:
    """Nuclei on frames of small locales are exactly the point-set sublocales."""
    t = _Tally()
    t.extra["nuclei"] = 0
    for p in _posets_through(3):
        l = FinLocale(p)
        nuclei = set(enumerate_nuclei(l.frame))
        t.extra["nuclei"] += len(nuclei)
        induced = {}
        for s in range(1 << p.n):
            induced.setdefault(induced_nucleus(l, s), s)
        t.check(len(induced) == 1 << p.n, lambda: f"distinct point sets share a nucleus on {p!r}")
        t.check(set(induced) == nuclei, lambda: f"nuclei differ from point sublocales on {p!r}")
    return t.result()


def _m2_pool(rng: np.random.Generator, tol: float) -> list:
    pool = enumerate_m2_subalgebras(12, int(rng.integers(2**31)))
    for _ in range(4):
        u = haar_unitary(2, rng)
        pool.append(generate_subalgebra([u @ np.diag([1.0, 0.0]) @ u.conj().T], tol=tol))
    pool.append(pool[1])
    return pool


def _nested_pool(n: int, rng: np.random.Generator, tol: float) -> list:
    """Chains ``C·p ⊆ C·p + C·q ⊆ masa`` and ``C·1 ⊆ masa`` in M_n."""
    pool = [scalars(n)]
    for _ in range(4):
        u = haar_unitary(n, rng)
        pool.append(masa(u))
        proj = [u @ np.diag(np.eye(n)[i]) @ u.conj().T for i in range(n)]
        pool.append(generate_subalgebra(proj[:1], tol=tol))
        if n > 2:
            pool.append(generate_subalgebra([proj[0] + 2 * proj[1]], tol=tol))
    return pool


def suite_bohr(cfg: RunConfig) -> dict:
    """Numerical checks on M₂ and M₃ point samples."""
    tol = cfg.tolerance
    rng = suite_rng(cfg.seed, "bohr")
    t = _Tally()

    # (a) specialization versus inclusion, with separating certificates
    pool = _m2_pool(rng, tol)
    agree = certs = 0
    for _ in range(200):
        b1, b2 = pool[rng.integers(len(pool))], pool[rng.integers(len(pool))]
        verdict, cert = specialization_leq(b1, b2, tol)
        ok = verdict == included_by_rank(b1, b2, tol)
        agree += ok
        t.check(ok, "specialization verdict disagrees with inclusion")
        if cert is not None:
            certs += 1
            t.check(in_basic_open(b1, cert, tol) and not in_basic_open(b2, cert, tol), "certificate does not separate")
    for n in (2, 3):
        ps = BohrPointSet(_nested_pool(n, rng, tol), tol)
        rep = basis_topology_report(ps, certificate_opens(ps, tol), tol)
        t.check(rep["agrees_with_inclusion"], f"certificate topology on M{n} differs from inclusion")

    # (b) monotonicity of W_U membership along inclusions
    mono = 0
    pools = {n: BohrPointSet(_nested_pool(n, rng, tol), tol) for n in (2, 3)}
    incl = {n: ps.inclusion() for n, ps in pools.items()}
    for k in range(10_000):
        n = 2 + k % 2
        ps = pools[n]
        i = int(rng.integers(len(ps)))
        above = np.flatnonzero(incl[n][i])
        j = int(rng.choice(above))
        u = random_open(ps, rng)
        ok = not in_basic_open(ps.points[i], u, tol) or in_basic_open(ps.points[j], u, tol)
        mono += 1
        t.check(ok, "W_U membership not monotone")

    # (c) fiber counts of the spectral bundle
    fibers = 0
    for k in range(100):
        b = random_commutative_subalgebra(2 + k % 2, rng)
        t.check(len(sigma_fiber(b, tol, seed=k)) == b.dim, "fiber size differs from dimension")
        fibers += 1

    # (d) continuity of the comparison map from the inclusion topology
    ps = BohrPointSet(_nested_pool(2, rng, tol) + pool, tol)
    opens = [random_open(ps, rng) for _ in range(100)]
    rep = comparison_map_check(ps, opens, tol)
    t.check(not rep["violations"], "comparison map is not continuous on the sample")
    t.extra.update(pairs=200, agreeing_pairs=agree, certificates=certs, monotonicity_checks=mono,
                   fibers=fibers, comparison_opens=len(opens), comparison_violations=len(rep["violations"]))
    return t.result()


SUITES: dict[str, Callable[[RunConfig], dict]] = {
    "bohr": suite_bohr,
    "classifier": suite_classifier,
    "nuclei": suite_nuclei,
    "pl-bijection": suite_pl_bijection,
    "pl-funct": suite_pl_funct,
    "pl-subloc": suite_pl_subloc,
    "sigma-structure": suite_sigma_structure,
}


def verify_all(cfg: RunConfig) -> tuple[int, dict]:
    """Run the selected suites; exit code 0 pass, 1 failure, 3 resource cap."""
    names = cfg.suites or sorted(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites: {unknown}")
    saved = os.environ.get("BOHRLOCALE_MAX_IDEALS")
    if cfg.max_ideals is not None:
        os.environ["BOHRLOCALE_MAX_IDEALS"] = str(cfg.max_ideals)
    results = {}
    try:
        for name in sorted(names):
            try:
                results[name] = SUITES[name](cfg)
            except ResourceError as exc:
                results[name] = {"passed": False, "resource_error": str(exc)}
    finally:
        if saved is None:
            os.environ.pop("BOHRLOCALE_MAX_IDEALS", None)
        else:
            os.environ["BOHRLOCALE_MAX_IDEALS"] = saved
    failed = [n for n, r in results.items() if not r["passed"] and "resource_error" not in r]
    capped = [n for n, r in results.items() if "resource_error" in r]
    code = 1 if failed else 3 if capped else 0
    report = {"version": __version__, "config": asdict(cfg), "suites": results,
              "failed_suites": failed, "resource_capped": capped, "passed": code == 0}
    return code, report


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
