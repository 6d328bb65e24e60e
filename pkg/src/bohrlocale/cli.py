"""Command-line entry point.

Inputs and outputs are JSON unless ``--format`` says otherwise.  Exit codes:
0 success, 1 a verification suite failed, 2 usage or input error, 3 a
resource cap was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bohr import (
    BasicOpen,
    BohrPointSet,
    basis_topology_report,
    certificate_opens,
    incidence_csv,
    random_open,
    sigma_fiber,
)
from .classifier import FinModelAlgebra, build_classifier
from .errors import OrderError, ResourceError
from .lattice import FinLattice, FinPoset, subset_label
from .matalg import (
    characters,
    enumerate_m2_subalgebras,
    generate_subalgebra,
    matrix_from_json,
    matrix_to_json,
)
from .power import ClosedSublocale, FinLocale, lower_power, pl_pairs, sublocale_to_point
from .presentation import FramePresentation, PresentedFrame, free_frame_on_suplattice, solve_presentation
from .suites import SUITES, RunConfig, dump_report, verify_all


class InputError(Exception):
    pass


def _load(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise InputError(f"{out}: {exc.strerror or exc}") from exc


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def sorted_poset_dict(p: FinPoset) -> dict:
    """Poset as JSON with elements in label order."""
    order = sorted(range(p.n), key=lambda i: p.elements[i])
    return {"elements": [p.elements[i] for i in order],
            "leq": p.leq[np.ix_(order, order)].astype(int).tolist()}


def frame_dict(pf: PresentedFrame) -> dict:
    f = pf.frame
    return {"order": sorted_poset_dict(f.carrier), "size": f.n,
            "generators": {g: f.elements[e] for g, e in zip(pf.presentation.generators, pf.generator_images)}}


def _render_poset(p: FinPoset, fmt: str, name: str) -> str:
    if fmt == "dot":
        return p.to_dot(name)
    if fmt == "json":
        return _json(sorted_poset_dict(p))
    raise InputError(f"format {fmt!r} is not available for orders")


# -- subcommands -------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = RunConfig(suites=args.suite or [], seed=args.seed, tolerance=args.tol,
                    max_ideals=args.max_ideals, inject_fault=args.inject_fault,
                    classifier_models=args.models)
    code, report = verify_all(cfg)
    _emit(dump_report(report), args.out)
    for name in report["failed_suites"]:
        print(f"suite failed: {name}", file=sys.stderr)
    for name in report["resource_capped"]:
        print(f"suite hit a resource cap: {name}", file=sys.stderr)
    return code


def cmd_present(args) -> int:
    if args.action == "solve":
        pf = solve_presentation(FramePresentation.from_dict(_load(args.input)), args.max_ideals)
    else:
        pf = free_frame_on_suplattice(FinLattice.from_poset(FinPoset.from_dict(_load(args.input))))
    if args.format == "dot":
        _emit(pf.frame.carrier.to_dot("frame"), args.out)
    else:
        _emit(_json(frame_dict(pf)), args.out)
    return 0


def cmd_pl(args) -> int:
    l = FinLocale(FinPoset.from_dict(_load(args.input)))
    if args.action == "build":
        _emit(_render_poset(lower_power(l).points, args.format, "lower_power"), args.out)
    elif args.action == "pairs":
        pairs, _ = pl_pairs(l)
        _emit(_render_poset(pairs.points, args.format, "pairs"), args.out)
    else:
        rows = {subset_label(l.points.elements, f): list(sublocale_to_point(ClosedSublocale(l, f)).truth)
                for f in l.points.downset_masks()}
        _emit(_json({"closed_sublocales": len(rows), "points": rows}), args.out)
    return 0


def cmd_classify(args) -> int:
    m = FinModelAlgebra.from_dict(_load(args.model))
    _emit(_json(build_classifier(m, args.unital).report()), args.out)
    return 0


def _gens(path: str) -> list[np.ndarray]:
    data = _load(path)
    gens = data["generators"] if isinstance(data, dict) else data
    try:
        return [matrix_from_json(g) for g in gens]
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_alg(args) -> int:
    if args.action == "sample-m2":
        out = [b.to_dict() for b in enumerate_m2_subalgebras(args.k, args.seed)]
        _emit(_json({"seed": args.seed, "subalgebras": out}), args.out)
        return 0
    b = generate_subalgebra(_gens(args.input), unital=args.unital, tol=args.tol)
    if args.action == "gen":
        _emit(_json(b.to_dict()), args.out)
    else:
        chis = characters(b, args.tol, args.seed)
        _emit(_json({"dim": b.dim, "characters": [
            {"projection": matrix_to_json(c.projection), "defect": c.defect()} for c in chis]}), args.out)
    return 0


def _point_set(args) -> BohrPointSet:
    if args.input:
        data = _load(args.input)
        algebras = [generate_subalgebra([matrix_from_json(g) for g in gens], unital=args.unital, tol=args.tol)
                    for gens in data["points"]]
    else:
        algebras = enumerate_m2_subalgebras(args.k, args.seed)
    return BohrPointSet(algebras, args.tol)


def cmd_bohr(args) -> int:
    ps = _point_set(args)
    if args.action == "sample":
        opens = certificate_opens(ps, args.tol)
        rep = basis_topology_report(ps, opens, args.tol)
        rep["subalgebras"] = [b.to_dict() for b in ps]
        _emit(_json(rep), args.out)
    elif args.action == "incidence":
        if args.opens:
            opens = [BasicOpen.from_dict(d) for d in _load(args.opens)]
        else:
            rng = np.random.default_rng(args.seed)
            opens = [random_open(ps, rng) for _ in range(args.n_opens)]
        if args.format == "csv":
            _emit(incidence_csv(ps, opens, args.tol), args.out)
        else:
            _emit(_json(basis_topology_report(ps, opens, args.tol)), args.out)
    else:
        fibers = [{"point": i, "dim": b.dim, "fiber": len(sigma_fiber(b, args.tol, args.seed))}
                  for i, b in enumerate(ps)]
        _emit(_json({"fibers": fibers}), args.out)
    return 0


def cmd_export(args) -> int:
    data = _load(args.input)
    if args.what == "poset":
        _emit(_render_poset(FinPoset.from_dict(data), args.format, "poset"), args.out)
    elif args.what == "lower-power":
        _emit(_render_poset(lower_power(FinLocale(FinPoset.from_dict(data))).points, args.format, "lower_power"),
              args.out)
    else:
        _emit(_json(data), args.out)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bohrlocale", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"bohrlocale {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=("json",)):
        p.add_argument("--out", help="write here instead of stdout")
        p.add_argument("--format", choices=fmt, default=fmt[0])
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("verify", help="run the verification suites")
    v.add_argument("--suite", action="append", choices=sorted(SUITES))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--max-ideals", type=int, default=None)
    v.add_argument("--models", type=int, default=1000, help="random models in the classifier suite")
    v.add_argument("--inject-fault", choices=["sigma-map"], help=argparse.SUPPRESS)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    p = sub.add_parser("present", help="frames from presentations")
    p.add_argument("action", choices=["solve", "free"])
    p.add_argument("input", help="presentation JSON (solve) or lattice order JSON (free)")
    p.add_argument("--max-ideals", type=int, default=None)
    common(p, ("json", "dot"))
    p.set_defaults(func=cmd_present)

    p = sub.add_parser("pl", help="lower power locale of a finite locale")
    p.add_argument("action", choices=["build", "pairs", "check-bijection"])
    p.add_argument("input", help="poset JSON of points")
    common(p, ("json", "dot"))
    p.set_defaults(func=cmd_pl)

    p = sub.add_parser("classify", help="commutative subalgebra classifier of a finite model")
    p.add_argument("action", choices=["run"])
    p.add_argument("--model", required=True)
    p.add_argument("--unital", action="store_true")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("alg", help="matrix *-subalgebras")
    p.add_argument("action", choices=["gen", "chars", "sample-m2"])
    p.add_argument("input", nargs="?", help="JSON list of generator matrices")
    p.add_argument("--unital", action="store_true")
    p.add_argument("--k", type=int, default=8)
    common(p)
    p.set_defaults(func=cmd_alg)

    p = sub.add_parser("bohr", help="sampled points and basic opens")
    p.add_argument("action", choices=["sample", "incidence", "sigma"])
    p.add_argument("input", nargs="?", help='JSON {"points": [[generators...], ...]}; default samples M2')
    p.add_argument("--opens", help="JSON list of {center, radius}")
    p.add_argument("--n-opens", type=int, default=10)
    p.add_argument("--unital", action="store_true")
    p.add_argument("--k", type=int, default=8)
    common(p, ("json", "csv"))
    p.set_defaults(func=cmd_bohr)

    p = sub.add_parser("export", help="re-render inputs in a stable form")
    p.add_argument("what", choices=["poset", "lower-power", "report"])
    p.add_argument("input")
    common(p, ("json", "dot"))
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "action", None) in ("gen", "chars") and not args.input:
        print("bohrlocale: a generator file is required", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"bohrlocale: resource cap: {exc}", file=sys.stderr)
        return 3
    except (InputError, OrderError, ValueError, KeyError, TypeError) as exc:
        print(f"bohrlocale: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
