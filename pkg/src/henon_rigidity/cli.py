"""Command line interface: ``henon <subcommand> ...``.

Exit status is 0 on success, 1 on invalid input (bad map spec, violated
precondition) and 2 on internal errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    DEFAULT_BUDGET,
    Dynamics,
    GridJob,
    GridMode,
    GridSlice,
    SelfCheckFailed,
    rasterize_grid,
    verify_green_domination,
)
from .io import (
    ParseError,
    ValidationError,
    dump_map_spec,
    grid_csv,
    load_map,
    polymap_to_dict,
    report_json,
    write_grid_csv,
    write_grid_pgm,
)
from .maps import ExpansionTooLarge, HenonChain, Point2, chain_degree, chain_expand, chain_jacobian_det
from .normal_form import PreconditionViolated, admissible_twist_group, chain_normalize_b_only, origin_fixed_form, square_normal_form
from .rigidity import DegreeMismatch, check_commute, find_twist, fixed_points, rigidity_report, verify_squares_commute


class UsageError(ValueError):
    pass


def _c(z: complex) -> list[float]:
    return [complex(z).real, complex(z).imag]


def _point(args) -> Point2:
    if args.point_c is not None:
        xr, xi, yr, yi = args.point_c
        return Point2(complex(xr, xi), complex(yr, yi))
    if args.point is not None:
        return Point2(complex(args.point[0]), complex(args.point[1]))
    raise UsageError("a point is required (--point x y or --point-c xr xi yr yi)")


def _map(args, attr: str = "map") -> HenonChain:
    path = getattr(args, attr)
    if path is None:
        raise UsageError(f"--{attr} is required")
    return load_map(path)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _kv(results: dict) -> str:
    lines = []
    for k, v in results.items():
        if isinstance(v, complex):
            v = f"{v.real:.15g}{v.imag:+.15g}j"
        lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def _report(args, command: str, inputs: dict, results: dict, residuals: dict | None = None) -> None:
    if args.format == "json":
        _emit(args, report_json(command, inputs, results, residuals or {}))
    else:
        merged = dict(results)
        merged.update({f"residual_{k}": v for k, v in (residuals or {}).items()})
        _emit(args, _kv(merged))


# ---------------------------------------------------------------------------
# subcommands


def cmd_compose(args) -> int:
    F, H = _map(args, "f"), _map(args, "h")
    _emit(args, dump_map_spec(H.then(F)))
    return 0


def cmd_expand(args) -> int:
    H = _map(args)
    m = chain_expand(H, args.cap)
    if args.format == "json":
        _report(args, "expand", {"map": args.map}, {"degree": chain_degree(H), "expansion": polymap_to_dict(m)})
    else:
        _emit(args, f"first: {m.first!r}\nsecond: {m.second!r}\n")
    return 0


def _emit_chain(args, command: str, chain: HenonChain) -> int:
    _emit(args, dump_map_spec(chain))
    return 0


def cmd_normalize_square(args) -> int:
    return _emit_chain(args, "normalize-square", square_normal_form(_map(args)))


def cmd_normalize_chain(args) -> int:
    return _emit_chain(args, "normalize-chain", chain_normalize_b_only(_map(args)))


def cmd_fix_origin(args) -> int:
    return _emit_chain(args, "fix-origin", origin_fixed_form(_map(args)))


def cmd_twist_group(args) -> int:
    H = _map(args)
    G = admissible_twist_group(H)
    _report(args, "twist-group", {"map": args.map},
            {"order": G.order, "generator": G.generator, "elements": G.elements(),
             "zero_coefficients": [list(z) for z in G.zero_coefficients]})
    return 0


def cmd_green(args) -> int:
    H = _map(args)
    z = _point(args)
    dyn = Dynamics(H)
    est = dyn.green_max(z, args.budget) if args.sign == "max" else dyn.green(z, args.sign, args.budget)
    _report(args, "green", {"map": args.map, "point": [_c(z.x), _c(z.y)], "sign": args.sign, "budget": args.budget},
            {"value": est.value, "escaped": est.escaped, "iterations_used": est.iterations_used,
             "filtration_radius": dyn.R},
            {"error_bound": est.error_bound})
    return 0


def cmd_classify(args) -> int:
    H = _map(args)
    z = _point(args)
    cls = Dynamics(H).classify(z, args.budget)
    _report(args, "classify", {"map": args.map, "point": [_c(z.x), _c(z.y)], "budget": args.budget},
            {"class": str(cls), "forward_step": cls.forward_step, "backward_step": cls.backward_step})
    return 0


def cmd_verify_domination(args) -> int:
    H = _map(args)
    reps = verify_green_domination(H, args.r0, args.samples, seed=args.seed, budget=args.budget)
    results = {}
    for name, rep in reps.items():
        results[name] = {"expected": rep.expected, "samples": rep.samples, "certified": rep.certified,
                         "worst_margin": rep.worst_margin, "inconclusive": len(rep.inconclusive)}
    if args.figure:
        from .plotting import plot_domination

        plot_domination(reps, args.figure)
    if args.format == "json":
        _emit(args, report_json("verify-domination", {"map": args.map, "R0": args.r0, "samples": args.samples,
                                                      "seed": args.seed}, results, {}))
    else:
        _emit(args, "".join(f"{n}: {r['certified']}/{r['samples']} certified {r['expected']}, "
                            f"worst margin {r['worst_margin']:.6g}\n" for n, r in results.items()))
    return 0 if all(r.all_certified for r in reps.values()) else 1


def cmd_render(args) -> int:
    H = _map(args)
    job = GridJob(center=tuple(args.center), width=args.width, height=args.height,
                  resolution=tuple(args.res), mode=GridMode(args.mode), budget=args.budget,
                  slice=_slice(args))
    result = rasterize_grid(H, job, workers=args.workers)
    fmt = args.format if args.format in ("csv", "pgm") else "csv"
    if fmt == "pgm":
        if not args.out:
            raise UsageError("--out is required for pgm output")
        write_grid_pgm(result, args.out)
    elif args.out:
        write_grid_csv(result, args.out)
    else:
        sys.stdout.write(grid_csv(result))
    if args.figure:
        from .plotting import plot_grid

        plot_grid(result, args.figure)
    if args.out:
        sys.stdout.write(_kv(result.summary))
    return 0


def _slice(args) -> GridSlice:
    if args.slice is None:
        return GridSlice()
    v = args.slice
    z = [complex(v[i], v[i + 1]) for i in range(0, 12, 2)]
    return GridSlice((z[0], z[1]), (z[2], z[3]), (z[4], z[5]))


def cmd_fixed_points(args) -> int:
    H = _map(args)
    fp = fixed_points(H, args.order)
    _report(args, "fixed-points", {"map": args.map, "order": args.order},
            {"count": len(fp.points), "expected_with_multiplicity": fp.expected_count,
             "points": [[_c(p.x), _c(p.y)] for p in fp.points], "seeds_used": fp.seeds_used,
             "seeds_failed": fp.seeds_failed},
            {"max": max(fp.residuals, default=0.0)})
    return 0


def cmd_twist(args) -> int:
    F, H = _map(args, "f"), _map(args, "h")
    try:
        tw = find_twist(F, H, args.tol)
        note = "" if tw is not None else "candidate eta fails the full relation"
    except DegreeMismatch as exc:
        tw, note = None, str(exc)
    results = {"found": tw is not None}
    residuals = {}
    if tw is not None:
        results.update({"eta": tw.eta, "abs_eta": abs(tw.eta), "relation": "F o H = C_eta o H o F",
                        "right_relation": tw.right_relation})
        residuals["relation"] = tw.residual
    else:
        results["note"] = note
    _report(args, "twist", {"f": args.f, "h": args.h, "tol": args.tol}, results, residuals)
    return 0


def cmd_commute(args) -> int:
    F, H = _map(args, "f"), _map(args, "h")
    ok, res = (verify_squares_commute if args.squares else check_commute)(F, H, args.tol)
    _report(args, "commute", {"f": args.f, "h": args.h, "tol": args.tol, "squares": args.squares},
            {"commute": ok}, {"max_coefficient_difference": res})
    return 0


def cmd_rigidity(args) -> int:
    F, H = _map(args, "f"), _map(args, "h")
    rep = rigidity_report(F, H, args.tol)
    if args.format == "json":
        d = rep.to_dict()
        residuals = {
            "twist": d["twist"]["residual"] if d["twist"] else None,
            "commute_FH": d.pop("commute_FH_residual"),
            "commute_squares": d.pop("commute_squares_residual"),
        }
        _emit(args, report_json("rigidity", {"f": args.f, "h": args.h, "tol": args.tol}, d, residuals))
    else:
        _emit(args, rep.to_text())
    return 0


def cmd_verify(args) -> int:
    from .acceptance import CRITERIA

    failed = 0
    lines = []
    for crit in CRITERIA:
        r = crit()
        failed += not r.passed
        lines.append(r.line())
    _emit(args, "\n".join(lines) + f"\n{len(CRITERIA) - failed}/{len(CRITERIA)} criteria passed\n")
    return 0 if not failed else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", "-m", help="map spec JSON file")
    common.add_argument("--f", help="map spec JSON for F")
    common.add_argument("--h", help="map spec JSON for H")
    common.add_argument("--point", nargs=2, type=float, metavar=("X", "Y"), help="real-slice point")
    common.add_argument("--point-c", nargs=4, type=float, metavar=("XR", "XI", "YR", "YI"), help="complex point")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", "-o", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "pgm", "json", "text"), default="text")

    parser = argparse.ArgumentParser(prog="henon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    add("compose", cmd_compose, "chain spec for F o H")
    p = add("expand", cmd_expand, "expand a chain into coordinate polynomials")
    p.add_argument("--cap", type=int, default=64)
    add("normalize-square", cmd_normalize_square, "normal form of H^2")
    add("normalize-chain", cmd_normalize_chain, "normal form of a chain with all c = 0")
    add("fix-origin", cmd_fix_origin, "rewrite a chain fixing 0 so every c = 0 and p(0) = 0")
    add("twist-group", cmd_twist_group, "roots of unity eta with eta p(eta y) = p(y) for every factor")
    p = add("green", cmd_green, "Green function estimate at a point")
    p.add_argument("--sign", choices=("plus", "minus", "max"), default="plus")
    add("classify", cmd_classify, "escape classification of a point")
    p = add("verify-domination", cmd_verify_domination, "certify G- < G+ near the y-axis and G+ < G- near the x-axis")
    p.add_argument("--r0", type=float, default=1e3)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--figure", help="write a G+ vs G- scatter plot (PNG)")
    p = add("render", cmd_render, "rasterize a grid to CSV or 16-bit PGM")
    p.add_argument("--mode", choices=[m.value for m in GridMode], default="KMembership")
    p.add_argument("--center", nargs=2, type=float, default=[0.0, 0.0])
    p.add_argument("--width", type=float, default=5.0)
    p.add_argument("--height", type=float, default=5.0)
    p.add_argument("--res", nargs=2, type=int, default=[128, 128], metavar=("NX", "NY"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--slice", nargs=12, type=float, default=None,
                   metavar="V", help="base, u, v as six complex numbers (re im pairs)")
    p.add_argument("--figure", help="also write a PNG figure of the grid")
    p = add("fixed-points", cmd_fixed_points, "fixed points of H or H^2")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    add("twist", cmd_twist, "find eta with F o H = C_eta o H o F")
    p = add("commute", cmd_commute, "check F o H = H o F")
    p.add_argument("--squares", action="store_true", help="check F^2 o H^2 = H^2 o F^2 instead")
    add("rigidity", cmd_rigidity, "full rigidity report for (F, H)")
    add("verify", cmd_verify, "run the built-in acceptance fixtures")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except (ParseError, ValidationError, PreconditionViolated, UsageError, ExpansionTooLarge, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SelfCheckFailed, Exception) as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
