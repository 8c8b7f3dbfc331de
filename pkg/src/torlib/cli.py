"""Command-line front end.

Commands
--------
analyze   FILE    fixed lattices, decomposition blocks, coboundary solution
liberate  FILE    decide liberability, write the witness or certificate
minimal   FILE    minimality classification (linear) or irrationality (affine)
obstruct  FILE    search for a commutator obstruction
simulate  FILE    numeric orbit dump (CSV) with optional figure rendering

Exit codes: 0 success / liberated; 2 schema or validation error;
3 not liberated (trivial fix, obstruction found, not liberable);
4 undecided.  All outputs are deterministic given the flags.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from .action_model import AffineZpAction, ZpAction, linear_as_affine
from .cohomology import solve_coboundary_rational
from .decomposition import FixTrivialError, decompose, unipotent_split
from .documents import DocumentError, load_action_document
from .exact_linalg import mat_to_json
from .liberation import (
    Liberated,
    LiberationError,
    NotLiberated,
    detect_obstruction,
    liberate,
)
from .minimality import MinimalityError, classify_minimal_T3, is_minimal
from .numeric_oracle import (
    StateSpaceCapError,
    finite_orbit_search,
    instantiate,
    orbit_min_return,
    orbit_points,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NOT_LIBERATED = 3
EXIT_UNKNOWN = 4


def _emit(payload: dict, args, render_text) -> None:
    if args.output == "json":
        print(json.dumps(payload, indent=2))
    else:
        render_text(payload)


# ------------------------------------------------------------------ analyze

def cmd_analyze(args) -> int:
    action = load_action_document(args.file)
    linear = action.linear if isinstance(action, AffineZpAction) else action
    fix = linear.fix_set()
    dual = linear.dual_fix_set()
    payload = {
        "p": linear.p,
        "q": linear.q,
        "unipotent": linear.is_unipotent(),
        "fix": {"rank": fix.rank, "basis": [list(v) for v in fix.basis]},
        "dual_fix": {"rank": dual.rank, "basis": [list(v) for v in dual.basis]},
        "decomposition": None,
        "coboundary": None,
    }
    if fix.rank == 0:
        payload["note"] = "fix trivial: not the linear part of any free " \
                          "affine action"
    else:
        dec = decompose(linear)
        payload["decomposition"] = dec.to_json()
        sol = solve_coboundary_rational(dec)
        payload["coboundary"] = {
            "W0": mat_to_json(sol.W0),
            "integral": mat_to_json(sol.integral) if sol.integral is not None
            else None,
        }

    def render(p):
        print(f"action: p={p['p']} q={p['q']} "
              f"unipotent={'yes' if p['unipotent'] else 'no'}")
        print(f"fix rank {p['fix']['rank']}: {p['fix']['basis']}")
        print(f"dual fix rank {p['dual_fix']['rank']}: {p['dual_fix']['basis']}")
        if p["decomposition"] is None:
            print(p.get("note", ""))
            return
        d = p["decomposition"]
        print(f"block sizes: q1={d['q1']} (unipotent) q2={d['q2']} "
              "(fixed-point free)")
        print(f"P = {d['P']}")
        print(f"A1 = {d['A1']}")
        print(f"A2 = {d['A2']}")
        print(f"V  = {d['V']}")
        c = p["coboundary"]
        print(f"W0 = {c['W0']}")
        if c["integral"] is None:
            print("integral coboundary: absent (rational only)")
        else:
            print(f"integral coboundary: {c['integral']}")

    _emit(payload, args, render)
    return EXIT_OK


# ------------------------------------------------------------------ liberate

def cmd_liberate(args) -> int:
    action = load_action_document(args.file)
    if isinstance(action, AffineZpAction):
        raise DocumentError("liberate expects a linear action document")
    result = liberate(action, box=args.box,
                      obstruction_box=args.obstruction_box)
    payload = result.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    def render(p):
        print(f"status: {p['status']}")
        if p["status"] == "liberated":
            print(f"witness symbols: {p['action']['symbols']}")
            print(f"witness translations: {p['action']['translations']}")
            print(f"certificate strata: {len(p['certificate']['strata'])}")
            for st in p["certificate"]["strata"]:
                print(f"  - {st['description']}")
        elif p["status"] == "not_liberated":
            print(f"obstruction: {p['obstruction']}")
        else:
            print(f"reason: {p['reason']}")

    _emit(payload, args, render)
    if isinstance(result, Liberated):
        return EXIT_OK
    if isinstance(result, NotLiberated):
        return EXIT_NOT_LIBERATED
    return EXIT_UNKNOWN


# ------------------------------------------------------------------ minimal

def cmd_minimal(args) -> int:
    action = load_action_document(args.file)
    if isinstance(action, AffineZpAction):
        verdict = is_minimal(action)
        payload = {"irrationality_condition": verdict}
        _emit(payload, args,
              lambda p: print("irrationality condition: "
                              + ("satisfied (minimal)" if verdict
                                 else "violated (not minimal)")))
        return EXIT_OK if verdict else EXIT_NOT_LIBERATED
    result = classify_minimal_T3(action, box=args.box)
    payload = result.to_json()

    def render(p):
        print(f"classification: {p['kind']}"
              + (f" (case {p['case']})" if p.get("case") else ""))
        if p.get("reason"):
            print(f"reason: {p['reason']}")
        if p.get("action"):
            print(f"witness symbols: {p['action']['symbols']}")
            print(f"witness translations: {p['action']['translations']}")

    _emit(payload, args, render)
    if result.kind == "not_liberable":
        return EXIT_NOT_LIBERATED
    if result.kind == "unknown":
        return EXIT_UNKNOWN
    return EXIT_OK


# ------------------------------------------------------------------ obstruct

def cmd_obstruct(args) -> int:
    action = load_action_document(args.file)
    if isinstance(action, AffineZpAction):
        raise DocumentError("obstruct expects a linear action document")
    split = unipotent_split(action)
    obs = detect_obstruction(split, box=args.box)
    if obs is None:
        payload = {"obstruction": None, "box": args.box}
        _emit(payload, args,
              lambda p: print(f"none (searched box {args.box}; absence is "
                              "not a proof of liberability)"))
        return EXIT_OK
    payload = {"obstruction": obs.to_json(), "box": args.box}

    def render(p):
        o = p["obstruction"]
        print(f"obstruction found: ell0={o['ell0']} ell1={o['ell1']} "
              f"ell2={o['ell2']}")
        print(f"star commutator: {o['star_commutator']}")

    _emit(payload, args, render)
    return EXIT_NOT_LIBERATED


# ------------------------------------------------------------------ simulate

def _parse_assignment(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise DocumentError(f"bad --assign {pair!r}, expected name=value")
        name, val = pair.split("=", 1)
        try:
            if "." in val or "e" in val.lower():
                out[name] = float(val)
            else:
                out[name] = Fraction(val)
        except (ValueError, ZeroDivisionError) as exc:
            raise DocumentError(f"bad --assign value {val!r}: {exc}") from exc
    return out


def cmd_simulate(args) -> int:
    action = load_action_document(args.file)
    affine = action if isinstance(action, AffineZpAction) \
        else linear_as_affine(action)
    ell = tuple(int(x) for x in args.ell.split(","))
    if len(ell) != affine.p:
        raise DocumentError(f"--ell needs {affine.p} components")
    assignment = _parse_assignment(args.assign)
    rng = random.Random(args.seed)
    used = {n for t in affine.trans for x in t for n, _ in x.coeffs}
    for name in sorted(used - set(assignment)):
        # unassigned symbols get seeded floats; advisory mode only
        assignment[name] = rng.random()
    num = instantiate(affine, assignment)
    if args.x0:
        x0 = tuple(float(v) for v in args.x0.split(","))
    else:
        x0 = tuple(0.0 for _ in range(affine.q))
    points = orbit_points(num, ell, x0, args.iters)
    import numpy as np
    deltas = np.abs(points[1:] - points[0]) % 1.0
    dists = np.minimum(deltas, 1.0 - deltas).max(axis=1)
    lines = ["step," + ",".join(f"x{i + 1}" for i in range(affine.q)) + ",dist"]
    lines.append("0," + ",".join(f"{v:.12f}" for v in points[0]) + ",0")
    for j in range(1, len(points)):
        lines.append(f"{j}," + ",".join(f"{v:.12f}" for v in points[j])
                     + f",{dists[j - 1]:.12e}")
    csv_text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    best, best_j = orbit_min_return(num, ell, x0, args.iters)
    summary = {"ell": list(ell), "iters": args.iters,
               "min_return": best, "argmin": best_j,
               "mode": "rational" if num.exact else "float"}
    if num.exact:
        try:
            pt = finite_orbit_search(num, ell)
            summary["fixed_point"] = None if pt is None \
                else [str(x) for x in pt]
        except StateSpaceCapError as exc:
            summary["fixed_point"] = f"search capped: {exc}"
    if args.plot:
        from .report import render_orbit_figure
        render_orbit_figure(points, dists, args.plot,
                            title=f"ell = {list(ell)}")
        summary["figure"] = args.plot
    print(f"# min return {best:.3e} at iterate {best_j}"
          + (f"; fixed point: {summary.get('fixed_point')}" if num.exact else ""),
          file=sys.stderr)
    if args.output == "json":
        print(json.dumps(summary, indent=2), file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torlib",
        description="exact analysis of commuting toral automorphism actions")
    parser.add_argument("--output", choices=["json", "text"], default="text",
                        help="report format (default text)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="structure report")
    p_analyze.add_argument("file")
    p_analyze.set_defaults(func=cmd_analyze)

    p_lib = sub.add_parser("liberate", help="decide liberability")
    p_lib.add_argument("file")
    p_lib.add_argument("--box", type=int, default=4,
                       help="freeness verification box (default 4)")
    p_lib.add_argument("--obstruction-box", type=int, default=2)
    p_lib.add_argument("-o", "--out", help="write the result JSON here")
    p_lib.set_defaults(func=cmd_liberate)

    p_min = sub.add_parser("minimal", help="minimality classification")
    p_min.add_argument("file")
    p_min.add_argument("--box", type=int, default=4)
    p_min.set_defaults(func=cmd_minimal)

    p_obs = sub.add_parser("obstruct", help="commutator obstruction search")
    p_obs.add_argument("file")
    p_obs.add_argument("--box", type=int, default=4)
    p_obs.set_defaults(func=cmd_obstruct)

    p_sim = sub.add_parser("simulate", help="numeric orbit simulation")
    p_sim.add_argument("file")
    p_sim.add_argument("--ell", required=True,
                       help="group element, e.g. 1,0")
    p_sim.add_argument("--iters", type=int, default=1000)
    p_sim.add_argument("--assign", action="append", default=[],
                       metavar="NAME=VALUE",
                       help="symbol assignment (rational like 1/3 or float); "
                            "repeatable")
    p_sim.add_argument("--seed", type=int, default=0,
                       help="seed for unassigned symbols (default 0)")
    p_sim.add_argument("--x0", help="starting point, comma separated")
    p_sim.add_argument("--csv", help="write the orbit here instead of stdout")
    p_sim.add_argument("--plot", help="render a PNG figure to this path")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DocumentError, FixTrivialError, LiberationError,
            MinimalityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
