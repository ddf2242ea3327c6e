"""Command-line front end.

Usage::

    hlmax space build --family xtilde1 --branches 2
    hlmax maximal eval --family xtilde1 --branches 2 --operator centered --f delta:x1
    hlmax scan witness --family xhat --p0 2 --p 1 --operator centered --kind weak --n-max 40
    hlmax verify bounds --family xtilde1 --p 1 --kind weak --trials 10000 --seed 42 --branches 12
    hlmax norm ascend --family xtilde1 --branches 12 --p 1 --restarts 32
    hlmax plan theorem1 --psc "[1,inf]" --pwc "[1,inf]" --ps "(1,inf]" --pw "[1,inf]"
    hlmax reproduce prop3 --n-max 20

Every command writes its tables (CSV plus a JSON mirror) and a
``manifest.json`` into ``--out-dir``.  Exit status is 0 when every asserted
inequality held, 1 when one failed (a counterexample dump is written next to
the tables) and 2 on usage errors.

``--config FILE`` reads a JSON object of flag values (``{"family": "xhat",
"p0": "2"}``); flags given on the command line take precedence.  The default
precision for inexact values comes from ``HLMAX_PRECISION``.
"""
from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from pathlib import Path

import gmpy2
import numpy as np

from . import __version__
from . import numeric as num
from .balls import catalog
from .exceptions import HlmaxError, UnknownBoundError
from .families import (
    FAMILIES, Family, analytic_bound, make_space, scan_space, trials_on_space,
)
from .maximal import CENTERED, NONCENTERED, OPERATORS, maximal
from .norms import KINDS, STRONG, WEAK, ascend_norm
from .planner import Quadruple, check_manifest, plan, realize, validate
from .space import TestFunction, halving_defects

COLUMNS = ["family", "p0", "n_or_trial", "p", "operator", "kind",
           "ratio_num", "ratio_denom_or_float", "analytic_bound", "passed", "exact"]


# output helpers -------------------------------------------------------------


def ratio_fields(x) -> dict:
    """Split a Scalar into the two ratio columns: p/q when exact, decimal otherwise."""
    if num.is_exact(x):
        return {"ratio_num": str(x.numerator), "ratio_denom_or_float": str(x.denominator), "exact": "true"}
    return {"ratio_num": "", "ratio_denom_or_float": num.to_text(x), "exact": "false"}


def ratio_row(fam: Family, label, rep, bound, passed) -> dict:
    row = {
        "family": fam.name,
        "p0": num.exponent_text(fam.p0),
        "n_or_trial": str(label),
        "p": num.exponent_text(rep.p),
        "operator": rep.operator,
        "kind": rep.kind,
        "analytic_bound": "" if bound is None else num.to_text(bound),
        "passed": "true" if passed else "false",
    }
    row.update(ratio_fields(rep.power_ratio))
    return row


class Output:
    """Collects tables and writes them with a run manifest."""

    def __init__(self, out_dir: str, command: str, params: dict):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.params = params
        self.files = []
        self.passed = True
        self.notes = []

    def table(self, name: str, rows: list, columns: list = COLUMNS):
        path = self.dir / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({c: r.get(c, "") for c in columns})
        (self.dir / f"{name}.json").write_text(json.dumps(rows, indent=1) + "\n")
        self.files += [path.name, f"{name}.json"]
        return path

    def document(self, name: str, doc) -> Path:
        path = self.dir / name
        path.write_text(json.dumps(doc, indent=1) + "\n")
        self.files.append(path.name)
        return path

    def fail(self, note: str, dump=None):
        self.passed = False
        self.notes.append(note)
        if dump is not None:
            path = self.document("counterexample.json", dump)
            print(f"counterexample written to {path}", file=sys.stderr)

    def finish(self) -> int:
        manifest = {
            "command": self.command,
            "parameters": self.params,
            "seed": self.params.get("seed"),
            "precision_bits": num.get_precision(),
            "rtol": num.to_text(num.get_rtol()),
            "passed": self.passed,
            "notes": self.notes,
            "outputs": self.files,
            "versions": {
                "hlmax": __version__,
                "python": platform.python_version(),
                "gmpy2": gmpy2.version(),
                "numpy": np.__version__,
            },
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
        print(f"{'PASS' if self.passed else 'FAIL'}: outputs in {self.dir}")
        return 0 if self.passed else 1


def _family(args) -> Family:
    p0 = getattr(args, "p0", None)
    return Family(args.family, p0)


def _n_values(args):
    return range(args.n_min, args.n_max + 1)


# commands -------------------------------------------------------------------


def cmd_space_build(args, out: Output) -> None:
    fam = _family(args)
    space = make_space(fam, args.branches)
    out.document("space.json", space.to_dict())
    balls = [{"class": b.kind, "members": b.names(space)} for b in catalog(space)]
    out.document("catalog.json", balls)
    defects = halving_defects(space)
    if defects:
        out.fail(f"branch masses do not halve at {defects}")
    print(f"{fam}: {space.size} points, {len(balls)} balls, total mass {num.to_text(space.total_mass)}")


def _parse_f(space, spec: str | None, path: str | None) -> TestFunction:
    if path:
        return TestFunction.from_mapping(space, json.loads(Path(path).read_text()))
    spec = spec or "const:1"
    kind, _, arg = spec.partition(":")
    if kind == "const":
        return TestFunction.constant(space, num.parse_rational(arg or "1"))
    if kind == "delta":
        return TestFunction.delta(space, arg)
    if kind == "indicator":
        return TestFunction.indicator(space, [a for a in arg.split(",") if a])
    if kind == "root":
        return TestFunction.delta(space, space.branch(int(arg)).root)
    raise HlmaxError(f"unknown function spec {spec!r}; use const:c, delta:x1, indicator:x1,x11 or root:n")


def cmd_maximal_eval(args, out: Output) -> None:
    fam = _family(args)
    space = make_space(fam, args.branches)
    f = _parse_f(space, args.f, args.f_file)
    res = maximal(space, f, args.operator)
    rows = []
    for k, pt in enumerate(space.points):
        v = res.values[k]
        if v < f.values[k]:
            out.fail(f"maximal value below f at {pt}")
        rows.append({
            "point": str(pt),
            "f": num.to_text(f.values[k]),
            "value": num.to_text(v),
            "exact": "true" if num.is_exact(v) else "false",
            "ball_class": res.witnesses[k].kind,
            "ball_members": " ".join(res.witnesses[k].names(space)),
        })
    out.table("maximal", rows, ["point", "f", "value", "exact", "ball_class", "ball_members"])


def _scan(out: Output, fam: Family, p, operator, kind, n_values, name="scan", space=None):
    space = space or make_space(fam, max(n_values))
    res = scan_space(space, fam, p, operator, kind, n_values)
    rows = [ratio_row(fam, r.n, r.report, r.bound.value, r.passed) for r in res.rows]
    out.table(name, rows)
    if not res.passed:
        out.fail(f"{name}: a delta-witness ratio fell below its analytic bound")
    summary = res.summary()
    print(f"{name}: {fam} {operator} {kind} p={num.exponent_text(res.p)}: "
          f"{summary['rows']} rows, passed={summary['passed']}, last ratio {summary['last']}")
    return res


def cmd_scan_witness(args, out: Output) -> None:
    fam = _family(args)
    n_values = list(_n_values(args))
    space = make_space(fam, max(args.branches or 0, max(n_values)))
    _scan(out, fam, args.p, args.operator, args.kind, n_values, space=space)


def _trials(out: Output, fam: Family, p, operator, kind, trials, seed, N, name="trials"):
    constant = analytic_bound(fam, None, p, operator, kind, which="upper")
    rows = []

    def record(label, rep, ok):
        rows.append(ratio_row(fam, label, rep, constant.value, ok))

    rep = trials_on_space(make_space(fam, N), constant, p, operator, kind, trials, seed, on_report=record)
    out.table(name, rows)
    if rep.violations:
        out.fail(f"{name}: ratio exceeded {constant.formula}", rep.violations[0])
    print(f"{name}: {fam} {operator} {kind} p={num.exponent_text(rep.p)}: {rep.checked} functions, "
          f"max ratio {num.to_float(rep.max_ratio):.6g} vs constant {num.to_float(constant.value):.6g}")
    return rep


def cmd_verify_bounds(args, out: Output) -> None:
    _trials(out, _family(args), args.p, args.operator, args.kind, args.trials, args.seed, args.branches)


def cmd_norm_ascend(args, out: Output) -> None:
    fam = _family(args)
    space = make_space(fam, args.branches)
    rep = ascend_norm(space, args.p, args.operator, args.kind, restarts=args.restarts, seed=args.seed)
    try:
        bound = analytic_bound(fam, None, args.p, args.operator, args.kind, which="upper")
    except UnknownBoundError:
        bound = None
    ok = bound is None or num.le(rep.power_ratio, bound.value)
    out.table("ascent", [ratio_row(fam, "ascent", rep, None if bound is None else bound.value, ok)])
    out.document("ascent_witness.json", rep.f.to_dict())
    if not ok:
        out.fail("ascent exceeded the proved constant", {"f": rep.f.to_dict()})
    print(f"ascent: best ratio {num.to_float(rep.power_ratio):.6g}"
          + ("" if bound is None else f" (constant {num.to_float(bound.value):.6g})"))


def cmd_plan_theorem1(args, out: Output) -> None:
    q = Quadruple.parse(args.psc, args.ps, args.pwc, args.pw)
    bad = validate(q)
    if bad:
        out.document("plan.json", {"quadruple": q.to_dict(), "violations": bad})
        out.fail("quadruple violates " + ", ".join(bad))
        print(f"invalid quadruple {q}: violates {', '.join(bad)}")
        return
    recipe = plan(q)
    doc = {"quadruple": q.to_dict(), "recipe": recipe.to_dict()}
    print(f"recipe (case {recipe.case}): {recipe}")
    if args.check:
        real = realize(recipe, args.branches)
        results = check_manifest(real, trials=args.trials, seed=args.seed)
        doc["manifest"] = [dict(r.check.to_dict(), passed=r.passed, detail=r.detail) for r in results]
        for r in results:
            print(f"  {'ok  ' if r.passed else 'FAIL'} {r.check.describe()}")
            if not r.passed:
                out.fail(r.check.describe(), r.detail)
    else:
        doc["manifest"] = [c.to_dict() for c in realize(recipe, 1).manifest]
    out.document("plan.json", doc)


# reproduce ------------------------------------------------------------------

# witness scans and constant trials run by each reproduce subcommand:
# (family, default p0, [(p, operator, kind, default n_max)], [(p, operator, kind, default N)])
REPRODUCTIONS = {
    "prop2": (
        "xhat", "2",
        [("1", CENTERED, WEAK, 40)],
        [("p0", CENTERED, STRONG, 10), ("p0", NONCENTERED, STRONG, 10)],
    ),
    "prop3": ("xtilde1", None, [("1", CENTERED, STRONG, 20)], [("1", NONCENTERED, WEAK, 12)]),
    "prop4": ("xtilde", "2", [("p0", CENTERED, STRONG, 25)], [("p0", NONCENTERED, WEAK, 10)]),
    "prop5": (
        "yhat", "2",
        [("1", NONCENTERED, WEAK, 40)],
        [("1", CENTERED, STRONG, 10), ("p0", NONCENTERED, STRONG, 10)],
    ),
    "prop6": (
        "ytilde1", None,
        [("1", NONCENTERED, STRONG, 20)],
        [("1", NONCENTERED, WEAK, 12), ("1", CENTERED, STRONG, 12)],
    ),
    "prop7": (
        "ytilde", "2",
        [("p0", NONCENTERED, STRONG, 25)],
        [("p0", NONCENTERED, WEAK, 10), ("1", CENTERED, STRONG, 10)],
    ),
}


def cmd_reproduce(args, out: Output) -> None:
    name_, default_p0, scans, trials = REPRODUCTIONS[args.prop]
    fam = Family(name_, args.p0 if args.p0 is not None else default_p0)
    for k, (p, op, kind, n_max) in enumerate(scans):
        p = fam.p0 if p == "p0" else p
        top = args.n_max or n_max
        _scan(out, fam, p, op, kind, list(range(1, top + 1)), name=f"{args.prop}_scan{k}")
    for k, (p, op, kind, N) in enumerate(trials):
        p = fam.p0 if p == "p0" else p
        _trials(out, fam, p, op, kind, args.trials, args.seed, args.branches or N, name=f"{args.prop}_trials{k}")


# parser ---------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, seed=True):
    p.add_argument("--out-dir", default="hlmax-out", help="directory for tables and manifest")
    p.add_argument("--precision", type=int, default=None,
                   help="mantissa bits for inexact values (default: $HLMAX_PRECISION or 160)")
    p.add_argument("--config", default=None, help="JSON file of flag values")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def _family_args(p, branches_default=None):
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--p0", default=None, help='rational exponent like "3/2", or "inf"')
    p.add_argument("--branches", "-N", type=int, default=branches_default, help="truncation N")


def _type_args(p, p_required=True):
    p.add_argument("--p", required=p_required, default=None, help='rational exponent like "2", or "inf"')
    p.add_argument("--operator", choices=OPERATORS, default=NONCENTERED)
    p.add_argument("--kind", choices=KINDS, default=WEAK)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hlmax", description="Exact maximal operators on non-doubling truncated spaces.")
    parser.add_argument("--version", action="version", version=f"hlmax {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    g = groups.add_parser("space", help="build spaces").add_subparsers(dest="action", required=True)
    p = g.add_parser("build", help="build a family's truncation and export it with its ball catalog")
    _family_args(p, 3)
    _common(p, seed=False)
    p.set_defaults(run=cmd_space_build)

    g = groups.add_parser("maximal", help="evaluate maximal functions").add_subparsers(dest="action", required=True)
    p = g.add_parser("eval", help="evaluate M or M^c of one function at every point")
    _family_args(p, 3)
    p.add_argument("--operator", choices=OPERATORS, default=NONCENTERED)
    p.add_argument("--f", default=None, help="const:c | delta:x1 | indicator:x1,x11 | root:n")
    p.add_argument("--f-file", default=None, help="JSON mapping point name -> value")
    _common(p, seed=False)
    p.set_defaults(run=cmd_maximal_eval)

    g = groups.add_parser("scan", help="witness scans").add_subparsers(dest="action", required=True)
    p = g.add_parser("witness", help="delta-at-root ratios against the analytic lower bound")
    _family_args(p)
    _type_args(p)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=20)
    _common(p, seed=False)
    p.set_defaults(run=cmd_scan_witness)

    g = groups.add_parser("verify", help="constant trials").add_subparsers(dest="action", required=True)
    p = g.add_parser("bounds", help="random and structured trials against a proved constant")
    _family_args(p, 10)
    _type_args(p)
    p.add_argument("--trials", type=int, default=1000)
    _common(p)
    p.set_defaults(run=cmd_verify_bounds)

    g = groups.add_parser("norm", help="operator-norm lower bounds").add_subparsers(dest="action", required=True)
    p = g.add_parser("ascend", help="multi-start coordinate ascent")
    _family_args(p, 8)
    _type_args(p)
    p.add_argument("--restarts", type=int, default=8)
    _common(p)
    p.set_defaults(run=cmd_norm_ascend)

    g = groups.add_parser("plan", help="exponent-set planning").add_subparsers(dest="action", required=True)
    p = g.add_parser("theorem1", help="validate a quadruple and print its construction recipe")
    for flag in ("--psc", "--ps", "--pwc", "--pw"):
        p.add_argument(flag, required=True, help='"inf", "[p0,inf]" or "(p0,inf]"')
    p.add_argument("--check", action="store_true", help="realize the recipe and run its manifest checks")
    p.add_argument("--branches", "-N", type=int, default=12)
    p.add_argument("--trials", type=int, default=4)
    _common(p)
    p.set_defaults(run=cmd_plan_theorem1)

    g = groups.add_parser("reproduce", help="reproduction runs, one per construction").add_subparsers(dest="prop", required=True)
    for prop in REPRODUCTIONS:
        p = g.add_parser(prop, help=f"witness scan and constant trials for {prop}")
        p.add_argument("--p0", default=None)
        p.add_argument("--n-max", type=int, default=None)
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--branches", "-N", type=int, default=None, help="truncation for the trials")
        _common(p)
        p.set_defaults(run=cmd_reproduce)
    return parser


def _config_argv(path: str) -> list:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise HlmaxError("config file must hold a JSON object")
    argv = []
    for key, value in doc.items():
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif value is False or value is None:
            continue
        else:
            argv += [flag, str(value)]
    return argv


def _split_config(argv: list):
    for k, a in enumerate(argv):
        if a == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    config = _split_config(argv)
    if config:
        try:
            extra = _config_argv(config)
        except (OSError, ValueError, HlmaxError) as exc:
            parser.error(f"cannot read config {config}: {exc}")
        # subcommand words first, config flags next, explicit flags last (they win)
        head = []
        rest = list(argv)
        while rest and len(head) < 2 and not rest[0].startswith("-"):
            head.append(rest.pop(0))
        argv = head + extra + rest
    args = parser.parse_args(argv)
    if args.precision is not None and args.precision < num.MIN_PRECISION:
        parser.error(f"--precision must be at least {num.MIN_PRECISION} bits")
    old = num.get_precision()
    if args.precision is not None:
        num.set_precision(args.precision)
    params = {k: v for k, v in vars(args).items() if k != "run"}
    command = " ".join(str(x) for x in (params.get("group"), params.get("action") or params.get("prop")))
    try:
        out = Output(args.out_dir, command, params)
        args.run(args, out)
        return out.finish()
    except (HlmaxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        num.set_precision(old)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
