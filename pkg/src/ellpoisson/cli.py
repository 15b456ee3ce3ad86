"""Command-line front end: ``ellpoisson <command> --n N [options]``."""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from . import casimir as cas
from .brackets import (SCHEMA_VERSION, ClosureViolation, build_table, param_names,
                       split_nine)
from .curvealg import parity_of
from .exactpoly import rational
from .schouten import compatible_space_dim, mixed_jacobiator

COMMANDS = ("table", "split", "jacobi", "compat", "maximality", "casimir",
            "central", "leaf", "export-golden")

GOLDEN_SIZES = (4, 5, 6, 7)


class UsageError(Exception):
    pass


class Report:
    """Result of one command: exit status, JSON payload and a text rendering."""

    def __init__(self, status: int, data: dict, text: str):
        self.status = status
        self.data = data
        self.text = text

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.data, indent=2, sort_keys=True) + "\n"
        return self.text.rstrip("\n") + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ellpoisson",
                                 description="Build and verify the nine compatible quadratic Poisson brackets.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--n", type=int, required=True, help="number of variables (>= 3)")
    ap.add_argument("--degree", type=int, help="bracket degree for maximality (0..4)")
    ap.add_argument("--alpha", help="rational replacing n in the bracket formulas")
    ap.add_argument("--params", help="JSON file of rational parameter values")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes")
    ap.add_argument("--format", choices=("json", "text"), default="text")
    ap.add_argument("--output", help="output file (directory for export-golden)")
    return ap


def load_params(path: str, n: int) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"--params: cannot read {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("--params: expected a JSON object")
    legal = param_names(parity_of(n))
    out = {}
    for k, v in raw.items():
        if k not in legal:
            raise UsageError(f"--params: {k!r} is not a parameter for n={n} (allowed: {', '.join(legal)})")
        try:
            out[k] = rational(v)
        except (TypeError, ValueError, KeyError, ZeroDivisionError) as exc:
            raise UsageError(f"--params: bad value for {k}: {v!r}") from exc
    return out


def _witness(tri) -> dict:
    (i, j, k), poly = tri.first_witness()
    return {"triple": [i, j, k], "poly": poly.to_json(), "text": poly.to_text()}


def _table(args, params) -> tuple:
    """Build the table, or return a failure report on a closure violation."""
    try:
        return build_table(args.n, alpha=args.alpha, params=params, jobs=args.jobs), None
    except ClosureViolation as exc:
        data = {"n": args.n, "status": "closure_violation", "pair": [exc.i, exc.j], "index": exc.index}
        text = f"ClosureViolation: {{x{exc.i}, x{exc.j}}} produces x{exc.index}, outside x0, x2..x{args.n}"
        return None, Report(1, data, text)


def cmd_table(args, params) -> Report:
    t, fail = _table(args, params)
    if fail:
        return fail
    data = t.to_json()
    data["schema_version"] = SCHEMA_VERSION
    return Report(0, data, t.to_text())


def cmd_split(args, params) -> Report:
    if params:
        raise UsageError("--params: split needs the symbolic table")
    t, fail = _table(args, None)
    if fail:
        return fail
    s = split_nine(t)
    data = {"n": args.n, "schema_version": SCHEMA_VERSION, "labels": s.labels(),
            "tables": {label: tab.to_json() for label, tab in zip(s.labels(), s.tables())}}
    lines = []
    for label, tab in zip(s.labels(), s.tables()):
        lines.append(f"== {label}")
        lines.append(tab.to_text())
    return Report(0, data, "\n".join(lines))


def cmd_jacobi(args, params) -> Report:
    t, fail = _table(args, params)
    if fail:
        return fail
    tri = mixed_jacobiator(t, t, jobs=args.jobs)
    nparams = 0 if params else len(param_names(t.parity))  # unset values default to 0
    if tri.is_zero():
        if nparams:
            text = f"Jacobi identity holds identically in {nparams} parameters"
        else:
            text = "Jacobi identity holds for the given parameter values"
        return Report(0, {"n": args.n, "poisson": True, "free_parameters": nparams}, text)
    w = _witness(tri)
    text = "Jacobi identity fails at ({}, {}, {}): {}".format(*w["triple"], w["text"])
    return Report(1, {"n": args.n, "poisson": False, "witness": w}, text)


def cmd_compat(args, params) -> Report:
    if params:
        raise UsageError("--params: compat needs the symbolic table")
    t, fail = _table(args, None)
    if fail:
        return fail
    s = split_nine(t)
    named = list(zip(s.labels(), s.tables()))
    pairs = []
    first = None
    for (la, A), (lb, B) in itertools.combinations(named, 2):
        tri = mixed_jacobiator(A, B, jobs=args.jobs)
        ok = tri.is_zero()
        pairs.append({"pair": [la, lb], "compatible": ok})
        if not ok and first is None:
            first = {"pair": [la, lb], **_witness(tri)}
    bad = [p for p in pairs if not p["compatible"]]
    data = {"n": args.n, "pairs": pairs, "all_compatible": not bad}
    if first:
        data["witness"] = first
        text = "incompatible pair {} / {} at ({}, {}, {}): {}".format(*first["pair"], *first["triple"], first["text"])
        return Report(1, data, text)
    return Report(0, data, f"all {len(pairs)} pairs of the nine brackets are compatible")


def cmd_maximality(args, params) -> Report:
    if args.degree is None:
        raise UsageError("--degree is required for maximality")
    if params:
        raise UsageError("--params: maximality needs the symbolic table")
    t, fail = _table(args, None)
    if fail:
        return fail
    rep = compatible_space_dim(split_nine(t).tables(), args.degree)
    text = (f"n={rep.n} degree={rep.degree}: {rep.unknowns} unknowns, rank {rep.constraint_rank}, "
            f"solution_dim = {rep.solution_dim}")
    return Report(0 if rep.conclusive else 1, rep.to_json(), text)


def _casimir_report(args, central=None, kernel=None, leaf=None, cs=None, status=0, extra=None) -> Report:
    data = {"n": args.n, "casimirs": [c.to_json() for c in cs],
            "central": central, "kernel": kernel, "leaf_homomorphism": leaf}
    data.update(extra or {})
    lines = [f"C{k} = {c.to_text()}" for k, c in enumerate(cs)]
    for key in ("central", "kernel", "leaf_homomorphism"):
        if data[key] is not None:
            lines.append(f"{key}: {'verified' if data[key] else 'FAILED'}")
    if "witness" in data:
        lines.append("witness: " + data["witness"]["text"])
    return Report(status, data, "\n".join(lines))


def _casimirs(args, params) -> list:
    if params:
        raise UsageError("--params: Casimirs are computed symbolically")
    try:
        return cas.casimirs(args.n)
    except cas.CancellationFailure as exc:
        raise RuntimeError(str(exc)) from exc


def cmd_casimir(args, params) -> Report:
    return _casimir_report(args, cs=_casimirs(args, params))


def cmd_central(args, params) -> Report:
    cs = _casimirs(args, params)
    t, fail = _table(args, None)
    if fail:
        return fail
    for k, c in enumerate(cs):
        w = cas.central_witness(t, c)
        if w is not None:
            i, v = w
            extra = {"witness": {"casimir": k, "generator": i, "poly": v.to_json(), "text": v.to_text()}}
            return _casimir_report(args, central=False, cs=cs, status=1, extra=extra)
    return _casimir_report(args, central=True, cs=cs)


def cmd_leaf(args, params) -> Report:
    cs = _casimirs(args, params)
    kernel = cas.verify_kernel(args.n, cas=cs)
    p = min(cas.leaf_size(args.n), 2)
    extra = {"p": p}
    try:
        hom = cas.verify_leaf_homomorphism(args.n, p)
    except cas.DenominatorResidue as exc:
        hom = False
        extra["witness"] = {"pair": list(exc.pair), "poly": exc.residue.to_json(), "text": exc.residue.to_text()}
    status = 0 if kernel and hom else 1
    return _casimir_report(args, kernel=kernel, leaf=hom, cs=cs, status=status, extra=extra)


def golden_payload(n: int, jobs: int = 1) -> dict:
    t = build_table(n, jobs=jobs)
    data = t.to_json()
    data["schema_version"] = SCHEMA_VERSION
    return data


def cmd_export_golden(args, params) -> Report:
    if params or args.alpha is not None:
        raise UsageError("export-golden writes the symbolic default tables only")
    outdir = Path(args.output or f"golden/v{SCHEMA_VERSION}")
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"table_n{args.n}.json"
    path.write_text(json.dumps(golden_payload(args.n, args.jobs), indent=1, sort_keys=True) + "\n")
    return Report(0, {"n": args.n, "written": str(path)}, f"wrote {path}")


HANDLERS = {
    "table": cmd_table, "split": cmd_split, "jacobi": cmd_jacobi, "compat": cmd_compat,
    "maximality": cmd_maximality, "casimir": cmd_casimir, "central": cmd_central,
    "leaf": cmd_leaf, "export-golden": cmd_export_golden,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.n < 3:
            raise UsageError("--n must be at least 3")
        if args.degree is not None and not 0 <= args.degree <= 4:
            raise UsageError("--degree must be in 0..4")
        if args.jobs < 1:
            raise UsageError("--jobs must be positive")
        if args.alpha is not None:
            try:
                args.alpha = rational(args.alpha)
            except (ValueError, ZeroDivisionError) as exc:
                raise UsageError(f"--alpha: not a rational: {args.alpha!r}") from exc
        params = load_params(args.params, args.n) if args.params else None
        report = HANDLERS[args.command](args, params)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ellpoisson: error: {exc}", file=sys.stderr)
        return 2
    out = report.render(args.format)
    if args.output and args.command != "export-golden":
        Path(args.output).write_text(out)
    else:
        stdout.write(out)
    return report.status


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
