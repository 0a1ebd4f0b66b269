"""Command-line interface: ``ramtel {prove,telescope,eval,verify-cert,list}``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import DivergenceError, RamtelError
from .exact import AlgebraicConstant, agreement_digits
from .hyperterm import parse_term
from .numeric import closed_form_value, eval_series, eval_weighted_series
from .prover import (derived_tasks, example_tasks, parse_task_text, prove_pair, series_catalog,
                     verify_z_identity, z_identity)
from .telescope import (boundary_check, find_telescoper, telescoper_from_json,
                        verify_certificate)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _k_range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}")
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError("k-range needs 0 <= A <= B")
    return lo, hi


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _assignment(text: str) -> tuple[str, Fraction]:
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    name, value = text.split("=", 1)
    return name.strip(), _rational(value.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ramtel", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, digits=True):
        if digits:
            sp.add_argument("--digits", type=int, default=60)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--out", type=Path, help="write the report to this file")

    sp = sub.add_parser("prove", help="run a proof task")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--example", help="catalog example: 1-5 or a derived id such as 5b")
    g.add_argument("--task", type=Path, help="task file")
    sp.add_argument("--max-order", type=int, default=6)
    sp.add_argument("--k-range", type=_k_range, default=(0, 20))
    common(sp)

    sp = sub.add_parser("telescope", help="find and verify a telescoper for a kernel")
    sp.add_argument("term", type=Path, help="kernel file")
    sp.add_argument("--max-order", type=int, default=6)
    sp.add_argument("--k-range", type=_k_range, default=(0, 20))
    sp.add_argument("--sum-var")
    sp.add_argument("--rec-var")
    common(sp, digits=False)

    sp = sub.add_parser("eval", help="evaluate a convergent series")
    sp.add_argument("series", nargs="?", help="catalog series id")
    sp.add_argument("--term", type=Path, help="kernel file instead of a catalog id")
    sp.add_argument("--weighted", nargs=3, metavar=("A", "B", "Z0"), type=_rational)
    sp.add_argument("--assign", action="append", type=_assignment, default=[],
                    metavar="NAME=VALUE", help="value for a non-summation variable")
    sp.add_argument("--closed-form", help="compare against e.g. '9*sqrt(7)/pi'")
    common(sp)

    sp = sub.add_parser("verify-cert", help="check a telescoper written by 'telescope --json'")
    sp.add_argument("term", type=Path)
    sp.add_argument("certificate", type=Path)
    sp.add_argument("--k-range", type=_k_range, default=(0, 20))
    common(sp, digits=False)

    sp = sub.add_parser("list", help="list catalog series and tasks")
    common(sp, digits=False)
    return p


def _emit(args, data: dict, text: str) -> None:
    out = json.dumps(data, sort_keys=True, indent=2) + "\n" if args.json else text
    if args.out:
        args.out.write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _report_text(rep) -> str:
    lines = [f"task {rep.task.id} {rep.task.title}".rstrip(), f"status: {rep.status}"]
    for name, t in (("A", rep.telescoper_a), ("B", rep.telescoper_b)):
        if t is not None:
            lines.append(f"telescoper {name}: order {t.order}")
    lines.append(f"operators equal: {rep.operators_equal}")
    if rep.initial_values:
        lines.append("initial values: " + ", ".join(
            f"k={k} {'ok' if eq else 'MISMATCH'}" for k, _, _, eq in rep.initial_values))
    for k, d in rep.carlson_samples:
        lines.append(f"carlson sample k={k}: {d} digits")
    if rep.specialization:
        sp = rep.specialization
        lines.append(f"specialization k={sp['k']}: {sp.get('digitsMatched', 0)} digits, "
                     f"implied closed form {sp.get('impliedClosedForm', '?')}")
    lines.extend(f"note: {d}" for d in rep.diagnostics)
    return "\n".join(lines) + "\n"


def cmd_prove(args) -> int:
    if args.max_order < 1:
        raise UsageError("--max-order must be at least 1")
    kw = dict(max_order=args.max_order, k_check_range=args.k_range, digits=args.digits)
    if args.task:
        try:
            task = parse_task_text(_read(args.task), args.task.stem)
        except RamtelError as exc:
            raise UsageError(str(exc))
        rep = prove_pair(task, **kw)
        ok = rep.status == "fully-validated" or (
            rep.status == "proved-for-integers" and task.specialize is None)
        _emit(args, rep.to_json(), _report_text(rep))
        return EXIT_OK if ok else EXIT_FAIL

    ex = args.example
    tasks = example_tasks()
    if ex in ("4", "5"):
        left, right, meta = z_identity(ex)
        zrep = verify_z_identity(left, right, range(7), also_telescope=True,
                                 max_order=args.max_order)
        reps = [prove_pair(t, **kw) for t in derived_tasks(ex)]
        ok = zrep.ok and all(r.status == "fully-validated" for r in reps)
        data = {"identity": meta["title"], "zIdentity": zrep.to_json(),
                "derived": [r.to_json() for r in reps],
                "status": "fully-validated" if ok else "failed"}
        text = (f"{meta['title']}: exact in z for k=0..6: {all(zrep.equal)}; "
                f"telescoping over Q(z): {zrep.proof.status}\n"
                + "".join(_report_text(r) for r in reps))
        _emit(args, data, text)
        return EXIT_OK if ok else EXIT_FAIL
    if ex not in tasks:
        raise UsageError(f"unknown example {ex!r}; choose from {', '.join(sorted(tasks))}")
    rep = prove_pair(tasks[ex], **kw)
    _emit(args, rep.to_json(), _report_text(rep))
    return EXIT_OK if rep.status == "fully-validated" else EXIT_FAIL


def cmd_telescope(args) -> int:
    if args.max_order < 1:
        raise UsageError("--max-order must be at least 1")
    term = _parse_kernel(args.term)
    t = find_telescoper(term, args.sum_var, args.rec_var, args.max_order)
    if t is None:
        _emit(args, {"telescoper": None}, f"no telescoper up to order {args.max_order}\n")
        return EXIT_FAIL
    rep = boundary_check(term, t, args.k_range, verify_certificate(term, t))
    data = {"telescoper": t.to_json(), "checks": rep.to_json()}
    text = (f"order {t.order}\noperator: {t.operator()}\ncertificate: {t.certificate}\n"
            f"identity {rep.identity_holds}, F(0,k)=0 {rep.boundary_at_zero}, "
            f"tail {rep.tail_vanishes}\n")
    _emit(args, data, text)
    return EXIT_OK if rep.identity_holds else EXIT_FAIL


def cmd_verify_cert(args) -> int:
    term = _parse_kernel(args.term)
    try:
        data = json.loads(_read(args.certificate))
        t = telescoper_from_json(data.get("telescoper", data), term)
    except (ValueError, KeyError, TypeError, RamtelError) as exc:
        raise UsageError(f"bad certificate file: {exc}")
    rep = boundary_check(term, t, args.k_range, verify_certificate(term, t))
    ok = rep.identity_holds and rep.boundary_at_zero and rep.tail_vanishes
    text = (f"identity {rep.identity_holds}, F(0,k)=0 {rep.boundary_at_zero}, "
            f"tail {rep.tail_vanishes}\n")
    _emit(args, rep.to_json(), text)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_eval(args) -> int:
    if (args.series is None) == (args.term is None):
        raise UsageError("give exactly one of a series id or --term")
    closed = None
    if args.series is not None:
        cat = series_catalog()
        if args.series not in cat:
            raise UsageError(f"unknown series {args.series!r}")
        entry = cat[args.series]
        term, closed = entry.kernel, entry.closed_form
    else:
        term = _parse_kernel(args.term)
    if args.closed_form:
        try:
            closed = AlgebraicConstant.parse(args.closed_form)
        except ValueError as exc:
            raise UsageError(str(exc))
    assign = dict(args.assign)
    try:
        if args.weighted:
            a, b, z0 = args.weighted
            res = eval_weighted_series(term, a, b, z0, args.digits, assign)
        else:
            res = eval_series(term, assign, args.digits)
    except DivergenceError as exc:
        sys.stderr.write(f"divergent: {exc}\n")
        return EXIT_FAIL
    data = {"result": res.to_json()}
    text = f"{res.value.to_decimal(args.digits)}\nterms used: {res.terms_used}\n"
    code = EXIT_OK
    if closed is not None:
        d = agreement_digits(res.value, closed_form_value(closed, args.digits), cap=args.digits)
        data["closedForm"] = str(closed)
        data["matchedDigits"] = d
        text += f"matched {d} digits vs {closed}\n"
        if d < args.digits - 2:
            code = EXIT_FAIL
    _emit(args, data, text)
    return code


def cmd_list(args) -> int:
    cat = series_catalog()
    tasks = example_tasks()
    data = {
        "series": [{"id": e.id, "closedForm": str(e.closed_form), "provenance": e.provenance,
                    "kernel": e.source} for e in cat.values()],
        "tasks": [{"id": t.id, "title": t.title, "target": t.target, "anchor": t.anchor}
                  for t in tasks.values()],
    }
    lines = [f"{e.id:16} {str(e.closed_form):24} {e.provenance}" for e in cat.values()]
    lines += [f"task {t.id:4} {t.target or '':8} {t.title}" for t in tasks.values()]
    _emit(args, data, "\n".join(lines) + "\n")
    return EXIT_OK


def _parse_kernel(path: Path):
    try:
        return parse_term(_read(path))
    except RamtelError as exc:
        raise UsageError(f"{path}: {exc}")


COMMANDS = {"prove": cmd_prove, "telescope": cmd_telescope, "eval": cmd_eval,
            "verify-cert": cmd_verify_cert, "list": cmd_list}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "digits", 1) < 1:
        sys.stderr.write("ramtel: --digits must be at least 1\n")
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"ramtel: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"ramtel: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
