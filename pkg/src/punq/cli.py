"""Command-line front end over ``.punq`` files.

Exit codes: 0 success, 1 type rejection, 2 runtime or budget failure,
3 usage error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import __version__
from .checker import Rejection, check, parse_mode, validate
from .corpus import church_source
from .dlal import EtaUndefined, normalize_set, step_domination_check, translate
from .semantics import EvalError, evaluate
from .syntax import ParseError, Program, parse_program, pretty, size
from .types import TypeSyntaxError, parse_type, show_type
from .unitary import MatrixError, QMatrix, classify, extract_matrix, synthesize

SCHEMA = 1
EXIT_OK, EXIT_REJECT, EXIT_RUNTIME, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _range(text: str) -> range:
    try:
        lo, hi = text.split("..")
        r = range(int(lo), int(hi) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range like 1..8, got {text!r}") from None
    if len(r) == 0 or r.start < 0:
        raise argparse.ArgumentTypeError(f"empty or negative range {text!r}")
    return r


def _mode(text: str):
    try:
        return parse_mode(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="punq", description="Check, run and analyse PUNQ programs.")
    p.add_argument("--version", action="version", version=f"punq {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, budget=True):
        sp.add_argument("file", type=Path)
        sp.add_argument("--def", dest="name", help="definition to use (default: main, else the last one)")
        if budget:
            sp.add_argument("--budget", type=int, help="evaluation step budget")

    c = sub.add_parser("check", help="type-check a definition")
    common(c, budget=False)
    c.add_argument("--mode", type=_mode, default=parse_mode("times"), help="empty, times or untyped[:depth]")
    c.add_argument("--type", dest="type", help="check against this type instead of the declared one")
    c.add_argument("--json", action="store_true", help="print the result as JSON")
    c.add_argument("--trace", action="store_true", help="print the full derivation")

    r = sub.add_parser("run", help="evaluate a closed definition")
    common(r)
    r.add_argument("--arg", type=int, help="apply the definition to this Church numeral first")
    r.add_argument("--trace", action="store_true", help="print every step")
    r.add_argument("--json", action="store_true")

    m = sub.add_parser("matrix", help="extract the matrix of a gate")
    common(m)
    m.add_argument("--n", type=int, required=True, help="input qubits")
    m.add_argument("--k", type=int, help="output qubits (default n)")

    s = sub.add_parser("synth", help="write a program realizing an isometry")
    s.add_argument("matrix", type=Path, help="matrix JSON as printed by the matrix command")
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--name", default="U")

    t = sub.add_parser("translate", help="translate to DLAL terms")
    common(t)
    t.add_argument("--arg", type=int, help="apply the definition to this Church numeral first")
    t.add_argument("--trace", action="store_true", help="print the set trace and the domination report")
    t.add_argument("--json", action="store_true")

    b = sub.add_parser("bench", help="sweep a Church-numeral parameter")
    common(b)
    b.add_argument("--range", dest="range", type=_range, default=_range("1..8"))
    b.add_argument("--dlal-max", type=int, default=4, help="largest parameter also run through the translation")
    return p


# ---------------------------------------------------------------------------


def _load(path: Path) -> Program:
    return parse_program(path.read_text(encoding="utf-8"))


def _entry(prog: Program, name: Optional[str]) -> str:
    name = name or prog.main_name
    if name not in prog.defs:
        raise UsageError(f"no definition named {name!r}")
    return name


def _subject(args, prog: Program):
    name = _entry(prog, args.name)
    if getattr(args, "arg", None) is None:
        return prog.defs[name].body
    return _applied(args.file, name, args.arg)


def _applied(path: Path, name: str, n: int):
    text = path.read_text(encoding="utf-8") + f"\ndef applied__ = {name} ({church_source(n)});"
    return parse_program(text).defs["applied__"].body


def cmd_check(args, out: TextIO) -> int:
    prog = _load(args.file)
    name = _entry(prog, args.name)
    d = prog.defs[name]
    ty = parse_type(args.type) if args.type else d.type
    if ty is None:
        raise UsageError(f"definition {name!r} has no declared type; pass --type")
    try:
        deriv = check(d.body, ty, args.mode, prog.hints())
        validate(deriv, args.mode)
    except Rejection as rej:
        out.write(json.dumps({"schema": SCHEMA, "definition": name, **rej.to_dict()}, sort_keys=True) + "\n")
        return EXIT_REJECT
    summary = {"schema": SCHEMA, "status": "accepted", "definition": name, "mode": str(args.mode), **deriv.summary()}
    if args.json:
        out.write(json.dumps(summary, sort_keys=True) + "\n")
    else:
        out.write(f"{name} : {summary['type']}  [accepted, mode {summary['mode']}, {summary['nodes']} rule instances]\n")
    if args.trace:
        out.write(deriv.render() + "\n")
    return EXIT_OK


def cmd_run(args, out: TextIO) -> int:
    prog = _load(args.file)
    res = evaluate(_subject(args, prog), args.budget)
    if args.json:
        out.write(json.dumps({"schema": SCHEMA, "value": str(res.value), "steps": res.steps}, sort_keys=True) + "\n")
    else:
        if args.trace:
            out.write(f"#0 {res.trace.start}\n")
            out.write(res.trace.dump() + ("\n" if res.steps else ""))
        out.write(f"{res.value}\nsteps: {res.steps}\n")
    return EXIT_OK


def cmd_matrix(args, out: TextIO) -> int:
    prog = _load(args.file)
    k = args.k if args.k is not None else args.n
    if args.n < 1 or k < 1:
        raise UsageError("qubit counts must be positive")
    mat = extract_matrix(prog.defs[_entry(prog, args.name)].body, args.n, k, args.budget)
    obj = {"schema": SCHEMA, "n": args.n, "k": k, "classification": classify(mat), "matrix": mat.to_json_obj()}
    out.write(json.dumps(obj, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_synth(args, out: TextIO) -> int:
    obj = json.loads(args.matrix.read_text(encoding="utf-8"))
    mat = QMatrix.from_json_obj(obj.get("matrix", obj))
    term = synthesize(mat)
    n, k = mat.qubits
    ty = f"#B^{n} -o #B^{k}" if n > 1 or k > 1 else "#B -o #B"
    text = f"-- synthesized from {args.matrix.name}\n\ndef {args.name} : {ty} = {pretty(term)};\n"
    args.out.write_text(text, encoding="utf-8")
    out.write(f"wrote {args.out} ({classify(mat)}, {n} -> {k} qubits)\n")
    return EXIT_OK


def cmd_translate(args, out: TextIO) -> int:
    prog = _load(args.file)
    subject = _subject(args, prog)
    s = translate(subject)
    if not args.trace:
        if args.json:
            out.write(json.dumps({"schema": SCHEMA, "size": len(s), "terms": sorted(map(str, s))}) + "\n")
        else:
            out.write(f"{s}\n")
        return EXIT_OK
    trace = normalize_set(s)
    report = step_domination_check(subject, args.budget)
    if args.json:
        out.write(json.dumps({"schema": SCHEMA, **report.to_dict()}, sort_keys=True) + "\n")
    else:
        out.write("\n".join(trace.lines()) + "\n")
        out.write("\n".join(report.lines()) + "\n")
    return EXIT_OK if report.ok else EXIT_RUNTIME


def cmd_bench(args, out: TextIO) -> int:
    prog = _load(args.file)
    name = _entry(prog, args.name)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["param", "punq_steps", "dlal_steps", "value_size"])
    for n in args.range:
        subject = _applied(args.file, name, n)
        res = evaluate(subject, args.budget)
        dlal = ""
        if n <= args.dlal_max:
            dlal = normalize_set(translate(subject)).steps
        w.writerow([n, res.steps, dlal, size(res.value.to_sup())])
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "run": cmd_run,
    "matrix": cmd_matrix,
    "synth": cmd_synth,
    "translate": cmd_translate,
    "bench": cmd_bench,
}


def run_cli(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"punq: usage: {exc}\n")
        return EXIT_USAGE
    except (ParseError, TypeSyntaxError) as exc:
        err.write(f"punq: syntax error: {exc}\n")
        return EXIT_REJECT
    except Rejection as exc:
        err.write(f"punq: rejected: {exc}\n")
        return EXIT_REJECT
    except OSError as exc:
        err.write(f"punq: I/O error: {exc}\n")
        return EXIT_IO
    except (EvalError, EtaUndefined, MatrixError, ValueError) as exc:
        err.write(f"punq: error: {exc}\n")
        return EXIT_RUNTIME


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run_cli(argv))
