"""Command-line front end: ``sfmj {check,run,trace} FILE``.

Exit status depends only on the outcome category:

==  =========================================
0   success
1   type or well-formedness errors
2   parse error
3   I/O error
4   evaluation stuck, or dispatch failure
5   fuel exhausted
==  =========================================
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import TextIO

from .core import ClassTable, ClassTableError, Expr, bind_class_table
from .dispatch import Mode
from .evaluator import DEFAULT_FUEL, EvalError, FuelExhausted, Stepped, StuckCast, evaluate
from .parser import ParseError, ParsedProgram, SourceProgram, parse_program, pretty
from .typecheck import Diagnostic, ProgramRejected, TypedProgram, check_program, fj_call_site_diagnostics

EXIT_OK = 0
EXIT_TYPE = 1
EXIT_PARSE = 2
EXIT_IO = 3
EXIT_STUCK = 4
EXIT_FUEL = 5


@dataclass(frozen=True)
class CliConfig:
    command: str
    input: str
    mode: Mode = Mode.SFMJ
    strict_casts: bool = False
    fuel: int = DEFAULT_FUEL
    json_output: bool = False


def load_program(text: str, path: str | None = None) -> tuple[ParsedProgram, ClassTable]:
    parsed = parse_program(SourceProgram(text, path))
    return parsed, bind_class_table(parsed.decls)


class _Out:
    def __init__(self, cfg: CliConfig, stream: TextIO):
        self.json = cfg.json_output
        self.stream = stream

    def emit(self, event: str, text: str, **fields) -> None:
        if self.json:
            print(json.dumps({"event": event, **fields}), file=self.stream)
        else:
            print(text, file=self.stream)

    def diagnostic(self, d: Diagnostic) -> None:
        self.emit("diagnostic", str(d), **d.to_json())


def _read(cfg: CliConfig) -> str:
    if cfg.input == "-":
        return sys.stdin.read()
    with open(cfg.input, encoding="utf-8") as fh:
        return fh.read()


def _front(cfg: CliConfig, out: _Out) -> tuple[int, TypedProgram | None]:
    """Read, parse, bind and check. Returns an exit code and the checked program."""
    path = None if cfg.input == "-" else cfg.input
    try:
        text = _read(cfg)
    except (OSError, UnicodeDecodeError) as exc:
        out.emit("error", f"error: cannot read {cfg.input}: {exc}", kind="IOError", message=str(exc))
        return EXIT_IO, None
    try:
        parsed, ct = load_program(text, path)
    except ParseError as exc:
        span = exc.span
        d = Diagnostic("error", exc.kind, exc.message, span, path)
        out.diagnostic(d)
        return EXIT_PARSE, None
    except ClassTableError as exc:
        out.diagnostic(Diagnostic("error", exc.kind, exc.message, exc.span, path))
        return EXIT_TYPE, None
    try:
        typed = check_program(ct, parsed.main, strict=cfg.strict_casts, file=path)
    except ProgramRejected as exc:
        for d in exc.diagnostics:
            out.diagnostic(d)
        return EXIT_TYPE, None
    for w in typed.warnings:
        out.diagnostic(w)
    return EXIT_OK, typed


def cmd_check(cfg: CliConfig, stream: TextIO | None = None) -> int:
    out = _Out(cfg, stream or sys.stdout)
    code, typed = _front(cfg, out)
    if typed is not None:
        out.emit("type", typed.main_type, type=typed.main_type)
    return code


def _execute(cfg: CliConfig, out: _Out, show_steps: bool) -> int:
    code, typed = _front(cfg, out)
    if typed is None:
        return code
    ct, main = typed.table, typed.main
    if cfg.mode == Mode.FJ:
        problems = fj_call_site_diagnostics(ct, main, None if cfg.input == "-" else cfg.input)
        if problems:
            for d in problems:
                out.diagnostic(d)
            return EXIT_STUCK
    try:
        trace = evaluate(ct, main, cfg.fuel, cfg.mode)
    except EvalError as exc:
        out.emit("error", f"error[{exc.kind}]: {exc.message}", kind=exc.kind, message=exc.message)
        return EXIT_STUCK
    if show_steps:
        for i, s in enumerate(trace.steps, 1):
            _emit_step(out, i, s)
    o = trace.outcome
    if isinstance(o, FuelExhausted):
        n = len(trace.steps)
        out.emit("fuel", f"fuel exhausted after {n} steps", steps=n, fuel=o.fuel, expr=pretty(trace.final))
        return EXIT_FUEL
    if isinstance(o, StuckCast):
        stuck = pretty(o.expr)
        out.emit("stuck", f"stuck at failed downcast: {stuck}", cast=stuck, expr=pretty(trace.final))
        return EXIT_STUCK
    value = pretty(o.expr)
    out.emit("value", value, value=value, steps=len(trace.steps))
    return EXIT_OK


def _emit_step(out: _Out, i: int, s: Stepped) -> None:
    expr = pretty(s.expr)
    label = s.branch.label() if s.branch else None
    text = f"{i} {s.rule} {expr}"
    if label:
        text += f"  ; {s.axiom} {label}"
    elif s.axiom != s.rule:
        text += f"  ; {s.axiom}"
    out.emit("step", text, step=i, rule=s.rule, axiom=s.axiom, branch=label, expr=expr)


def cmd_run(cfg: CliConfig, stream: TextIO | None = None) -> int:
    return _execute(cfg, _Out(cfg, stream or sys.stdout), show_steps=False)


def cmd_trace(cfg: CliConfig, stream: TextIO | None = None) -> int:
    return _execute(cfg, _Out(cfg, stream or sys.stdout), show_steps=True)


COMMANDS = {"check": cmd_check, "run": cmd_run, "trace": cmd_trace}


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("fuel must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sfmj", description="Check and run SFMJ programs.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "type-check a program and print the type of its main expression"),
        ("run", "type-check and evaluate a program"),
        ("trace", "evaluate a program, printing every reduction step"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", help=".sfmj file, or - for standard input")
        p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.SFMJ.value)
        p.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL, help="maximum reduction steps")
        p.add_argument("--deny-stupid-casts", action="store_true", help="treat casts between unrelated classes as errors")
        p.add_argument("--json", action="store_true", help="emit JSON lines")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = CliConfig(
        command=args.command,
        input=args.input,
        mode=Mode(args.mode),
        strict_casts=args.deny_stupid_casts,
        fuel=args.fuel,
        json_output=args.json,
    )
    return COMMANDS[cfg.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
