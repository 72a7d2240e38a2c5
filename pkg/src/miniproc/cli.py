"""``miniproc`` command-line front end.

Exit codes follow sysexits where one applies; usage errors keep
argparse's conventional 2.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence, TextIO

from .analysis import analyze
from .runtime import EvalError, eval_program, format_value
from .syntax import SyntaxFailure, dump_ast, parse, tokenize


class ExitCode(IntEnum):
    OK = 0
    USAGE = 2
    DATAERR = 65  # lexical, syntax or static error
    SOFTWARE = 70  # runtime error
    IOERR = 74


_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9]*\??")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    command: str
    input_path: str
    entry: str = "main"
    fuel: int | None = None
    trace: bool = False
    warnings_as_errors: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid fuel {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("fuel must be at least 1")
    return n


def _identifier(text: str) -> str:
    if not _IDENT.fullmatch(text):
        raise argparse.ArgumentTypeError(f"invalid procedure name {text!r}")
    return text


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="miniproc",
        usage="miniproc (run|check|ast) [--entry NAME] [--fuel N] [--trace] [--werror] (FILE|-)",
        description="Lex, parse, check and run miniproc programs.",
        add_help=False,
    )
    parser.add_argument("command", choices=["run", "check", "ast"])
    parser.add_argument("input_path", metavar="FILE")
    parser.add_argument("--entry", type=_identifier, default="main")
    parser.add_argument("--fuel", type=_positive, default=None)
    parser.add_argument("--trace", action="store_true")
    parser.add_argument("--werror", dest="warnings_as_errors", action="store_true")
    return parser


def parse_args(argv: Sequence[str]) -> CliConfig:
    """Raises :class:`UsageError` on anything but the documented flags."""
    ns = _build_parser().parse_args(list(argv))
    return CliConfig(
        command=ns.command,
        input_path=ns.input_path,
        entry=ns.entry,
        fuel=ns.fuel,
        trace=ns.trace,
        warnings_as_errors=ns.warnings_as_errors,
    )


def _read(path: str, stdin: TextIO) -> str:
    if path == "-":
        return stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def run_command(
    config: CliConfig,
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
    stdin: TextIO | None = None,
) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    stdin = stdin or sys.stdin

    try:
        source = _read(config.input_path, stdin)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error IO {config.input_path}: {exc}", file=stderr)
        return ExitCode.IOERR

    try:
        program = parse(tokenize(source))
    except SyntaxFailure as exc:
        print(exc.diagnostic.render(), file=stderr)
        return ExitCode.DATAERR

    if config.command == "ast":
        stdout.write(dump_ast(program))
        return ExitCode.OK

    report = analyze(program, config.entry)
    for diag in report.diagnostics:
        print(diag.render(), file=stderr)
    if report.errors or (config.warnings_as_errors and report.warnings):
        return ExitCode.DATAERR
    if config.command == "check":
        return ExitCode.OK

    try:
        value, _ = eval_program(
            program, config.entry, fuel=config.fuel, trace=stderr if config.trace else False
        )
    except EvalError as exc:
        print(exc.render(), file=stderr)
        return ExitCode.SOFTWARE
    print(format_value(value), file=stdout)
    return ExitCode.OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(_build_parser().format_usage().rstrip(), file=sys.stderr)
        print(f"miniproc: error: {exc}", file=sys.stderr)
        return ExitCode.USAGE
    return int(run_command(config))


if __name__ == "__main__":
    sys.exit(main())
