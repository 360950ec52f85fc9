"""Command-line driver: ``gemini build``, ``gemini sim`` and ``gemini metatheory``.

Exit status is 0 on success, 1 when the input has errors, and 2 on usage
or internal errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import Diagnostic, GeminiError

EMIT_STAGES = ("tokens", "ast", "typed-ast", "ir", "ir-lowered", "verilog")


def _color_enabled(stream) -> bool:
    if os.environ.get("GEMINI_COLOR") == "0":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def format_diagnostic(d: Diagnostic, color: bool = False) -> str:
    where = f"{d.span}: " if d.span is not None else ""
    head = f"{d.severity}[{d.code}]"
    if color:
        tint = "\x1b[31m" if d.severity == "error" else "\x1b[33m"
        head = f"{tint}{head}\x1b[0m"
    return f"{where}{head}: {d.message}"


def _report(diags, stream=None) -> None:
    stream = stream or sys.stderr
    color = _color_enabled(stream)
    for d in diags:
        print(format_diagnostic(d, color), file=stream)


def _parse_int(text: str) -> int:
    text = text.strip().replace("_", "")
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _parse_inputs(text: str) -> dict:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise argparse.ArgumentTypeError(f"expected name=value, got {part!r}")
        name, value = part.split("=", 1)
        out[name.strip()] = _parse_int(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gemini", description="Compile hardware descriptions to Verilog.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="compile a source file to Verilog")
    b.add_argument("input")
    b.add_argument("-o", "--output", help="output path (default: <stem>.v next to the input)")
    b.add_argument("--module-name", help="Verilog module name (default: the input's stem)")
    b.add_argument("--emit", choices=EMIT_STAGES,
                   help="print an intermediate stage to standard output instead of writing .v")
    b.add_argument("--max-subst-iters", type=int, default=10000,
                   help="iteration cap for applying the substitution environment")
    b.add_argument("--werror", action="store_true", help="treat warnings as errors")

    s = sub.add_parser("sim", help="simulate a source file or emitted Verilog")
    s.add_argument("input")
    s.add_argument("--inputs", type=_parse_inputs, default={}, help="e.g. a=0b10,b=1")
    s.add_argument("--cycles", type=int, help="clock cycles to run (inputs held)")
    s.add_argument("--module-name")

    m = sub.add_parser("metatheory", help="check progress and preservation on generated terms")
    m.add_argument("--seeds", type=int, default=1000)
    m.add_argument("--depth", type=int, default=6)
    m.add_argument("--fuel", type=int, default=100_000)
    m.add_argument("--start", type=int, default=0, help="first seed")
    m.add_argument("--workers", type=int, default=1)
    return p


def _stem(path: str) -> str:
    stem = Path(path).stem
    return stem if stem.isidentifier() else "top"


def cmd_build(args) -> int:
    from .compiler import CompileFailed, compile_source
    from .lexer import tokenize
    from .netlist import dump
    from .parser import desugar, parse
    from .syntax import to_sexpr

    try:
        source = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"gemini: cannot read {args.input}: {exc.strerror}", file=sys.stderr)
        return 1
    name = args.module_name or _stem(args.input)
    try:
        if args.emit == "tokens":
            print("\n".join(t.dump() for t in tokenize(source, args.input)))
            return 0
        if args.emit == "ast":
            print(to_sexpr(desugar(parse(tokenize(source, args.input)))))
            return 0
        if args.emit == "typed-ast":
            from .infer import infer_program
            tree = desugar(parse(tokenize(source, args.input)))
            res = infer_program(tree, max_subst_iters=args.max_subst_iters)
            _report(res.diagnostics)
            if res.errors or (args.werror and res.warnings):
                return 1
            print(to_sexpr(res.tree, typed=True))
            return 0
        comp = compile_source(source, args.input, name, max_subst_iters=args.max_subst_iters,
                              base_dir=str(Path(args.input).parent), out=sys.stdout)
    except GeminiError as exc:
        _report([exc.diagnostic()])
        return 1
    except CompileFailed as exc:
        _report(exc.diagnostics)
        return 1
    _report(comp.warnings)
    if args.werror and comp.warnings:
        return 1
    if args.emit == "ir":
        sys.stdout.write(dump(comp.netlist))
    elif args.emit == "ir-lowered":
        sys.stdout.write(dump(comp.lowered))
    elif args.emit == "verilog":
        sys.stdout.write(comp.verilog)
    else:
        out = args.output or str(Path(args.input).with_suffix(".v"))
        Path(out).write_text(comp.verilog, encoding="utf-8")
    return 0


def _load_netlist(path: str, module_name: str | None):
    from .compiler import compile_source
    from .netsim import read_emitted_verilog
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".v"):
        return read_emitted_verilog(text)
    comp = compile_source(text, path, module_name or _stem(path),
                          base_dir=str(Path(path).parent))
    return comp.lowered


def cmd_sim(args) -> int:
    from .compiler import CompileFailed
    from .hw import bit_width
    from .netsim import simulate
    try:
        n = _load_netlist(args.input, args.module_name)
        result = simulate(n, args.inputs, cycles=args.cycles)
    except OSError as exc:
        print(f"gemini: cannot read {args.input}: {exc.strerror}", file=sys.stderr)
        return 1
    except CompileFailed as exc:
        _report(exc.diagnostics)
        return 1
    except GeminiError as exc:
        _report([exc.diagnostic()])
        return 1
    width = bit_width(n.out_type)
    rows = result if isinstance(result, list) else [result]
    for i, r in enumerate(rows):
        prefix = f"cycle {i}: " if args.cycles is not None else ""
        print(f"{prefix}out=0b{r['out']:0{max(width, 1)}b}")
    return 0


def cmd_metatheory(args) -> int:
    from .metatheory import run_corpus
    summary = run_corpus(range(args.start, args.start + args.seeds), args.depth, args.fuel,
                         workers=args.workers)
    sys.stdout.write(summary.table())
    for f in summary.failures[:20]:
        print(f"seed {f[0]}: {f[1]}: {f[2]}", file=sys.stderr)
    bad = summary.stuck + summary.preservation_violations + summary.disagreements + summary.rejected
    return 1 if bad else 0


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return {"build": cmd_build, "sim": cmd_sim, "metatheory": cmd_metatheory}[args.command](args)
    except Exception as exc:  # noqa: BLE001 - anything else is a compiler bug
        print(f"gemini: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
