"""The full pipeline from source text to Verilog."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

from .codegen_verilog import emit
from .errors import Diagnostic, GeminiError
from .eval_sw import Evaluator, expand_top_module
from .hw import check_program_module, hw_typecheck, lower_records
from .infer import infer_program
from .lexer import tokenize
from .netlist import Netlist
from .parser import desugar, parse


class CompileFailed(Exception):
    def __init__(self, diagnostics: list):
        super().__init__("; ".join(d.message for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass
class Compilation:
    tokens: list
    tree: object
    type: object
    netlist: Netlist
    lowered: Netlist
    verilog: str
    warnings: list = field(default_factory=list)
    output: str = ""  # text printed by the program while staging


def compile_source(source: str, origin: str = "<input>", module_name: str = "top", *,
                   max_subst_iters: int = 10000, base_dir: str | None = None,
                   out=None) -> Compilation:
    """Run every phase; raises CompileFailed with all diagnostics on error."""
    try:
        tokens = tokenize(source, origin)
        tree = desugar(parse(tokens))
    except GeminiError as exc:
        raise CompileFailed([exc.diagnostic()]) from None
    result = infer_program(tree, max_subst_iters=max_subst_iters)
    if result.errors:
        raise CompileFailed(result.diagnostics)
    buf = out if out is not None else io.StringIO()
    ev = Evaluator(out=buf, base_dir=base_dir if base_dir is not None
                   else (os.path.dirname(origin) if os.path.exists(origin) else "."))
    try:
        value = ev.evaluate(result.tree)
        check_program_module(value)
        net = expand_top_module(value, module_name, ev)
        hw_typecheck(net)
        lowered = lower_records(net)
        hw_typecheck(lowered)
        verilog = emit(lowered, module_name)
    except GeminiError as exc:
        raise CompileFailed(result.warnings + [exc.diagnostic()]) from None
    printed = buf.getvalue() if isinstance(buf, io.StringIO) else ""
    return Compilation(tokens, result.tree, result.type, net, lowered, verilog,
                       result.warnings, printed)


def diagnostics_of(exc: Exception) -> list[Diagnostic]:
    if isinstance(exc, CompileFailed):
        return exc.diagnostics
    if isinstance(exc, GeminiError):
        return [exc.diagnostic()]
    raise exc
