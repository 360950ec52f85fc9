"""Source spans, diagnostics and the compiler's exception hierarchy."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int
    origin: str = "<input>"

    def merge(self, other: Span | None) -> Span:
        if other is None:
            return self
        first = self if self.start <= other.start else other
        return Span(min(self.start, other.start), max(self.end, other.end),
                    first.line, first.col, self.origin)

    def __str__(self) -> str:
        return f"{self.origin}:{self.line}:{self.col}"


NO_SPAN = Span(0, 0, 0, 0)


@dataclass
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: Span | None = None
    types: tuple = field(default_factory=tuple)

    def render(self, color: bool = False) -> str:
        where = f" @{self.span}" if self.span is not None else ""
        head = f"{self.severity}[{self.code}]"
        if color:
            tint = "\x1b[31m" if self.severity == "error" else "\x1b[33m"
            head = f"{tint}{head}\x1b[0m"
        return f"{head}: {self.message}{where}"


class GeminiError(Exception):
    """Base class for every user-facing compile error."""

    code = "E000"
    label = "error"

    def __init__(self, message: str, span: Span | None = None, types: tuple = ()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.types = types

    def diagnostic(self) -> Diagnostic:
        return Diagnostic("error", self.code, f"{self.label}: {self.message}", self.span, self.types)


class LexError(GeminiError):
    code = "E001"
    label = "LexError"


class ParseError(GeminiError):
    code = "E101"
    label = "ParseError"


class TypeMismatch(GeminiError):
    code = "E201"
    label = "TypeError"


class KindError(GeminiError):
    code = "E202"
    label = "KindError"


class OccursError(GeminiError):
    code = "E203"
    label = "OccursError"


class UnboundIdentifier(GeminiError):
    code = "E204"
    label = "UnboundIdentifier"


class NonModuleProgram(GeminiError):
    code = "E205"
    label = "NonModuleProgram"


class UnknownTypeName(GeminiError):
    code = "E206"
    label = "UnknownType"


class EvalError(GeminiError):
    code = "E300"
    label = "EvalError"


class DivisionByZero(EvalError):
    code = "E301"
    label = "DivisionByZero"


class MatchFailure(EvalError):
    code = "E302"
    label = "MatchFailure"


class OutOfRange(EvalError):
    code = "E303"
    label = "OutOfRange"


class LibraryError(EvalError):
    code = "E304"
    label = "LibraryError"


class NonConcreteModule(EvalError):
    code = "E305"
    label = "NonConcreteModule"


class UnsupportedFeature(EvalError):
    code = "E306"
    label = "UnsupportedFeature"


class Overflow(EvalError):
    code = "E307"
    label = "Overflow"


class HardwareError(GeminiError):
    code = "E401"
    label = "HardwareError"


class CombinationalCycle(HardwareError):
    code = "E402"
    label = "CombinationalCycle"


class SubsetError(GeminiError):
    """Raised by the Verilog reader on text outside the emitted subset."""

    code = "E501"
    label = "SubsetError"


class SimulationError(GeminiError):
    code = "E502"
    label = "SimulationError"


class InternalError(Exception):
    """A compiler bug, never a property of the user's program."""
