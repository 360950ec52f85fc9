"""Syntax trees for expressions, declarations, patterns and type annotations.

Every node carries a span and a type slot.  The slot starts as PLACEHOLDER
and is filled by decoration (binders) and inference (everything else).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any

from .errors import NO_SPAN, Span


class _Placeholder:
    def __repr__(self) -> str:
        return "PLACEHOLDER"


PLACEHOLDER = _Placeholder()


@dataclass(eq=False)
class Node:
    span: Span = field(default=NO_SPAN, kw_only=True, repr=False, compare=False)
    ty: Any = field(default=PLACEHOLDER, kw_only=True, repr=False, compare=False)


# ---------------------------------------------------------------- types (annotations)

@dataclass(eq=False)
class TyVar(Node):
    name: str


@dataclass(eq=False)
class TyName(Node):
    name: str
    args: list = field(default_factory=list)


@dataclass(eq=False)
class TyRecord(Node):
    fields: list  # [(label, ty)]
    hw: bool = False


@dataclass(eq=False)
class TyTuple(Node):
    items: list
    hw: bool = False


@dataclass(eq=False)
class TyArrow(Node):
    arg: Node
    result: Node


@dataclass(eq=False)
class TyArray(Node):
    elem: Node
    size: Node  # expression


@dataclass(eq=False)
class TyTemporal(Node):
    elem: Node
    time: Node  # expression


# ---------------------------------------------------------------- patterns

@dataclass(eq=False)
class PWild(Node):
    pass


@dataclass(eq=False)
class PVar(Node):
    name: str
    ann: Node | None = None


@dataclass(eq=False)
class PLit(Node):
    value: Any  # int, float or str


@dataclass(eq=False)
class PCon(Node):
    name: str
    arg: Node | None = None


@dataclass(eq=False)
class PRecord(Node):
    fields: list  # [(label, pattern)]
    hw: bool = False


@dataclass(eq=False)
class PTuple(Node):
    """Surface tuple pattern; desugars to a numeric-label record pattern."""
    items: list
    hw: bool = False


@dataclass(eq=False)
class PCons(Node):
    head: Node
    tail: Node


@dataclass(eq=False)
class PNil(Node):
    pass


# ---------------------------------------------------------------- expressions

@dataclass(eq=False)
class IntLit(Node):
    value: int


@dataclass(eq=False)
class RealLit(Node):
    value: float


@dataclass(eq=False)
class StringLit(Node):
    value: str


@dataclass(eq=False)
class BitLit(Node):
    value: int


@dataclass(eq=False)
class Var(Node):
    name: str


@dataclass(eq=False)
class RecordExpr(Node):
    fields: list  # [(label, expr)]


@dataclass(eq=False)
class HwRecordExpr(Node):
    fields: list


@dataclass(eq=False)
class ListExpr(Node):
    items: list


@dataclass(eq=False)
class ArrayExpr(Node):
    items: list


@dataclass(eq=False)
class ArrayGen(Node):
    size: Node
    index: str
    body: Node


@dataclass(eq=False)
class BitArrayLit(Node):
    width: Node
    value: Node
    mode: str  # "u" | "s" | "r"


@dataclass(eq=False)
class Proj(Node):
    label: str
    expr: Node


@dataclass(eq=False)
class Index(Node):
    expr: Node
    index: Node


@dataclass(eq=False)
class Deref(Node):
    expr: Node


@dataclass(eq=False)
class RefExpr(Node):
    expr: Node


@dataclass(eq=False)
class Assign(Node):
    target: Node
    value: Node


@dataclass(eq=False)
class SwExpr(Node):
    expr: Node


@dataclass(eq=False)
class UnswExpr(Node):
    expr: Node


@dataclass(eq=False)
class UnOp(Node):
    op: str  # "~" "!" "&->" "|->" "^->"
    operand: Node


@dataclass(eq=False)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(eq=False)
class If(Node):
    cond: Node
    then: Node
    orelse: Node | None  # None only before desugaring


@dataclass(eq=False)
class Case(Node):
    subject: Node
    arms: list  # [(pattern, expr)]


@dataclass(eq=False)
class Let(Node):
    decs: list
    body: Node


@dataclass(eq=False)
class Seq(Node):
    exprs: list


@dataclass(eq=False)
class App(Node):
    fn: Node
    arg: Node


@dataclass(eq=False)
class Paramize(Node):
    module: Node
    size: Node


# surface-only forms removed by desugar()

@dataclass(eq=False)
class TupleExpr(Node):
    items: list


@dataclass(eq=False)
class HwTupleExpr(Node):
    items: list


@dataclass(eq=False)
class UnitExpr(Node):
    pass


@dataclass(eq=False)
class AndAlso(Node):
    left: Node
    right: Node


@dataclass(eq=False)
class OrElse(Node):
    left: Node
    right: Node


@dataclass(eq=False)
class NotExpr(Node):
    operand: Node


@dataclass(eq=False)
class Collapse(Node):
    op: str  # "&&" "||" "^^"
    left: Node
    right: Node


# runtime-only term forms used by the small-step machine

@dataclass(eq=False)
class Lambda(Node):
    """A function value: parameter pattern, body and an optional self name."""
    param: Node
    body: Node
    name: str | None = None


@dataclass(eq=False)
class ModuleTerm(Node):
    param: Node
    body: Node
    ret_ann: Node | None = None
    name: str | None = None


@dataclass(eq=False)
class Loc(Node):
    index: int


@dataclass(eq=False)
class WrapLoc(Node):
    index: int


@dataclass(eq=False)
class HwGate(Node):
    op: str  # "AND" "OR" "XOR"
    inputs: list


@dataclass(eq=False)
class HwNot(Node):
    operand: Node


@dataclass(eq=False)
class DataValue(Node):
    """Constructor applied to a value inside the small-step machine."""
    ctor: str
    payload: Node | None


# ---------------------------------------------------------------- declarations

@dataclass(eq=False)
class ValDec(Node):
    name: str
    ann: Node | None
    expr: Node


@dataclass(eq=False)
class FunDec(Node):
    name: str
    params: list
    ret_ann: Node | None
    body: Node


@dataclass(eq=False)
class TypeDec(Node):
    tyvars: list
    name: str
    body: Node


@dataclass(eq=False)
class DatatypeDec(Node):
    kind: str  # "s" | "h"
    tyvars: list
    name: str
    ctors: list  # [(name, ty | None)]
    info: Any = field(default=None, repr=False)


@dataclass(eq=False)
class ModuleDec(Node):
    name: str
    size_param: PVar | None
    param: Node
    ret_ann: Node | None
    body: Node


VALUE_FORMS = (IntLit, RealLit, StringLit, BitLit, Lambda, ModuleTerm, Loc, WrapLoc)


def children(node: Node):
    """Yield direct child nodes (expressions, patterns, decs, annotations)."""
    for f in fields(node):
        if f.name in ("span", "ty", "info"):
            continue
        yield from _nodes_in(getattr(node, f.name))


def _nodes_in(value):
    if isinstance(value, Node):
        yield value
    elif isinstance(value, (list, tuple)):
        for item in value:
            yield from _nodes_in(item)


def walk(node: Node):
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


# ---------------------------------------------------------------- s-expressions

def to_sexpr(node: Any, typed: bool = False, _names=None) -> str:
    """Stable one-line rendering used by ``--emit ast`` and ``--emit typed-ast``.

    With ``typed``, type variables are named consistently across the whole tree.
    """
    if typed and _names is None:
        from .types import _Renderer
        _names = _Renderer()
    if isinstance(node, (list, tuple)):
        return "(" + " ".join(to_sexpr(x, typed, _names) for x in node) + ")"
    if not isinstance(node, Node):
        if isinstance(node, str):
            return '"' + node.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return repr(node)
    parts = [type(node).__name__]
    for f in fields(node):
        if f.name in ("span", "ty", "info"):
            continue
        parts.append(to_sexpr(getattr(node, f.name), typed, _names))
    text = "(" + " ".join(parts) + ")"
    if typed and _is_binder(node) and node.ty is not PLACEHOLDER:
        text = f"{text[:-1]} : {_names.go(node.ty)})"
    return text


def _is_binder(node: Node) -> bool:
    return isinstance(node, (PVar, ValDec, FunDec, ModuleDec, ArrayGen))
