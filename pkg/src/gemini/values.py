"""Runtime values of the staging evaluator.

Integers, reals and strings are plain Python values; hardware values are
netlist nodes.  Lists are immutable cons cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import EvalError
from .netlist import HwNode


class _Nil:
    __slots__ = ()

    def __repr__(self) -> str:
        return "[]"

    def __iter__(self):
        return iter(())


NIL = _Nil()


class Cons:
    __slots__ = ("head", "tail")

    def __init__(self, head, tail):
        self.head = head
        self.tail = tail

    def __iter__(self):
        node = self
        while isinstance(node, Cons):
            yield node.head
            node = node.tail

    def __repr__(self) -> str:
        return "[" + ", ".join(map(repr, self)) + "]"


def from_py_list(items) -> Any:
    out = NIL
    for x in reversed(list(items)):
        out = Cons(x, out)
    return out


def to_py_list(v) -> list:
    return list(v)


@dataclass(frozen=True)
class RecordVal:
    fields: tuple  # ((label, value), ...)

    def get(self, label: str):
        for lab, v in self.fields:
            if lab == label:
                return v
        raise EvalError(f"record has no field {label}")


UNIT_VAL = RecordVal(())


@dataclass(frozen=True)
class RefVal:
    loc: int


@dataclass(frozen=True)
class SWVal:
    hw: Any  # HwNode or hardware DatatypeVal


@dataclass(frozen=True)
class DatatypeVal:
    ctor: str
    tag: int
    payload: Any = None


@dataclass(frozen=True)
class CtorVal:
    ctor: str
    tag: int


@dataclass(eq=False)
class Closure:
    """A (possibly partially applied) curried function."""
    params: list
    body: Any
    env: Any
    name: str | None = None
    bound: tuple = ()


@dataclass(eq=False)
class Builtin:
    name: str
    arity: int
    fn: Callable
    args: tuple = ()


@dataclass(eq=False)
class ModuleVal:
    """A module closure; ``size`` is set once a size parameter is supplied."""
    name: str
    param: Any
    body: Any
    env: Any
    ret_ann: Any = None
    size_param: Any = None
    size: int | None = None


@dataclass(eq=False)
class PreParamModuleVal:
    module: ModuleVal


@dataclass(eq=False)
class BuiltinModule:
    name: str
    fn: Callable
    extra: dict = field(default_factory=dict)


class Store:
    """Mutable reference cells with a fresh-location allocator."""

    def __init__(self):
        self.cells: dict[int, Any] = {}
        self._next = 0

    def alloc(self, value) -> RefVal:
        loc = self._next
        self._next += 1
        assert loc not in self.cells
        self.cells[loc] = value
        return RefVal(loc)

    def read(self, r: RefVal):
        return self.cells[r.loc]

    def write(self, r: RefVal, value) -> None:
        self.cells[r.loc] = value


def values_equal(a, b) -> bool:
    if isinstance(a, (int, float, str)) and not isinstance(a, bool):
        return type(a) is type(b) and a == b
    if a is NIL or b is NIL:
        return a is b
    if isinstance(a, Cons):
        if not isinstance(b, Cons):
            return False
        while isinstance(a, Cons) and isinstance(b, Cons):
            if not values_equal(a.head, b.head):
                return False
            a, b = a.tail, b.tail
        return a is NIL and b is NIL
    if isinstance(a, RecordVal):
        bf = dict(b.fields)
        return all(values_equal(v, bf[lab]) for lab, v in a.fields)
    if isinstance(a, DatatypeVal):
        if not isinstance(b, DatatypeVal) or a.tag != b.tag or a.ctor != b.ctor:
            return False
        if a.payload is None:
            return b.payload is None
        return values_equal(a.payload, b.payload)
    raise EvalError(f"equality is not defined on {type(a).__name__}")


def show(v) -> str:
    """Human-readable rendering of a value (used in REPL-like output and tests)."""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return f"~{-v}" if v < 0 else str(v)
    if isinstance(v, float):
        s = repr(v)
        return "~" + s[1:] if s.startswith("-") else s
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if v is NIL or isinstance(v, Cons):
        return "[" + ", ".join(show(x) for x in v) + "]"
    if isinstance(v, RecordVal):
        if v.fields and [lab for lab, _ in v.fields] == [str(i + 1) for i in range(len(v.fields))]:
            return "(" + ", ".join(show(x) for _, x in v.fields) + ")"
        return "{" + ", ".join(f"{lab} = {show(x)}" for lab, x in v.fields) + "}"
    if isinstance(v, DatatypeVal):
        return v.ctor if v.payload is None else f"{v.ctor}({show(v.payload)})"
    if isinstance(v, RefVal):
        return f"<ref {v.loc}>"
    if isinstance(v, SWVal):
        return f"sw <{show(v.hw)}>"
    if isinstance(v, HwNode):
        from .netlist import Const
        return f"'b:{v.value}" if isinstance(v, Const) else repr(v)
    if isinstance(v, (Closure, Builtin, CtorVal)):
        return "<fn>"
    if isinstance(v, (ModuleVal, PreParamModuleVal, BuiltinModule)):
        return "<module>"
    return repr(v)
