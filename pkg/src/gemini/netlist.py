"""Hardware value graph produced by staging (before record lowering).

Nodes are compared by identity.  Every node knows its concrete hardware
type, computed when it is built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import HardwareError, InternalError, OutOfRange
from .types import BIT, Array, Bit, HRecord, Temporal, Type, render, temporal

_ids = itertools.count(1)


class HwNode:
    __slots__ = ("type", "uid")

    def __init__(self, type_: Type):
        self.type = type_
        self.uid = next(_ids)

    def inputs(self) -> tuple:
        return ()

    def __repr__(self) -> str:
        return f"{type(self).__name__}#{self.uid}"


class Const(HwNode):
    __slots__ = ("value",)

    def __init__(self, value: int):
        super().__init__(BIT)
        self.value = value


ZERO = Const(0)
ONE = Const(1)


def const(bit: int) -> Const:
    return ONE if bit else ZERO


class Pin(HwNode):
    __slots__ = ("name",)

    def __init__(self, name: str, type_: Type):
        super().__init__(type_)
        self.name = name


class Gate(HwNode):
    """n-ary AND / OR / XOR over bits (or equally delayed bits)."""
    __slots__ = ("op", "args")

    def __init__(self, op: str, args: tuple):
        if len(args) < 2:
            raise InternalError("a gate needs at least two inputs")
        super().__init__(args[0].type)
        self.op = op
        self.args = tuple(args)

    def inputs(self):
        return self.args


class Not(HwNode):
    __slots__ = ("arg",)

    def __init__(self, arg: HwNode):
        super().__init__(arg.type)
        self.arg = arg

    def inputs(self):
        return (self.arg,)


class ArrayNode(HwNode):
    __slots__ = ("elems",)

    def __init__(self, elems: tuple, elem_type: Type | None = None):
        elems = tuple(elems)
        if elems:
            first = elems[0].type
            for e in elems[1:]:
                if e.type != first:
                    raise HardwareError(f"array elements have different types: "
                                        f"{render(first)} vs {render(e.type)}")
            elem_type = first
        super().__init__(Array(elem_type or BIT, len(elems)))
        self.elems = elems

    def inputs(self):
        return self.elems


class Slice(HwNode):
    """Element ``index`` of an array-typed node that is not an ArrayNode."""
    __slots__ = ("src", "index")

    def __init__(self, src: HwNode, index: int):
        t = src.type
        if not isinstance(t, Array):
            raise InternalError(f"slice of non-array {render(t)}")
        if not 0 <= index < t.size:
            raise OutOfRange(f"index {index} is out of range for an array of size {t.size}")
        super().__init__(t.elem)
        self.src = src
        self.index = index

    def inputs(self):
        return (self.src,)


class RecordNode(HwNode):
    __slots__ = ("fields",)

    def __init__(self, fields: tuple):
        fields = tuple(fields)
        super().__init__(HRecord(tuple((lab, n.type) for lab, n in fields)))
        self.fields = fields

    def field(self, label: str) -> HwNode:
        for lab, n in self.fields:
            if lab == label:
                return n
        raise InternalError(f"no field {label}")

    def inputs(self):
        return tuple(n for _, n in self.fields)


class Field(HwNode):
    """Field ``label`` of a record-typed node that is not a RecordNode."""
    __slots__ = ("src", "label")

    def __init__(self, src: HwNode, label: str):
        t = src.type
        if not isinstance(t, HRecord):
            raise InternalError(f"field access on non-record {render(t)}")
        flds = dict(t.fields)
        if label not in flds:
            raise InternalError(f"record {render(t)} has no field {label}")
        super().__init__(flds[label])
        self.src = src
        self.label = label

    def inputs(self):
        return (self.src,)


class Delay(HwNode):
    """One clock cycle of delay (a D flip-flop), initially 0.

    ``flat`` delays belong to lowered netlists, where timing is no longer
    tracked in types and every signal is a plain bit.
    """
    __slots__ = ("arg",)

    def __init__(self, arg: HwNode, flat: bool = False):
        super().__init__(BIT if flat else temporal(arg.type, 1))
        self.arg = arg

    def inputs(self):
        return (self.arg,)


def is_bit_type(t: Type) -> bool:
    while isinstance(t, Temporal):
        t = t.elem
    return isinstance(t, Bit)


def elements(n: HwNode) -> tuple:
    if isinstance(n, ArrayNode):
        return n.elems
    if not isinstance(n.type, Array):
        raise InternalError(f"not an array: {render(n.type)}")
    return tuple(Slice(n, i) for i in range(n.type.size))


def fields_of(n: HwNode) -> tuple:
    if isinstance(n, RecordNode):
        return n.fields
    if not isinstance(n.type, HRecord):
        raise InternalError(f"not a record: {render(n.type)}")
    return tuple((lab, Field(n, lab)) for lab, _ in n.type.fields)


@dataclass
class Netlist:
    """A staged module: input ports in declaration order and one output."""
    name: str
    ports: list  # [(name, hardware type)]
    output: HwNode
    pins: dict = field(default_factory=dict)  # name -> Pin

    @property
    def out_type(self) -> Type:
        return self.output.type


def topo_order(roots) -> list:
    """Nodes reachable from ``roots``, every node after its inputs."""
    order, seen = [], set()
    stack = [(r, False) for r in reversed(list(roots))]
    while stack:
        n, done = stack.pop()
        if done:
            order.append(n)
            continue
        if n.uid in seen:
            continue
        seen.add(n.uid)
        stack.append((n, True))
        for c in reversed(n.inputs()):
            if c.uid not in seen:
                stack.append((c, False))
    return order


def dump(n: Netlist) -> str:
    """``--emit ir`` text: one ``nK = OP(...)`` line per node, inputs first."""
    names: dict = {}
    lines = [f"module {n.name}"]
    for pname, t in n.ports:
        lines.append(f"  input {pname} : {render(t)}")
    for node in topo_order([n.output]):
        names[node.uid] = f"n{len(names) + 1}"
        lines.append(f"  {names[node.uid]} = {describe(node, names)} : {render(node.type)}")
    lines.append(f"  out = {names[n.output.uid]}")
    return "\n".join(lines) + "\n"


def describe(node: HwNode, names: dict) -> str:
    ref = lambda x: names[x.uid]  # noqa: E731
    if isinstance(node, Const):
        return f"CONST({node.value})"
    if isinstance(node, Pin):
        return f"PIN({node.name})"
    if isinstance(node, Gate):
        return f"{node.op}({', '.join(map(ref, node.args))})"
    if isinstance(node, Not):
        return f"NOT({ref(node.arg)})"
    if isinstance(node, ArrayNode):
        return f"ARRAY({', '.join(map(ref, node.elems))})"
    if isinstance(node, Slice):
        return f"SLICE({ref(node.src)}, {node.index})"
    if isinstance(node, RecordNode):
        return "RECORD(" + ", ".join(f"{lab}={ref(x)}" for lab, x in node.fields) + ")"
    if isinstance(node, Field):
        return f"FIELD({ref(node.src)}, {node.label})"
    if isinstance(node, Delay):
        return f"DELAY({ref(node.arg)})"
    return type(node).__name__
