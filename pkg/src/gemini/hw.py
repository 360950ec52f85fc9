"""Hardware checking of staged netlists and lowering of records to bit arrays.

Lowered netlists contain only bit-level nodes: constants, pins (scalar, or
sliced per bit), gates, NOTs and per-bit delays, with an ArrayNode of bits
as the output when it is wider than one bit.  Bit order is LSB first; a
record's first field occupies the highest bits and array element 0 the
lowest.
"""

from __future__ import annotations

from .errors import CombinationalCycle, HardwareError, NonModuleProgram
from .netlist import (ArrayNode, Const, Delay, Field, Gate, HwNode, Netlist, Not, Pin,
                      RecordNode, Slice, topo_order)
from .types import BIT, Array, Bit, HRecord, Temporal, Type, render, temporal


def bit_width(t: Type) -> int:
    if isinstance(t, Bit):
        return 1
    if isinstance(t, Temporal):
        return bit_width(t.elem)
    if isinstance(t, Array):
        return t.size * bit_width(t.elem)
    if isinstance(t, HRecord):
        return sum(bit_width(x) for _, x in t.fields)
    raise HardwareError(f"{render(t)} is not a concrete hardware type")


def _strip_time(t: Type) -> Type:
    while isinstance(t, Temporal):
        t = t.elem
    return t


def check_acyclic(roots) -> None:
    """Raise CombinationalCycle if some cycle passes through no Delay node."""
    state: dict[int, int] = {}
    for root in topo_order(list(roots)):
        if state.get(root.uid):
            continue
        state[root.uid] = 1
        stack = [(root, iter(() if isinstance(root, Delay) else root.inputs()))]
        while stack:
            node, it = stack[-1]
            child = next(it, None)
            if child is None:
                state[node.uid] = 2
                stack.pop()
                continue
            s = state.get(child.uid, 0)
            if s == 1:
                raise CombinationalCycle(f"combinational cycle through node {child!r}")
            if s == 0:
                state[child.uid] = 1
                # registers break combinational paths
                kids = () if isinstance(child, Delay) else child.inputs()
                stack.append((child, iter(kids)))


def _derive(node: HwNode, types: dict) -> Type:
    """Type of ``node`` computed from its inputs' already-derived types."""
    if isinstance(node, Const):
        if node.value not in (0, 1):
            raise HardwareError(f"constant {node.value} is not a bit")
        return BIT
    if isinstance(node, Pin):
        bit_width(node.type)
        return node.type
    if isinstance(node, Gate):
        ts = [types[a.uid] for a in node.args]
        if not isinstance(_strip_time(ts[0]), Bit):
            raise HardwareError(f"{node.op} gate fed a non-bit value of type {render(ts[0])}")
        for t in ts[1:]:
            if t != ts[0]:
                raise HardwareError(f"{node.op} gate inputs differ: {render(ts[0])} vs {render(t)}")
        return ts[0]
    if isinstance(node, Not):
        t = types[node.arg.uid]
        if not isinstance(_strip_time(t), Bit):
            raise HardwareError(f"NOT fed a non-bit value of type {render(t)}")
        return t
    if isinstance(node, ArrayNode):
        ts = [types[e.uid] for e in node.elems]
        for t in ts[1:]:
            if t != ts[0]:
                raise HardwareError(f"array elements differ: {render(ts[0])} vs {render(t)}")
        return Array(ts[0] if ts else node.type.elem, len(ts))
    if isinstance(node, Slice):
        t = types[node.src.uid]
        if not isinstance(t, Array):
            raise HardwareError(f"indexing a non-array of type {render(t)}")
        if not 0 <= node.index < t.size:
            raise HardwareError(f"index {node.index} is out of range for size {t.size}")
        return t.elem
    if isinstance(node, RecordNode):
        return HRecord(tuple((lab, types[x.uid]) for lab, x in node.fields))
    if isinstance(node, Field):
        t = types[node.src.uid]
        fields = dict(t.fields) if isinstance(t, HRecord) else {}
        if node.label not in fields:
            raise HardwareError(f"no field {node.label} in {render(t)}")
        return fields[node.label]
    if isinstance(node, Delay):
        t = types[node.arg.uid]
        if isinstance(node.type, Bit) and isinstance(_strip_time(t), Bit):
            return BIT
        return temporal(t, 1)
    raise HardwareError(f"unknown hardware node {node!r}")


def hw_typecheck(n: Netlist) -> dict:
    """Re-derive every node's concrete type; maps node uid to type."""
    check_acyclic([n.output])
    types: dict = {}
    for node in topo_order([n.output]):
        t = _derive(node, types)
        if t != node.type:
            raise HardwareError(f"node {node!r} is typed {render(node.type)} but its inputs give "
                                f"{render(t)}")
        types[node.uid] = t
    for name, t in n.ports:
        bit_width(t)
    return types


def flat_type(t: Type) -> Type:
    """Port type after lowering: a scalar bit stays a bit, everything else a bit array."""
    if isinstance(_strip_time(t), Bit):
        return BIT
    return Array(BIT, bit_width(t))


class _Lowerer:
    def __init__(self, pins: dict):
        self.pins = pins
        self.memo: dict[int, list] = {}

    def bits(self, node: HwNode) -> list:
        got = self.memo.get(node.uid)
        if got is None:
            got = self.memo[node.uid] = self._bits(node)
        return got

    def _bits(self, node: HwNode) -> list:
        if isinstance(node, Const):
            return [node]
        if isinstance(node, Pin):
            pin = self.pins[node.name]
            if isinstance(pin.type, Bit):
                return [pin]
            return [Slice(pin, i) for i in range(pin.type.size)]
        if isinstance(node, Gate):
            return [Gate(node.op, tuple(self.bits(a)[0] for a in node.args))]
        if isinstance(node, Not):
            return [Not(b) for b in self.bits(node.arg)]
        if isinstance(node, Delay):
            return [Delay(b, flat=True) for b in self.bits(node.arg)]
        if isinstance(node, ArrayNode):
            out: list = []
            for e in node.elems:
                out += self.bits(e)
            return out
        if isinstance(node, RecordNode):
            out = []
            for _, x in reversed(node.fields):
                out += self.bits(x)
            return out
        if isinstance(node, Slice):
            w = bit_width(node.type)
            return self.bits(node.src)[node.index * w:(node.index + 1) * w]
        if isinstance(node, Field):
            src = self.bits(node.src)
            lo = 0
            for lab, t in reversed(node.src.type.fields):
                w = bit_width(t)
                if lab == node.label:
                    return src[lo:lo + w]
                lo += w
        raise HardwareError(f"cannot lower node {node!r}")


def lower_records(n: Netlist) -> Netlist:
    """Flatten records and nested arrays into bit-level nodes."""
    pins = {name: Pin(name, flat_type(t)) for name, t in n.ports}
    low = _Lowerer(pins)
    bits = low.bits(n.output)
    if isinstance(flat_type(n.out_type), Bit):
        out = bits[0]
    else:
        out = ArrayNode(tuple(bits), BIT)
    return Netlist(n.name, [(name, p.type) for name, p in pins.items()], out, pins)


def is_lowered(n: Netlist) -> bool:
    for node in topo_order([n.output]):
        if isinstance(node, (RecordNode, Field)):
            return False
        if isinstance(node, Delay) and node.type != BIT:
            return False
        if isinstance(node, ArrayNode) and node is not n.output:
            return False
    return all(isinstance(t, Bit) or (isinstance(t, Array) and isinstance(t.elem, Bit))
               for _, t in n.ports)


def check_program_module(value) -> None:
    """A program must evaluate to a concrete, instantiated module."""
    from .values import BuiltinModule, ModuleVal, PreParamModuleVal
    if isinstance(value, PreParamModuleVal):
        raise NonModuleProgram("the program returns a size-parameterized module; instantiate it "
                               "with <:n:> first")
    if isinstance(value, BuiltinModule):
        raise NonModuleProgram(f"the program returns the built-in module {value.name}, whose port "
                               "sizes are not fixed")
    if not isinstance(value, ModuleVal):
        raise NonModuleProgram("the program does not evaluate to a module")
