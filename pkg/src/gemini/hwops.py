"""Construction of hardware operator graphs, with literal folding."""

from __future__ import annotations

from .errors import HardwareError, InternalError, UnsupportedFeature
from .netlist import (ONE, ZERO, ArrayNode, Const, Gate, HwNode, Not, RecordNode, const,
                      elements, fields_of, is_bit_type)
from .types import Array, HRecord, render

_FOLD = {
    "AND": lambda bits: int(all(bits)),
    "OR": lambda bits: int(any(bits)),
    "XOR": lambda bits: sum(bits) & 1,
}
_IDENTITY = {"AND": 1, "OR": 0, "XOR": 0}
OP_NAMES = {"&": "AND", "|": "OR", "^": "XOR", "&->": "AND", "|->": "OR", "^->": "XOR"}


def _hw(v) -> HwNode:
    if not isinstance(v, HwNode):
        raise UnsupportedFeature(f"hardware datatype values cannot be used as circuits ({v!r})")
    return v


def bit_gate(op: str, args) -> HwNode:
    args = tuple(args)
    if len(args) == 1:
        return args[0]
    if not args:
        return const(_IDENTITY[op])
    if all(isinstance(a, Const) for a in args):
        return const(_FOLD[op]([a.value for a in args]))
    return Gate(op, args)


def bit_not(x: HwNode) -> HwNode:
    if isinstance(x, Const):
        return const(1 - x.value)
    return Not(x)


def hw_not(x) -> HwNode:
    """Bitwise negation, pushed through arrays and records."""
    x = _hw(x)
    t = x.type
    if is_bit_type(t):
        return bit_not(x)
    if isinstance(t, Array):
        return ArrayNode(tuple(hw_not(e) for e in elements(x)), t.elem)
    if isinstance(t, HRecord):
        return RecordNode(tuple((lab, hw_not(f)) for lab, f in fields_of(x)))
    raise InternalError(f"cannot negate {render(t)}")


def hw_binop(op: str, a, b) -> HwNode:
    """``&``/``|``/``^`` on equal hardware types, element-wise and field-wise."""
    a, b = _hw(a), _hw(b)
    gate = OP_NAMES[op]
    ta, tb = a.type, b.type
    if is_bit_type(ta) and is_bit_type(tb):
        if ta != tb:
            raise HardwareError(f"operands of {op} have different types: {render(ta)} vs {render(tb)}")
        return bit_gate(gate, (a, b))
    if isinstance(ta, Array) and isinstance(tb, Array):
        if ta.size != tb.size:
            raise HardwareError(f"operands of {op} have different lengths: {ta.size} vs {tb.size}")
        return ArrayNode(tuple(hw_binop(op, x, y) for x, y in zip(elements(a), elements(b))), ta.elem)
    if isinstance(ta, HRecord) and isinstance(tb, HRecord):
        fb = dict(fields_of(b))
        if set(fb) != {lab for lab, _ in ta.fields}:
            raise HardwareError(f"operands of {op} have different record types: "
                                f"{render(ta)} vs {render(tb)}")
        return RecordNode(tuple((lab, hw_binop(op, x, fb[lab])) for lab, x in fields_of(a)))
    raise HardwareError(f"operands of {op} have incompatible types: {render(ta)} vs {render(tb)}")


def reduce_bits(op: str, arr) -> HwNode:
    """One n-ary gate over all elements of a bit array."""
    arr = _hw(arr)
    return bit_gate(OP_NAMES[op], elements(arr))


def mux(sel: HwNode, when_one: HwNode, when_zero: HwNode) -> HwNode:
    if isinstance(sel, Const):
        return when_one if sel.value else when_zero
    return bit_gate("OR", (bit_gate("AND", (sel, when_one)),
                           bit_gate("AND", (bit_not(sel), when_zero))))


def _rewire(bits: list, k: int, op: str) -> list:
    n = len(bits)
    if op == "<<":
        return [bits[i - k] if i - k >= 0 else ZERO for i in range(n)]
    fill = bits[-1] if (op == ">>>" and n) else ZERO
    return [bits[i + k] if i + k < n else fill for i in range(n)]


def shift(op: str, value, amount) -> HwNode:
    """Shift a bit array by a bit-array amount (index 0 is the least significant bit)."""
    value, amount = _hw(value), _hw(amount)
    bits = list(elements(value))
    amt = list(elements(amount))
    elem = value.type.elem
    if all(isinstance(b, Const) for b in amt):
        k = sum(b.value << i for i, b in enumerate(amt))
        return ArrayNode(tuple(_rewire(bits, min(k, len(bits)), op)), elem)
    out = bits
    for j, sel in enumerate(amt):
        step = 1 << j
        shifted = _rewire(out, min(step, len(out)), op)
        out = [mux(sel, s, o) for s, o in zip(shifted, out)]
    return ArrayNode(tuple(out), elem)


def int_to_bits(width: int, value: int, signed: bool) -> HwNode:
    from .errors import Overflow
    if width < 0:
        raise HardwareError("bit-array width must be non-negative")
    lo, hi = (-(1 << (width - 1)), (1 << (width - 1)) - 1) if signed and width else (0, (1 << width) - 1)
    if not lo <= value <= hi:
        kind = "signed" if signed else "unsigned"
        raise Overflow(f"{value} does not fit in a {width}-bit {kind} bit array")
    v = value & ((1 << width) - 1) if width else 0
    return ArrayNode(tuple(const((v >> i) & 1) for i in range(width)))


def twos_complement(x) -> HwNode:
    """NOT followed by a half-adder incrementer (carry-in 1)."""
    x = _hw(x)
    carry: HwNode = ONE
    out = []
    for b in elements(x):
        nb = bit_not(b)
        out.append(bit_gate("XOR", (nb, carry)))
        carry = bit_gate("AND", (nb, carry))
    return ArrayNode(tuple(out), x.type.elem)

