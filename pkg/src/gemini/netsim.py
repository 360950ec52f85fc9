"""Two-valued, cycle-based simulation of netlists and a reader for emitted Verilog.

Lowered netlists run on a bit-parallel kernel (compiled when available, a
numpy fallback otherwise; set ``GEMINI_PURE=1`` to force the fallback).
Netlists that still contain records or nested arrays run on a structured
reference simulator that works with nested values directly.

Port values are integers: bit ``i`` of the integer is flattened bit ``i``
(array element 0 lowest, a record's first field highest).  Registers start
at 0.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import CombinationalCycle, SimulationError, SubsetError
from .hw import bit_width, is_lowered
from .netlist import (ZERO, ArrayNode, Const, Delay, Field, Gate, HwNode, Netlist, Not, Pin,
                      RecordNode, Slice, const, topo_order)
from .types import BIT, Array, Bit, HRecord, Temporal, Type

if os.environ.get("GEMINI_PURE") == "1":
    from . import _simcore_py as _kernel
else:
    try:
        from . import _simcore as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _simcore_py as _kernel

KERNEL = _kernel.KERNEL
MAX_EQUIV_BITS = 20

_OPCODE = {"AND": 3, "OR": 4, "XOR": 5}


# ---------------------------------------------------------------- flat programs

@dataclass
class Program:
    """A lowered netlist compiled to kernel form."""
    ops: np.ndarray
    off: np.ndarray
    args: np.ndarray
    outputs: list  # signal index per output bit, LSB first
    delay_args: list  # signal feeding each register
    n_inputs: int

    def run(self, inputs: np.ndarray, state: np.ndarray, W: int, kernel=None) -> np.ndarray:
        k = kernel or _kernel
        return k.run(self.ops, self.off, self.args, inputs, state, W)


def port_offsets(ports) -> dict:
    """Offset of each port's first bit in the concatenated input vector."""
    offs, pos = {}, 0
    for name, t in ports:
        offs[name] = pos
        pos += bit_width(t)
    return offs


def compile_program(n: Netlist) -> Program:
    if not is_lowered(n):
        raise SimulationError("the kernel needs a lowered netlist")
    offs = port_offsets(n.ports)
    index: dict[int, int] = {}
    ops: list[int] = []
    args: list[int] = []
    off = [0]
    delays: list[Delay] = []
    root = n.output
    out_nodes = list(root.elems) if isinstance(root, ArrayNode) else [root]

    def emit(op, a):
        ops.append(op)
        args.extend(a)
        off.append(len(args))
        return len(ops) - 1

    def visit(start: HwNode) -> None:
        # iterative post-order; registers are sources inside one cycle
        stack = [(start, False)]
        onpath: set[int] = set()
        while stack:
            node, post = stack.pop()
            if node.uid in index:
                continue
            if post:
                onpath.discard(node.uid)
                index[node.uid] = _emit_node(node)
                continue
            if node.uid in onpath:
                raise CombinationalCycle(f"combinational cycle through {node!r}")
            onpath.add(node.uid)
            stack.append((node, True))
            if not isinstance(node, Delay):
                for c in reversed(node.inputs()):
                    if c.uid not in index:
                        if c.uid in onpath:
                            raise CombinationalCycle(f"combinational cycle through {c!r}")
                        stack.append((c, False))

    def _emit_node(node: HwNode) -> int:
        if isinstance(node, Const):
            return emit(node.value, ())
        if isinstance(node, Pin):
            if node.name not in offs:
                raise SimulationError(f"unknown pin {node.name}")
            return emit(2, (offs[node.name],))
        if isinstance(node, Slice):
            return emit(2, (offs[node.src.name] + node.index,))
        if isinstance(node, Gate):
            return emit(_OPCODE[node.op], [index[a.uid] for a in node.args])
        if isinstance(node, Not):
            return emit(6, (index[node.arg.uid],))
        if isinstance(node, Delay):
            delays.append(node)
            return emit(7, (len(delays) - 1,))
        raise SimulationError(f"cannot simulate node {node!r}")

    for o in out_nodes:
        visit(o)
    k = 0
    while k < len(delays):  # registers discovered while visiting other registers' inputs
        visit(delays[k].arg)
        k += 1
    return Program(
        np.asarray(ops, dtype=np.int32), np.asarray(off, dtype=np.int32),
        np.asarray(args, dtype=np.int32), [index[o.uid] for o in out_nodes],
        [index[d.arg.uid] for d in delays], sum(bit_width(t) for _, t in n.ports),
    )


def _lane_words(masks: list, lanes: int) -> np.ndarray:
    """Pack per-bit lane masks (Python ints) into a (len(masks), W) uint64 array."""
    W = max(1, (lanes + 63) // 64)
    out = np.zeros((len(masks), W), dtype=np.uint64)
    nbytes = W * 8
    for i, m in enumerate(masks):
        out[i] = np.frombuffer(m.to_bytes(nbytes, "little"), dtype="<u8")
    return out


def _words_to_int(row: np.ndarray, lanes: int) -> int:
    return int.from_bytes(row.astype("<u8").tobytes(), "little") & ((1 << lanes) - 1)


def run_lanes_lowered(n: Netlist, masks: list, lanes: int, cycles: int, kernel=None) -> list:
    """Per cycle, the output lane masks (one per output bit, LSB first)."""
    prog = compile_program(n)
    W = max(1, (lanes + 63) // 64)
    inputs = _lane_words(masks, lanes)
    state = np.zeros((len(prog.delay_args), W), dtype=np.uint64)
    trace = []
    for _ in range(cycles):
        vals = prog.run(inputs, state, W, kernel)
        trace.append([_words_to_int(vals[i], lanes) for i in prog.outputs])
        if prog.delay_args:
            state = np.ascontiguousarray(vals[prog.delay_args])
    return trace


# ---------------------------------------------------------------- structured reference

def _from_bits(t: Type, bits: list, pos: int):
    """Decode flattened lane masks starting at ``pos`` into a nested value."""
    if isinstance(t, Temporal):
        return _from_bits(t.elem, bits, pos)
    if isinstance(t, Bit):
        return bits[pos]
    if isinstance(t, Array):
        w = bit_width(t.elem)
        return tuple(_from_bits(t.elem, bits, pos + i * w) for i in range(t.size))
    if isinstance(t, HRecord):
        out = {}
        p = pos + bit_width(t)
        for lab, ft in t.fields:
            p -= bit_width(ft)
            out[lab] = _from_bits(ft, bits, p)
        return out
    raise SimulationError("unsupported port type")


def _to_bits(v) -> list:
    if isinstance(v, int):
        return [v]
    if isinstance(v, tuple):
        return [b for e in v for b in _to_bits(e)]
    if isinstance(v, dict):
        return [b for e in reversed(list(v.values())) for b in _to_bits(e)]
    raise SimulationError(f"bad structured value {v!r}")


def _zero_like(t: Type):
    if isinstance(t, Temporal):
        return _zero_like(t.elem)
    if isinstance(t, Bit):
        return 0
    if isinstance(t, Array):
        return tuple(_zero_like(t.elem) for _ in range(t.size))
    return {lab: _zero_like(ft) for lab, ft in t.fields}


def _map2(f, a, b):
    if isinstance(a, int):
        return f(a, b)
    if isinstance(a, tuple):
        return tuple(_map2(f, x, y) for x, y in zip(a, b))
    return {k: _map2(f, a[k], b[k]) for k in a}


_GATE_FN = {"AND": lambda x, y: x & y, "OR": lambda x, y: x | y, "XOR": lambda x, y: x ^ y}


def reference_cycle(n: Netlist, masks: list, lanes: int, state: dict):
    """One clock cycle of the structured simulator.

    ``state`` maps register uid to its held value.  Returns the output lane
    masks and the register state for the next cycle.
    """
    full = (1 << lanes) - 1
    offs = port_offsets(n.ports)
    pins = {name: _from_bits(t, masks, offs[name]) for name, t in n.ports}
    memo: dict = {}
    regs: list = []

    def compute(node: HwNode):
        if isinstance(node, Delay):
            regs.append(node)
            v = state.get(node.uid)
            return _zero_like(node.type) if v is None else v
        if isinstance(node, Const):
            return full if node.value else 0
        if isinstance(node, Pin):
            if node.name not in pins:
                raise SimulationError(f"unknown pin {node.name}")
            return pins[node.name]
        if isinstance(node, Gate):
            fn = _GATE_FN[node.op]
            acc = memo[node.args[0].uid]
            for a in node.args[1:]:
                acc = _map2(fn, acc, memo[a.uid])
            return acc
        if isinstance(node, Not):
            a = memo[node.arg.uid]
            return _map2(lambda x, _: full ^ x, a, a)
        if isinstance(node, ArrayNode):
            return tuple(memo[e.uid] for e in node.elems)
        if isinstance(node, RecordNode):
            return {lab: memo[x.uid] for lab, x in node.fields}
        if isinstance(node, Slice):
            return memo[node.src.uid][node.index]
        if isinstance(node, Field):
            return memo[node.src.uid][node.label]
        raise SimulationError(f"cannot simulate node {node!r}")

    def value(root: HwNode):
        stack = [(root, False)]
        onpath: set = set()
        while stack:
            node, post = stack.pop()
            if node.uid in memo:
                continue
            if post:
                onpath.discard(node.uid)
                memo[node.uid] = compute(node)
                continue
            onpath.add(node.uid)
            stack.append((node, True))
            if not isinstance(node, Delay):
                for c in node.inputs():
                    if c.uid in onpath:
                        raise CombinationalCycle(f"combinational cycle through {c!r}")
                    if c.uid not in memo:
                        stack.append((c, False))
        return memo[root.uid]

    out = _to_bits(value(n.output))
    k = 0
    while k < len(regs):  # register inputs, including registers found on the way
        value(regs[k].arg)
        k += 1
    return out, {d.uid: memo[d.arg.uid] for d in regs}


def run_lanes_reference(n: Netlist, masks: list, lanes: int, cycles: int) -> list:
    """Structured simulation; same contract as :func:`run_lanes_lowered`."""
    state: dict = {}
    trace = []
    for _ in range(cycles):
        out, state = reference_cycle(n, masks, lanes, state)
        trace.append(out)
    return trace


# ---------------------------------------------------------------- public interface

def _has_delay(n: Netlist) -> bool:
    return any(isinstance(x, Delay) for x in topo_order([n.output]))


def _stimulus_masks(n: Netlist, stimulus: dict) -> list:
    known = {name for name, _ in n.ports}
    for name in stimulus:
        if name not in known:
            raise SimulationError(f"unknown input '{name}'")
    masks = []
    for name, t in n.ports:
        if name not in stimulus:
            raise SimulationError(f"no value given for input '{name}'")
        w = bit_width(t)
        v = stimulus[name]
        if not 0 <= v < (1 << w):
            raise SimulationError(f"value {v} does not fit input '{name}' of width {w}")
        masks += [(v >> i) & 1 for i in range(w)]
    return masks


def _run(n: Netlist, masks: list, lanes: int, cycles: int, engine: str) -> list:
    if engine == "auto":
        engine = "kernel" if is_lowered(n) else "reference"
    if engine == "kernel":
        return run_lanes_lowered(n, masks, lanes, cycles)
    if engine == "reference":
        return run_lanes_reference(n, masks, lanes, cycles)
    raise SimulationError(f"unknown engine {engine!r}")


def _pack(bits: list, lane: int = 0) -> int:
    return sum(((b >> lane) & 1) << i for i, b in enumerate(bits))


def simulate(n: Netlist, stimulus: dict, cycles: int | None = None, engine: str = "auto"):
    """Output value for one input assignment.

    Returns ``{"out": int}``, or with ``cycles`` a list of such dicts, one
    per clock cycle (inputs held constant).
    """
    masks = _stimulus_masks(n, stimulus)
    trace = _run(n, masks, 1, cycles or 1, engine)
    outs = [{"out": _pack(bits)} for bits in trace]
    return outs if cycles is not None else outs[0]


def simulate_trace(n: Netlist, stimuli: list, engine: str = "auto") -> list:
    """Output per cycle for a sequence of per-cycle input assignments."""
    if engine == "auto":
        engine = "kernel" if is_lowered(n) else "reference"
    results = []
    if engine == "kernel":
        prog = compile_program(n)
        state = np.zeros((len(prog.delay_args), 1), dtype=np.uint64)
        for s in stimuli:
            inputs = _lane_words(_stimulus_masks(n, s), 1)
            vals = prog.run(inputs, state, 1)
            results.append({"out": _pack([_words_to_int(vals[i], 1) for i in prog.outputs])})
            state = np.ascontiguousarray(vals[prog.delay_args])
        return results
    rstate: dict = {}
    for s in stimuli:
        out, rstate = reference_cycle(n, _stimulus_masks(n, s), 1, rstate)
        results.append({"out": _pack(out)})
    return results


def exhaustive_equiv(n1: Netlist, n2: Netlist, cycles: int | None = None,
                     engines: tuple = ("auto", "auto")) -> bool:
    """Whether two netlists agree on every input assignment.

    Ports must match by name and flattened width.  Sequential designs are
    compared over ``cycles`` clock cycles (default 4) with inputs held.
    """
    sig1 = [(name, bit_width(t)) for name, t in n1.ports]
    sig2 = [(name, bit_width(t)) for name, t in n2.ports]
    if sig1 != sig2:
        raise SimulationError(f"port signatures differ: {sig1} vs {sig2}")
    if bit_width(n1.out_type) != bit_width(n2.out_type):
        return False
    total = sum(w for _, w in sig1)
    if total > MAX_EQUIV_BITS:
        raise SimulationError(f"{total} input bits exceed the exhaustive limit of "
                              f"{MAX_EQUIV_BITS}")
    lanes = 1 << total
    masks = [_lane_pattern(j, lanes) for j in range(total)]
    if cycles is None:
        cycles = 4 if (_has_delay(n1) or _has_delay(n2)) else 1
    t1 = _run(n1, masks, lanes, cycles, engines[0])
    t2 = _run(n2, masks, lanes, cycles, engines[1])
    return t1 == t2


def _lane_pattern(j: int, lanes: int) -> int:
    """Lane mask whose lane ``l`` holds bit ``j`` of ``l``."""
    block = ((1 << (1 << j)) - 1) << (1 << j)  # 2^j zeros then 2^j ones
    period = 1 << (j + 1)
    if period >= lanes:
        return block & ((1 << lanes) - 1)
    reps = lanes // period
    # repeat the block by doubling
    out, width = block, period
    while width < lanes:
        out |= out << width
        width *= 2
    return out & ((1 << (reps * period)) - 1)


# ---------------------------------------------------------------- Verilog reader

_TOKEN = re.compile(r"\s*(?:(//[^\n]*)|(\d+'b[01])|([A-Za-z_][A-Za-z0-9_$]*)|(\d+)|(<=|@|\S))")


def _tokens(text: str) -> list:
    toks, pos = [], 0
    text = re.sub(r"/\*.*?\*/", " ", text, flags=re.S)
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise SubsetError(f"unexpected text at offset {pos}")
        pos = m.end()
        if m.group(1):
            continue
        tok = m.group(0).strip()
        if tok:
            toks.append(tok)
    return toks


class _Reader:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, *expect):
        t = self.peek()
        if t is None or (expect and t not in expect):
            want = " or ".join(expect) if expect else "more input"
            raise SubsetError(f"expected {want}, found {t if t is not None else 'end of text'}")
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_$]*", t):
            raise SubsetError(f"expected a name, found {t}")
        return t

    def number(self) -> int:
        t = self.take()
        if not t.isdigit():
            raise SubsetError(f"expected a number, found {t}")
        return int(t)

    def range_(self):
        """Optional ``[hi:0]``; returns the width or None."""
        if self.peek() != "[":
            return None
        self.take("[")
        hi = self.number()
        self.take(":")
        if self.number() != 0:
            raise SubsetError("ranges must end at 0")
        self.take("]")
        return hi + 1

    def read(self):
        self.take("module")
        name = self.ident()
        self.take("(")
        ports, out_width, has_clk = [], None, False
        while True:
            direction = self.take("input", "output")
            if direction == "output":
                self.take("reg")
                out_width = self.range_()
                if self.ident() != "out":
                    raise SubsetError("the output port must be named out")
            else:
                w = self.range_()
                pname = self.ident()
                if pname == "clk" and w is None:
                    has_clk = True
                else:
                    ports.append((pname, w))
            if self.take(",", ")") == ")":
                break
        self.take(";")
        if out_width is None and any(p == "out" for p, _ in ports):
            raise SubsetError("duplicate port out")
        regs: dict[str, int | None] = {}
        comb: dict = {}
        seq: dict = {}
        init: set = set()
        while self.peek() != "endmodule":
            t = self.take("reg", "always", "initial")
            if t == "reg":
                w = self.range_()
                while True:
                    r = self.ident()
                    if r in regs:
                        raise SubsetError(f"register {r} declared twice")
                    regs[r] = w
                    if self.take(",", ";") == ";":
                        break
            elif t == "initial":
                self.take("begin")
                while self.peek() != "end":
                    r = self.ident()
                    self.take("=")
                    if self.take() != "1'b0":
                        raise SubsetError("registers must be initialized to 1'b0")
                    self.take(";")
                    init.add(r)
                self.take("end")
            else:
                self.take("@")
                self.take("(")
                if self.peek() == "*":
                    self.take("*")
                    self.take(")")
                    self.block(comb)
                else:
                    self.take("posedge")
                    if self.ident() != "clk":
                        raise SubsetError("only posedge clk blocks are supported")
                    self.take(")")
                    self.block(seq)
        self.take("endmodule")
        if self.peek() is not None:
            raise SubsetError("text after endmodule")
        return name, ports, out_width, has_clk, regs, comb, seq, init

    def block(self, into: dict) -> None:
        self.take("begin")
        while self.peek() != "end":
            lhs = self.ident()
            idx = None
            if self.peek() == "[":
                self.take("[")
                idx = self.number()
                self.take("]")
            self.take("<=")
            expr = self.expr()
            self.take(";")
            key = (lhs, idx)
            if key in into:
                raise SubsetError(f"{lhs} is assigned twice")
            into[key] = expr
        self.take("end")

    def operand(self):
        t = self.take()
        if t in ("1'b0", "1'b1"):
            return ("const", int(t[-1]))
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_$]*", t):
            raise SubsetError(f"unexpected {t} in expression")
        if self.peek() == "[":
            self.take("[")
            i = self.number()
            self.take("]")
            return ("sel", t, i)
        return ("name", t)

    def expr(self):
        if self.peek() in ("!", "~"):
            self.take()
            return ("not", self.operand())
        first = self.operand()
        if self.peek() not in ("&", "|", "^"):
            return first
        op = self.peek()
        items = [first]
        while self.peek() == op:
            self.take(op)
            items.append(self.operand())
        if self.peek() in ("&", "|", "^"):
            raise SubsetError("mixed operators in one expression")
        return ({"&": "AND", "|": "OR", "^": "XOR"}[op], items)


def read_emitted_verilog(text: str) -> Netlist:
    """Parse Verilog in the emitted subset back into a lowered netlist."""
    name, ports, out_width, has_clk, regs, comb, seq, init = _Reader(text).read()
    pins = {p: Pin(p, BIT if w is None else Array(BIT, w)) for p, w in ports}
    for r, _ in seq:
        if r not in regs or regs[r] is not None:
            raise SubsetError(f"clocked register {r} must be a declared scalar reg")
    if seq and not has_clk:
        raise SubsetError("clocked block without a clk input")
    delays = {r: Delay(ZERO, flat=True) for r, _ in seq}
    nodes: dict = {}
    busy: set = set()

    def reg_value(r: str):
        if r in delays:
            return delays[r]
        if r in nodes:
            return nodes[r]
        if r in busy:
            raise CombinationalCycle(f"combinational cycle through {r}")
        busy.add(r)
        w = regs.get(r, "missing")
        if w == "missing":
            raise SubsetError(f"undeclared name {r}")
        if w is None:
            if (r, None) not in comb:
                raise SubsetError(f"register {r} is never assigned")
            v = build(comb[(r, None)])
        else:
            elems = []
            for i in range(w):
                if (r, i) not in comb:
                    raise SubsetError(f"bit {i} of {r} is never assigned")
                elems.append(build(comb[(r, i)]))
            v = ArrayNode(tuple(elems), BIT)
        busy.discard(r)
        nodes[r] = v
        return v

    def build(e):
        tag = e[0]
        if tag == "const":
            return const(e[1])
        if tag == "name":
            if e[1] in pins:
                if pins[e[1]].type != BIT:
                    raise SubsetError(f"input {e[1]} must be indexed")
                return pins[e[1]]
            v = reg_value(e[1])
            if isinstance(v, ArrayNode):
                raise SubsetError(f"register {e[1]} must be indexed")
            return v
        if tag == "sel":
            if e[1] in pins:
                t = pins[e[1]].type
                if not isinstance(t, Array) or not 0 <= e[2] < t.size:
                    raise SubsetError(f"bad select {e[1]}[{e[2]}]")
                return Slice(pins[e[1]], e[2])
            v = reg_value(e[1])
            if not isinstance(v, ArrayNode) or not 0 <= e[2] < len(v.elems):
                raise SubsetError(f"bad select {e[1]}[{e[2]}]")
            return v.elems[e[2]]
        if tag == "not":
            return Not(build(e[1]))
        return Gate(tag, tuple(build(x) for x in e[1]))

    for key in comb:
        if key[0] != "out" and key[0] not in regs:
            raise SubsetError(f"assignment to undeclared {key[0]}")
    if ("out", None) not in comb:
        raise SubsetError("out is never assigned")
    out_expr = comb[("out", None)]
    if out_expr[0] == "name" and out_expr[1] in regs and regs[out_expr[1]] is not None:
        out = reg_value(out_expr[1])
        if out_width != len(out.elems):
            raise SubsetError("output width does not match its driver")
    elif out_expr[0] == "name" and out_expr[1] in pins and out_width is not None:
        if pins[out_expr[1]].type != Array(BIT, out_width):
            raise SubsetError("output width does not match its driver")
        out = ArrayNode(tuple(Slice(pins[out_expr[1]], i) for i in range(out_width)), BIT)
    else:
        if out_width is not None:
            raise SubsetError("a ranged output needs a ranged driver")
        out = build(out_expr)
    for (r, _), e in seq.items():
        delays[r].arg = build(e)
    return Netlist(name, [(p, pins[p].type) for p, _ in ports], out, pins)

