"""Verilog emission for lowered netlists.

Emitted subset (also what ``netsim.read_emitted_verilog`` accepts)::

    module NAME(PORT, ..., output reg [W-1:0] out);     PORT: input [W-1:0] x | input x
        reg rA, rB, ...;                                  scalar registers
        reg [W-1:0] rC;                                   ranged registers
        initial begin rD = 1'b0; ... end                  only with delays
        always @(*) begin ... end                         LHS <= EXPR; statements
        always @(posedge clk) begin ... end               only with delays
    endmodule

    LHS  := r | r[i] | out
    EXPR := 1'b0 | 1'b1 | x | x[i] | !x | x & y & ... | x | y | ... | x ^ y ^ ...

Every source node gets its own register.  r1 is the node driving ``out``;
the remaining numbers follow a pre-order walk from the output (array
elements from the highest index down), and statements appear in post-order
so every register is driven before it is read.
"""

from __future__ import annotations

import re

from .errors import HardwareError, InternalError
from .hw import is_lowered
from .netlist import ArrayNode, Const, Delay, Gate, HwNode, Netlist, Not, Pin, Slice
from .types import Array, Bit, Type

_OPS = {"AND": "&", "OR": "|", "XOR": "^"}
_RESERVED = {
    "always", "and", "assign", "begin", "case", "clk", "default", "else", "end", "endcase",
    "endmodule", "for", "function", "if", "initial", "inout", "input", "integer", "module",
    "nand", "negedge", "nor", "not", "or", "out", "output", "parameter", "posedge", "reg",
    "wire", "xnor", "xor",
}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*\Z")


def render_width(t: Type) -> str:
    """``""`` for a scalar bit, ``"[w-1:0] "`` for anything wider (flattened)."""
    from .hw import bit_width
    if isinstance(t, Bit):
        return ""
    return f"[{bit_width(t) - 1}:0] "


def _check_port_name(name: str) -> None:
    if not _IDENT.match(name) or name in _RESERVED or re.fullmatch(r"r\d+", name):
        raise HardwareError(f"input name '{name}' cannot be used as a Verilog port name")


class _Emitter:
    def __init__(self, n: Netlist):
        self.n = n
        self.names: dict[int, str] = {}
        self.order: list[HwNode] = []
        self.delays: list[Delay] = []

    def ref(self, node: HwNode) -> str:
        if isinstance(node, Pin):
            return node.name
        return self.names[node.uid]

    def number(self) -> None:
        """Pre-order naming from the output; collects post-order in ``self.order``."""
        root = self.n.output
        if isinstance(root, Pin):
            return
        done: set[int] = set()
        stack: list[tuple[HwNode, bool]] = [(root, False)]
        while stack:
            node, post = stack.pop()
            if post:
                self.order.append(node)
                continue
            if node.uid in self.names or isinstance(node, Pin):
                continue
            self.names[node.uid] = f"r{len(self.names) + 1}"
            if isinstance(node, Delay):
                self.delays.append(node)
            stack.append((node, True))
            kids = self.children(node)
            for c in reversed(kids):
                if c.uid not in self.names and not isinstance(c, Pin):
                    stack.append((c, False))
            done.add(node.uid)

    @staticmethod
    def children(node: HwNode) -> tuple:
        if isinstance(node, ArrayNode):
            return tuple(reversed(node.elems))
        if isinstance(node, Slice):
            return ()
        return node.inputs()

    def statement(self, node: HwNode) -> list[str]:
        r = self.names[node.uid]
        if isinstance(node, Const):
            return [f"{r} <= 1'b{node.value};"]
        if isinstance(node, Slice):
            if not isinstance(node.src, Pin):
                raise InternalError("lowered slices must read input pins")
            return [f"{r} <= {node.src.name}[{node.index}];"]
        if isinstance(node, Gate):
            return [f"{r} <= " + f" {_OPS[node.op]} ".join(self.ref(a) for a in node.args) + ";"]
        if isinstance(node, Not):
            return [f"{r} <= !{self.ref(node.arg)};"]
        if isinstance(node, ArrayNode):
            return [f"{r}[{i}] <= {self.ref(e)};" for i, e in reversed(list(enumerate(node.elems)))]
        if isinstance(node, Delay):
            return []
        raise InternalError(f"cannot emit {node!r}")

    def emit(self, module_name: str) -> str:
        n = self.n
        for name, _ in n.ports:
            _check_port_name(name)
        self.number()
        ports = [f"input {render_width(t)}{name}" for name, t in n.ports]
        if self.delays:
            ports.insert(0, "input clk")
        out_t = n.out_type
        ports.append(f"output reg {render_width(out_t)}out")
        lines = [f"module {module_name}({', '.join(ports)});"]
        scalars = [self.names[x.uid] for x in self.order if not isinstance(x, ArrayNode)]
        ranged = [x for x in self.order if isinstance(x, ArrayNode)]
        if scalars:
            lines.append(f"    reg {', '.join(scalars)};")
        for x in ranged:
            lines.append(f"    reg [{len(x.elems) - 1}:0] {self.names[x.uid]};")
        if self.delays:
            lines.append("")
            lines.append("    initial begin")
            for d in self.delays:
                lines.append(f"        {self.names[d.uid]} = 1'b0;")
            lines.append("    end")
        lines.append("")
        lines.append("    always @(*) begin")
        for node in self.order:
            for s in self.statement(node):
                lines.append("        " + s)
        lines.append(f"        out <= {self.ref(n.output)};")
        lines.append("    end")
        if self.delays:
            lines.append("")
            lines.append("    always @(posedge clk) begin")
            for d in self.delays:
                lines.append(f"        {self.names[d.uid]} <= {self.ref(d.arg)};")
            lines.append("    end")
        lines.append("endmodule")
        return "\n".join(lines) + "\n"


def emit(n: Netlist, module_name: str) -> str:
    """Verilog text for a lowered netlist."""
    if not _IDENT.match(module_name) or module_name in _RESERVED:
        raise HardwareError(f"'{module_name}' is not a usable Verilog module name")
    if not is_lowered(n):
        raise InternalError("emit expects a lowered netlist")
    if isinstance(n.out_type, Array) and n.out_type.size == 0:
        raise HardwareError("the module's output has zero width")
    return _Emitter(n).emit(module_name)
