import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from designs import random_design
from gemini import _simcore_py, netsim
from gemini.compiler import compile_source
from gemini.errors import CombinationalCycle, SimulationError, SubsetError
from gemini.netlist import ArrayNode, Const, Delay, Gate, Netlist, Not, Pin, Slice
from gemini.netsim import (MAX_EQUIV_BITS, compile_program, exhaustive_equiv, read_emitted_verilog,
                           simulate, simulate_trace)
from gemini.types import BIT, Array

ADDER_LISTING = """\
module adder(input [1:0] a, input [1:0] b, output reg [1:0] out);
    reg r9, r13, r10, r12, r11, r2, r6, r8, r7, r3, r5, r4;
    reg [1:0] r1;

    always @(*) begin
        r4 <= a[1];
        r5 <= b[1];
        r3 <= r4 ^ r5;
        r7 <= a[0];
        r8 <= b[0];
        r6 <= r7 & r8;
        r2 <= r3 ^ r6; r11 <= a[0];
        r12 <= b[0];
        r10 <= r11 ^ r12; r13 <= 1'b0;
        r9 <= r10 ^ r13; r1[1] <= r2; r1[0] <= r9;
        out <= r1;
    end
endmodule
"""


def two_bit(op):
    a, b = Pin("a", BIT), Pin("b", BIT)
    return Netlist(op, [("a", BIT), ("b", BIT)], Gate(op, (a, b)), {"a": a, "b": b})


def test_not_gate():
    x = Pin("x", BIT)
    n = Netlist("m", [("x", BIT)], Not(x), {"x": x})
    assert simulate(n, {"x": 0})["out"] == 1
    assert simulate(n, {"x": 1})["out"] == 0


@pytest.mark.parametrize("op, table", [("AND", [0, 0, 0, 1]), ("OR", [0, 1, 1, 1]),
                                       ("XOR", [0, 1, 1, 0])])
def test_gate_truth_tables(op, table):
    n = two_bit(op)
    for engine in ("reference", "kernel"):
        got = [simulate(n, {"a": v & 1, "b": v >> 1}, engine=engine)["out"] for v in range(4)]
        assert got == table


def test_de_morgan():
    a, b = Pin("a", BIT), Pin("b", BIT)
    lhs = Netlist("m", [("a", BIT), ("b", BIT)], Not(Gate("AND", (a, b))), {})
    rhs = Netlist("m", [("a", BIT), ("b", BIT)], Gate("OR", (Not(a), Not(b))), {})
    assert exhaustive_equiv(lhs, rhs)


def test_and_is_not_or():
    assert not exhaustive_equiv(two_bit("AND"), two_bit("OR"))


def test_netlist_equals_itself(program_text):
    n = compile_source(program_text("adder.gem"), module_name="adder").lowered
    assert exhaustive_equiv(n, n)


def test_adder_against_arithmetic(program_text):
    n = compile_source(program_text("adder.gem"), module_name="adder").lowered
    for a in range(4):
        for b in range(4):
            assert simulate(n, {"a": a, "b": b})["out"] == (a + b) % 4


def test_hand_written_listing_is_an_adder(program_text):
    n = read_emitted_verilog(ADDER_LISTING)
    assert [(p, t) for p, t in n.ports] == [("a", Array(BIT, 2)), ("b", Array(BIT, 2))]
    for a in range(4):
        for b in range(4):
            assert simulate(n, {"a": a, "b": b})["out"] == (a + b) % 4
    ours = compile_source(program_text("adder.gem"), module_name="adder").lowered
    assert exhaustive_equiv(n, ours)


def test_emitted_not_reads_back_as_one_gate():
    text = compile_source("let module m (x: bit) = !x in m end", module_name="m").verilog
    n = read_emitted_verilog(text)
    assert isinstance(n.output, Not) and isinstance(n.output.arg, Pin)


def test_register_lags_by_one_cycle():
    x = Pin("x", BIT)
    n = Netlist("m", [("x", BIT)], Delay(x, flat=True), {"x": x})
    stim = [1, 0, 1, 1, 0]
    for engine in ("reference", "kernel"):
        outs = [r["out"] for r in simulate_trace(n, [{"x": v} for v in stim], engine=engine)]
        assert outs == [0] + stim[:-1]


def test_two_register_shift_chain():
    x = Pin("x", BIT)
    n = Netlist("m", [("x", BIT)], Delay(Delay(x, flat=True), flat=True), {"x": x})
    outs = [r["out"] for r in simulate(n, {"x": 1}, cycles=3)]
    assert outs == [0, 0, 1]


def test_dff_program_trace():
    comp = compile_source("let module m (x: bit[2]) = HW.dff x in m end", module_name="m")
    stim = [{"x": v} for v in (3, 1, 2, 0)]
    assert [r["out"] for r in simulate_trace(comp.lowered, stim)] == [0, 3, 1, 2]
    assert [r["out"] for r in simulate_trace(comp.netlist, stim)] == [0, 3, 1, 2]


@pytest.mark.parametrize("text, err", [
    ("module m(input x, output reg out); always @(*) begin out <= x + x; end endmodule",
     SubsetError),
    ("module m(input x, output reg out); assign out = x; endmodule", SubsetError),
    ("module m(input x, output reg out); reg r1; always @(*) begin r1 <= x & x | x; "
     "out <= r1; end endmodule", SubsetError),
    ("module m(input x, output reg out); always @(*) begin out <= y; end endmodule",
     SubsetError),
    ("module m(input x, output reg out); reg r1, r2; always @(*) begin r1 <= r2; r2 <= r1; "
     "out <= r1; end endmodule", CombinationalCycle),
    ("module m(input x, output reg out); reg r1; always @(posedge clk) begin r1 <= x; end "
     "always @(*) begin out <= r1; end endmodule", SubsetError),
])
def test_text_outside_the_subset(text, err):
    with pytest.raises(err):
        read_emitted_verilog(text)


def test_comments_are_ignored():
    text = ("// header\nmodule m(input x, output reg out); /* block */\n"
            "always @(*) begin out <= !x; // invert\nend\nendmodule\n")
    assert simulate(read_emitted_verilog(text), {"x": 0})["out"] == 1


def test_unknown_and_missing_inputs():
    n = two_bit("AND")
    with pytest.raises(SimulationError, match="unknown"):
        simulate(n, {"a": 1, "b": 0, "c": 1})
    with pytest.raises(SimulationError, match="no value"):
        simulate(n, {"a": 1})
    with pytest.raises(SimulationError, match="does not fit"):
        simulate(n, {"a": 2, "b": 0})


def test_port_mismatch_is_an_error():
    x = Pin("x", BIT)
    with pytest.raises(SimulationError):
        exhaustive_equiv(two_bit("AND"), Netlist("m", [("x", BIT)], x, {"x": x}))


def test_width_limit():
    wide = MAX_EQUIV_BITS + 1
    p = Pin("x", Array(BIT, wide))
    n = Netlist("m", [("x", Array(BIT, wide))], Slice(p, 0), {"x": p})
    with pytest.raises(SimulationError, match="exceed"):
        exhaustive_equiv(n, n)


def test_twenty_bits_is_accepted():
    p = Pin("x", Array(BIT, MAX_EQUIV_BITS))
    n = Netlist("m", [("x", p.type)], Gate("XOR", tuple(Slice(p, i) for i in range(20))),
                {"x": p})
    assert exhaustive_equiv(n, n)


def test_topological_orders_agree():
    a, b, c = Pin("a", BIT), Pin("b", BIT), Pin("c", BIT)
    ports = [("a", BIT), ("b", BIT), ("c", BIT)]
    x1 = Gate("XOR", (Gate("AND", (a, b)), Not(c)))
    x2 = Gate("XOR", (Not(c), Gate("AND", (b, a))))
    assert exhaustive_equiv(Netlist("m", ports, x1, {}), Netlist("m", ports, x2, {}))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_compiled_and_fallback_kernels_agree(seed):
    n = compile_source(random_design(seed), module_name="design").lowered
    prog = compile_program(n)
    rng = np.random.default_rng(seed)
    inputs = rng.integers(0, 2 ** 63, size=(prog.n_inputs, 3), dtype=np.uint64)
    state = rng.integers(0, 2 ** 63, size=(len(prog.delay_args), 3), dtype=np.uint64)
    fast = prog.run(inputs, state, 3)
    slow = prog.run(inputs, state, 3, kernel=_simcore_py)
    assert np.array_equal(fast, slow)


def test_compiled_kernel_is_preferred():
    try:
        import gemini._simcore  # noqa: F401
        built = True
    except ImportError:
        built = False
    want = "cython" if built and os.environ.get("GEMINI_PURE") != "1" else "python"
    assert netsim.KERNEL == want


def test_constant_output():
    n = Netlist("m", [], ArrayNode((Const(1), Const(0), Const(1)), BIT), {})
    assert simulate(n, {})["out"] == 0b101
