import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from designs import random_design
from gemini import hw
from gemini.compiler import CompileFailed, compile_source
from gemini.errors import CombinationalCycle, HardwareError, NonModuleProgram
from gemini.eval_sw import Evaluator
from gemini.hw import (bit_width, check_acyclic, check_program_module, flat_type, hw_typecheck,
                       is_lowered, lower_records)
from gemini.infer import infer_source
from gemini.netlist import (ArrayNode, Const, Delay, Field, Gate, Netlist, Not, Pin, RecordNode,
                            topo_order)
from gemini.netsim import exhaustive_equiv, simulate
from gemini.types import BIT, Array, HRecord, Temporal


def compiled(src, name="m"):
    return compile_source(src, module_name=name)


def test_adder_types(program_text):
    net = compiled(program_text("adder.gem"), "adder").netlist
    types = hw_typecheck(net)
    assert types[net.output.uid] == Array(BIT, 2)
    assert all(t == BIT for node in topo_order([net.output]) if isinstance(node, Gate)
               for t in [types[node.uid]])


def test_delay_adds_one_time_step():
    b = Pin("b", BIT)
    d = Delay(b)
    types = hw_typecheck(Netlist("m", [("b", BIT)], d, {"b": b}))
    assert types[d.uid] == Temporal(BIT, 1)


def test_gate_fed_an_array_is_rejected():
    p = Pin("x", Array(BIT, 2))
    g = Gate("AND", (ArrayNode((Const(0), Const(1))), p))
    with pytest.raises(HardwareError):
        hw_typecheck(Netlist("m", [("x", Array(BIT, 2))], g, {"x": p}))


def test_typecheck_is_idempotent(program_text):
    net = compiled(program_text("adder.gem"), "adder").netlist
    assert hw_typecheck(net) == hw_typecheck(net)


def test_typecheck_ignores_input_order():
    a, b = Pin("a", BIT), Pin("b", BIT)
    g1 = Gate("XOR", (a, Not(b)))
    g2 = Gate("XOR", (Not(b), a))
    t1 = hw_typecheck(Netlist("m", [("a", BIT), ("b", BIT)], g1, {}))
    t2 = hw_typecheck(Netlist("m", [("a", BIT), ("b", BIT)], g2, {}))
    assert t1[g1.uid] == t2[g2.uid] == BIT


def _cycle():
    a = Pin("a", BIT)
    g = Gate("AND", (a, a))
    g.args = (a, g)
    return a, g


def test_combinational_cycle_is_rejected():
    a, g = _cycle()
    with pytest.raises(CombinationalCycle):
        check_acyclic([g])


def test_cycle_through_a_register_is_allowed():
    a = Pin("a", BIT)
    g = Gate("XOR", (a, a))
    d = Delay(g, flat=True)
    g.args = (a, d)
    check_acyclic([g])
    trace = simulate(Netlist("t", [("a", BIT)], g, {"a": a}), {"a": 1}, cycles=4)
    assert [s["out"] for s in trace] == [1, 0, 1, 0]


def test_record_fields_first_field_high():
    src = "let module m (x: #{a: bit[2], b: bit}) = BODY in m end"
    for expr, want in [("#a(x)", lambda v: v >> 1), ("#b(x)", lambda v: v & 1),
                       ("x", lambda v: v)]:
        low = compiled(src.replace("BODY", expr)).lowered
        assert is_lowered(low)
        for v in range(8):
            assert simulate(low, {"x": v})["out"] == want(v)


def test_pair_puts_first_element_at_index_one():
    low = compiled("let module m #(a: bit, b: bit) = #(a, b) in m end").lowered
    for a in (0, 1):
        for b in (0, 1):
            assert simulate(low, {"a": a, "b": b})["out"] == a << 1 | b


def test_flat_widths():
    rec = HRecord((("a", Array(BIT, 2)), ("b", BIT)))
    assert bit_width(rec) == 3
    assert flat_type(rec) == Array(BIT, 3)
    assert flat_type(Array(Array(BIT, 2), 3)) == Array(BIT, 6)
    assert flat_type(BIT) == BIT
    assert bit_width(HRecord(())) == 0


def test_lowering_leaves_no_records():
    comp = compiled("let module m (x: #{a: bit[2], b: bit}) = #{p = #b(x), q = #a(x)} in m end")
    assert not is_lowered(comp.netlist)
    assert is_lowered(comp.lowered)
    kinds = {type(n) for n in topo_order([comp.lowered.output])}
    assert not kinds & {RecordNode, Field}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_lowering_preserves_behaviour(seed):
    comp = compiled(random_design(seed), "design")
    assert exhaustive_equiv(comp.netlist, comp.lowered, engines=("reference", "kernel"))


def test_mutated_field_order_is_detected(monkeypatch):
    src = "let module m #(a: bit, b: bit[2]) = #{p = a, q = b} in m end"
    comp = compiled(src)
    original = hw._Lowerer._bits

    def forward_records(self, node):
        if isinstance(node, RecordNode):
            out = []
            for _, x in node.fields:
                out += self.bits(x)
            return out
        return original(self, node)

    monkeypatch.setattr(hw._Lowerer, "_bits", forward_records)
    wrong = lower_records(comp.netlist)
    assert not exhaustive_equiv(comp.netlist, wrong, engines=("reference", "kernel"))


def _evaluate(src):
    res = infer_source(src, require_module=False)
    return Evaluator().evaluate(res.tree)


def test_concrete_module_is_a_program(program_text):
    check_program_module(_evaluate(program_text("adder.gem")))


@pytest.mark.parametrize("src", [
    "42",
    "let module rca <:n:> (a: bit[n]) = a in rca end",
    "HW.dff",
])
def test_non_module_programs_are_rejected(src):
    with pytest.raises(NonModuleProgram):
        check_program_module(_evaluate(src))


def test_returning_an_integer_fails_to_compile():
    with pytest.raises(CompileFailed) as exc:
        compiled("42")
    assert [d.code for d in exc.value.diagnostics] == ["E205"]
