import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gemini.compiler import CompileFailed, compile_source
from gemini.errors import DivisionByZero, EvalError, MatchFailure, OutOfRange, UnsupportedFeature
from gemini.eval_sw import Evaluator, floor_div, floor_mod
from gemini.infer import infer_program, infer_source
from gemini.metatheory import fresh, gen_well_typed
from gemini.netlist import ArrayNode, Const, Gate, Netlist, Not, Pin, Slice
from gemini.netsim import simulate
from gemini.types import (
    Arrow, Bit, Int, ListT, Meta, Poly, Real, Ref, SRecord, String, SubstEnv, Sw,
)
from gemini.values import NIL, Builtin, Closure, Cons, CtorVal, RecordVal, RefVal, SWVal


def run(src):
    res = infer_source(src, require_module=False)
    assert res.ok, res.diagnostics
    out = io.StringIO()
    ev = Evaluator(out=out)
    return ev.evaluate(res.tree), out.getvalue(), ev


def value(src):
    return run(src)[0]


def bits(node):
    """Literal bits of an evaluated array, index 0 first."""
    assert isinstance(node, ArrayNode)
    return [e.value for e in node.elems]


def test_false_guard_takes_else():
    assert value("if 0 then 1 else 2") == 2


def test_nonzero_guard_takes_then():
    assert value("if ~5 then 1 else 2") == 1


@pytest.mark.parametrize("src, want", [("7 / 2", 3), ("~7 / 2", -4), ("7 % 2", 1), ("~7 % 2", 1),
                                       ("7 % ~2", -1), ("~3", -3)])
def test_integer_arithmetic(src, want):
    assert value(src) == want


@given(st.integers(-1000, 1000), st.integers(-50, 50).filter(bool))
def test_floor_division_identity(a, b):
    q, r = floor_div(a, b), floor_mod(a, b)
    assert q * b + r == a
    assert r == 0 or (r > 0) == (b > 0)


def test_division_by_zero_is_a_compile_time_error():
    with pytest.raises(DivisionByZero):
        value("1 / 0")


def test_overflow_wraps_or_raises():
    with pytest.raises(EvalError):
        value("2147483647 + 1")


def test_inner_binding_shadows():
    assert value("let val x = 1 in let val x = 2 in x end end") == 2


def test_first_matching_clause_wins():
    assert value("case 3 of 3 => 10 |: _ => 20 |: 3 => 30") == 10


def test_unmatched_pattern_raises():
    with pytest.raises(MatchFailure):
        value("let fun f x = case x of 0 => 1 in f 5 end")


def test_list_index_out_of_bounds():
    with pytest.raises(EvalError):
        value("List.nth ([1], 5)")


def test_assignments_happen_in_program_order():
    src = ("let val r = ref 0 val _ = (r := $r + 1; print (Int.toString ($r)); "
           "r := $r * 10; print (Int.toString ($r))) in $r end")
    v, printed, _ = run(src)
    assert (v, printed) == (10, "110")


def test_arguments_evaluate_left_to_right():
    src = 'let fun f a b = a * 10 + b in f (print "1"; 1) (print "2"; 2) end'
    v, printed, _ = run(src)
    assert (v, printed) == (12, "12")


def test_not_of_literal_folds():
    v = value("!'b:0")
    assert isinstance(v, Const) and v.value == 1


def test_elementwise_and_folds():
    assert bits(value("#['b:1,'b:0] & #['b:1,'b:1]")) == [1, 0]


def test_alternating_array_generation():
    assert bits(value("#[8; gen i => if (i % 2 = 0) then 'b:0 else 'b:1]")) == [0, 1] * 4


def test_empty_array_generation():
    assert value("#[0; gen i => 'b:0]").elems == ()


def failure_code(src):
    """Code of the first error, whether inference or evaluation finds it."""
    res = infer_source(src, require_module=False)
    if res.errors:
        return res.errors[0].code
    try:
        Evaluator().evaluate(res.tree)
    except EvalError as exc:
        return exc.code
    return None


def test_negative_array_size():
    assert failure_code("#[~1; gen i => 'b:0]") == "E303"
    assert failure_code("let val n = 0 - 1 in #[n; gen i => 'b:0] end") == "E303"


def test_generator_may_read_earlier_elements():
    v = value("let val a = #[4; gen i => if i = 0 then 'b:1 else !(a[:i - 1:])] in a end")
    assert bits(v) == [1, 0, 1, 0]


def test_array_access():
    assert value("#['b:0, 'b:1][:1:]").value == 1


def test_index_expression_is_evaluated_first():
    assert value("#['b:0, 'b:0, 'b:1][:1 + 1:]").value == 1


def test_out_of_range_access():
    assert failure_code("#['b:0][:3:]") == "E303"
    assert failure_code("let val k = 1 + 2 in #['b:0][:k:] end") == "E303"
    with pytest.raises(OutOfRange):
        value("let fun pick k = sw (#['b:0][:k:]) in pick 3 end")


@pytest.mark.parametrize("src, want", [
    ("8 'u: 5", [1, 0, 1, 0, 0, 0, 0, 0]),
    ("4 's: ~3", [1, 0, 1, 1]),
    ("3 'u: 0", [0, 0, 0]),
])
def test_bit_array_literals(src, want):
    assert bits(value(src)) == want


def test_unsigned_bit_array_overflow():
    with pytest.raises(EvalError):
        value("2 'u: 4")


def test_signed_range_is_two_complement():
    assert bits(value("3 's: ~4")) == [0, 0, 1]
    with pytest.raises(EvalError):
        value("3 's: 4")


def test_real_bit_arrays_are_unsupported():
    with pytest.raises(UnsupportedFeature):
        value("4 'r: 1")


def test_sw_unsw_round_trip_adds_no_nodes():
    comp = compile_source("let module m (x: bit) = unsw (sw (!x)) in m end", module_name="m")
    out = comp.netlist.output
    assert isinstance(out, Not) and isinstance(out.arg, Pin)


def test_and_reduction_is_one_gate():
    comp = compile_source("let module m (x: bit[3]) = &-> x in m end", module_name="m")
    out = comp.netlist.output
    assert isinstance(out, Gate) and out.op == "AND" and len(out.args) == 3
    assert all(isinstance(a, Slice) for a in out.args)


def test_explicit_logic_gate_tree(program_text):
    comp = compile_source(program_text("explicit_logic.gem"), module_name="mycircuit")
    out = comp.netlist.output
    assert isinstance(out, Not)
    xor = out.arg
    assert isinstance(xor, Gate) and xor.op == "XOR"
    c, conj = xor.args
    assert isinstance(c, Pin) and c.name == "c"
    assert isinstance(conj, Gate) and conj.op == "AND"
    assert [p.name for p in conj.args] == ["a", "b"]


def test_identity_module_wires_output_to_pin():
    comp = compile_source("let module id (x: bit) = x in id end", module_name="id")
    assert comp.netlist.output is comp.netlist.pins["x"]


def test_adder_ports(program_text):
    comp = compile_source(program_text("adder.gem"), module_name="adder")
    assert [(n, str(t.size)) for n, t in comp.netlist.ports] == [("a", "2"), ("b", "2")]
    assert comp.netlist.out_type.size == 2


def test_residual_size_parameter_is_rejected():
    with pytest.raises(CompileFailed):
        compile_source("let module m <:n:> (x: bit[n]) = x in m end")


def test_hardware_datatype_matched_at_staging_time():
    src = ("let hdatatype h = A of bit |: B of bit\n"
           "module m (x: bit) = case A x of A y => y |: B y => y in m end")
    comp = compile_source(src, module_name="m")
    assert comp.netlist.output is comp.netlist.pins["x"]


def test_hardware_datatype_output_is_unsupported():
    src = "let hdatatype h = A of bit |: B of bit\nmodule m (x: bit) = A x in m end"
    with pytest.raises(CompileFailed) as exc:
        compile_source(src, module_name="m")
    assert exc.value.diagnostics[-1].code == "E306"


_GATES = st.recursive(
    st.sampled_from(["'b:0", "'b:1"]),
    lambda inner: st.one_of(
        st.tuples(st.sampled_from(["&", "|", "^"]), inner, inner),
        st.tuples(st.just("!"), inner),
    ),
    max_leaves=12,
)


def _render(t):
    if isinstance(t, str):
        return t
    if t[0] == "!":
        return f"!({_render(t[1])})"
    return f"({_render(t[1])} {t[0]} {_render(t[2])})"


def _raw(t):
    """The same tree as netlist nodes, without any folding."""
    if isinstance(t, str):
        return Const(int(t[-1]))
    if t[0] == "!":
        return Not(_raw(t[1]))
    op = {"&": "AND", "|": "OR", "^": "XOR"}[t[0]]
    return Gate(op, (_raw(t[1]), _raw(t[2])))


@settings(max_examples=300)
@given(_GATES)
def test_constant_folding_agrees_with_simulation(tree):
    folded = value(_render(tree))
    assert isinstance(folded, Const)
    net = Netlist("t", [], _raw(tree))
    assert simulate(net, {}, engine="reference")["out"] == folded.value
    assert simulate(net, {}, engine="kernel")["out"] == folded.value


def _inhabits(v, t, store) -> bool:
    """Value-typing oracle over the canonical forms of each software type."""
    if isinstance(t, Poly):
        t = t.body
    if isinstance(t, Meta):
        return True
    if isinstance(t, Int):
        return isinstance(v, int) and -(2 ** 31) <= v < 2 ** 31
    if isinstance(t, Real):
        return isinstance(v, float)
    if isinstance(t, String):
        return isinstance(v, str)
    if isinstance(t, ListT):
        return (v is NIL or isinstance(v, Cons)) and all(_inhabits(x, t.elem, store) for x in v)
    if isinstance(t, SRecord):
        return (isinstance(v, RecordVal) and [lab for lab, _ in v.fields] == [lab for lab, _ in t.fields]
                and all(_inhabits(x, ft, store) for (_, x), (_, ft) in zip(v.fields, t.fields)))
    if isinstance(t, Ref):
        return isinstance(v, RefVal) and _inhabits(store.read(v), t.elem, store)
    if isinstance(t, Arrow):
        return isinstance(v, (Closure, Builtin, CtorVal))
    if isinstance(t, Sw):
        hw = v.hw if isinstance(v, SWVal) else None
        if isinstance(t.hw, Bit):
            return isinstance(hw, Const) and hw.value in (0, 1)
        return hw is not None and getattr(hw, "type", None) == t.hw
    return False


def test_values_inhabit_their_inferred_types():
    checked = 0
    for seed in range(1000):
        term, _ = gen_well_typed(seed, 5)
        copy = fresh(term)
        res = infer_program(copy, require_module=False)
        assert res.ok
        ev = Evaluator()
        try:
            v = ev.evaluate(copy)
        except EvalError:
            continue
        assert _inhabits(v, SubstEnv().zonk(res.type), ev.store), (seed, v, res.type)
        checked += 1
    assert checked > 900


@settings(max_examples=100)
@given(st.lists(st.integers(0, 99), min_size=2, max_size=5))
def test_sequence_matches_its_application_encoding(xs):
    """``(e1; e2)`` behaves like applying a function that ignores its argument to e1."""
    effects = [f'(print "{x},"; {x})' for x in xs]
    native = "(" + "; ".join(effects) + ")"
    encoded = effects[-1]
    for i, e in enumerate(reversed(effects[:-1])):
        encoded = f"let fun k{i} unused{i} = {encoded} in k{i} {e} end"
    assert run(native)[:2] == run(encoded)[:2]
