import pytest

from designs import random_design
from gemini.compiler import compile_source
from gemini.errors import KindError, TypeMismatch
from gemini.infer import decorate, generalize, infer_declarations, infer_source, instantiate, unify
from gemini.parser import parse_source
from gemini.syntax import to_sexpr
from gemini.types import (
    BIT, HARDWARE, INT, MODULE, SOFTWARE, STRING, Array, Arrow, ListT, Meta, Module, ParamModule,
    Poly, SMu, SubstEnv, Sw, alpha_equivalent, fresh_meta, kind_of, render, sub_types, substitute,
    unfold,
)


def codes(src):
    return [d.code for d in infer_source(src, require_module=False).diagnostics]


def test_decoration_gives_each_parameter_its_own_variable():
    tree = parse_source("let fun foo (x, y, s: string) = s in foo end")
    decorate(tree)
    text = to_sexpr(tree, typed=True)
    assert '(PVar "x" None : \'a)' in text
    assert '(PVar "y" None : \'b)' in text
    assert ": string)" in text


def test_annotation_translates_directly():
    types = infer_declarations("module f (x: bit[8]) = x")
    assert render(types["f"]) == "bit[8] ~> bit[8]"


def test_functions_do_not_take_bare_hardware():
    assert codes("let fun f (x: bit[8]) = x in f end") == ["E202"]


def test_recursive_datatype_is_wrapped_in_mu():
    t = infer_declarations("sdatatype t = C of t |: D of int\nval v = C (D 1)")["v"]
    assert isinstance(t, SMu)
    once = unfold(t)
    assert not isinstance(once, SMu)
    assert dict(once.ctors)["C"] == t


def test_unify_soft_meta_with_int():
    a = fresh_meta(SOFTWARE)
    assert unify(a, INT, SubstEnv()) == {a.id: INT}


def test_unify_hard_meta_with_int_is_kind_error():
    with pytest.raises(KindError):
        unify(fresh_meta(HARDWARE), INT, SubstEnv())


def test_unify_descends_into_arrows():
    b = fresh_meta(SOFTWARE)
    assert unify(Arrow(INT, b), Arrow(INT, STRING), SubstEnv()) == {b.id: STRING}


def test_unify_array_sizes():
    with pytest.raises(TypeMismatch):
        unify(Array(BIT, 8), Array(BIT, 16), SubstEnv())


def test_substitute_single_pass():
    a = fresh_meta(SOFTWARE)
    sigma = SubstEnv()
    sigma.bind(a, INT)
    assert substitute(sigma, {"x": a})[0] == {"x": INT}


def test_substitute_chases_chains():
    a, b = fresh_meta(SOFTWARE), fresh_meta(SOFTWARE)
    sigma = SubstEnv()
    sigma.bind(a, b)
    sigma.bind(b, INT)
    env, passes = substitute(sigma, {"x": a})
    assert env == {"x": INT} and passes == 2


def test_substitute_skips_bound_variables():
    a = fresh_meta(SOFTWARE)
    sigma = SubstEnv()
    sigma.bind(a, INT)
    poly = Poly((a,), Arrow(a, a))
    assert substitute(sigma, {"f": poly})[0]["f"] == poly


def test_substitute_fixed_point_is_stable():
    a, b = fresh_meta(SOFTWARE), fresh_meta(SOFTWARE)
    sigma = SubstEnv()
    sigma.bind(a, ListT(b))
    sigma.bind(b, INT)
    once, _ = substitute(sigma, {"x": a, "y": Arrow(a, b)})
    twice, passes = substitute(sigma, once)
    assert once == twice and passes == 0


def test_generalize_quantifies_free_variables():
    a = fresh_meta(SOFTWARE)
    g = generalize(Arrow(a, a), set(), SubstEnv())
    assert isinstance(g, Poly) and g.vars == (a,)


def test_generalize_respects_environment():
    a = fresh_meta(SOFTWARE)
    assert generalize(Arrow(a, a), {a.id}, SubstEnv()) == Arrow(a, a)


def test_instantiations_share_no_variables():
    a = fresh_meta(SOFTWARE)
    poly = Poly((a,), Arrow(a, a))
    i1, i2 = instantiate(poly), instantiate(poly)
    assert alpha_equivalent(i1, Arrow(a, a))
    free1, free2 = SubstEnv().free_metas(i1), SubstEnv().free_metas(i2)
    assert not (free1.keys() & free2.keys())
    assert a.id not in free1


def test_concat_signature():
    t = infer_declarations("fun concat x y = x::y")["concat"]
    assert isinstance(t, Poly) and render(t) == "'a -> 'a list -> 'a list"


def test_map_signature():
    t = infer_declarations("fun map f l = case l of [] => [] |: x::xs => f x :: map f xs")["map"]
    assert render(t) == "('a -> 'b) -> 'a list -> 'b list"


def test_multiply_int_by_string():
    assert codes('42 * "a"') == ["E201"]


def test_branches_must_agree():
    assert codes('if 1 then 2 else "x"') == ["E201"]


def test_my_mod_has_module_type():
    t = infer_declarations("module my_mod (a: bit[8]) = a[:7:]")["my_mod"]
    assert t == Module(Array(BIT, 8), BIT)


def test_size_parameter_gives_parameterized_module():
    t = infer_declarations("module m <:n:> (x: bit[n]) = x")["m"]
    assert isinstance(t, ParamModule) and t.size == INT


def test_errors_are_recovered_and_counted():
    src = 'let val a = 1 + "x" val b = 2.0 + 3 val c = "s" - 1 in a end'
    assert codes(src) == ["E201", "E201", "E201"]


def test_type_error_carries_both_types():
    [d] = infer_source('42 * "a"', require_module=False).diagnostics
    assert set(d.types) == {"int", "string"}


def test_non_exhaustive_match_is_a_warning():
    res = infer_source("let fun f x = case x of 0 => 1 in f end", require_module=False)
    assert [d.code for d in res.warnings] == ["W001"] and res.ok


@pytest.mark.parametrize("src", [
    "let fun f x = x val y = f = f in y end",
    "let val r = ref 1 val q = (r = r) in q end",
    "let val s = sw 'b:1 val q = (s = s) in q end",
])
def test_equality_is_rejected_on_functions_refs_and_wrapped_hardware(src):
    assert codes(src) == ["E201"]


def test_value_restriction():
    types = infer_declarations("val r = ref []\nval f = let fun id x = x in id end\nfun id x = x")
    assert not isinstance(types["r"], Poly)
    assert not isinstance(types["f"], Poly)
    assert isinstance(types["id"], Poly)


def test_let_polymorphism():
    types = infer_declarations('fun id x = x\nval pair = (id 1, id "s")')
    assert render(types["pair"]) == "int * string"


def test_inner_scope_shadows_and_restores():
    types = infer_declarations('val x = 1\nval y = let val x = "s" in x end\nval z = x')
    assert (types["y"], types["z"]) == (STRING, INT)


def test_unbound_identifier():
    assert codes("undefined_x + 1") == ["E204"]


def test_unknown_type_name():
    assert codes("let val x : foo = 1 in x end") == ["E206"]


def test_program_must_be_a_module():
    res = infer_source("42")
    assert [d.code for d in res.errors] == ["E205"]


def test_parameterized_program_is_rejected():
    res = infer_source("let module m <:n:> (x: bit[n]) = x in m end")
    assert [d.code for d in res.errors] == ["E205"]


def _legal(t, inside=False):
    """No software inside `sw`, no module nested in another type."""
    k = kind_of(t)
    if inside and k == MODULE:
        return False
    if isinstance(t, Sw) and kind_of(t.hw) == SOFTWARE:
        return False
    if isinstance(t, (Poly, SMu)):
        return _legal(t.body, inside)
    return all(_legal(s, True) for s in sub_types(t) if not isinstance(s, Meta))


@pytest.mark.parametrize("seed", range(30))
def test_accepted_programs_keep_kinds_apart(seed):
    comp = compile_source(random_design(seed), module_name="design")
    assert _legal(comp.type)
    res = infer_source(random_design(seed))
    assert all(_legal(t) for t in res.bindings.values())


def test_accepted_program_bindings_keep_kinds_apart(program_text):
    for name in ("adder.gem", "explicit_logic.gem"):
        res = infer_source(program_text(name))
        assert res.ok
        assert all(_legal(t) for t in res.bindings.values())
