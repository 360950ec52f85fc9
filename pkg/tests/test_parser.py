from dataclasses import fields

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gemini import syntax as S
from gemini.errors import ParseError
from gemini.lexer import tokenize
from gemini.parser import desugar, parse, parse_source
from gemini.syntax import to_sexpr


def raw(src):
    return parse(tokenize(src))


def core(src):
    return to_sexpr(parse_source(src))


def test_multiplication_binds_tighter():
    assert core("1 + 2 * 3") == '(BinOp "+" (IntLit 1) (BinOp "*" (IntLit 2) (IntLit 3)))'


def test_cons_is_right_associative():
    assert core("a::b::c") == '(BinOp "::" (Var "a") (BinOp "::" (Var "b") (Var "c")))'


def test_if_if_if_is_rejected_at_the_second_if():
    with pytest.raises(ParseError) as exc:
        parse_source("if if if")
    assert exc.value.span.col == 4


def test_tuple_becomes_numbered_record():
    assert core("(1, 2)") == '(RecordExpr (("1" (IntLit 1)) ("2" (IntLit 2))))'


def test_if_then_gets_unit_else():
    assert core("if x then y") == '(If (Var "x") (Var "y") (RecordExpr ()))'


def test_not_becomes_conditional():
    assert core("not x") == '(If (Var "x") (IntLit 0) (IntLit 1))'


def test_unit_is_empty_record():
    assert core("()") == "(RecordExpr ())"


def test_collapse_operator_reduces_both_sides():
    assert core("a && b") == '(BinOp "&" (UnOp "|->" (Var "a")) (UnOp "|->" (Var "b")))'


def test_nil_and_empty_brackets_agree():
    assert core("nil") == core("[]")


def test_bit_array_operators_do_not_chain():
    with pytest.raises(ParseError, match="non-associative"):
        parse_source("3 'u: 4 'u: 5")


def test_trailing_comma_rejected():
    with pytest.raises(ParseError):
        parse_source("[1, 2,]")


def test_unexpected_token_lists_expected_set():
    with pytest.raises(ParseError, match="expected one of"):
        parse_source("let val = 3 in x end")


def test_module_with_size_parameter_parses():
    tree = parse_source("let module m <:n:> (x: bit[n]) = x in m <:4:> end")
    assert isinstance(tree, S.Let) and isinstance(tree.body, S.Paramize)


# Reference precedence table: rows from tightest to loosest binding.
_ROWS = [
    (["/.", "*.", "/", "*", "&", "%"], "left"),
    (["-.", "+.", "-", "+", "^", "|"], "left"),
    (["&&"], "left"),
    (["||", "^^"], "left"),
    (["::"], "right"),
    ([">", "<", ">=", "<="], "left"),
    (["=", "<>"], "left"),
    (["<<", ">>", ">>>"], "left"),
    (["andalso"], "left"),
    (["orelse"], "left"),
    ([":="], "right"),
]
_PREC = {op: (len(_ROWS) - i, assoc) for i, (ops, assoc) in enumerate(_ROWS) for op in ops}


def shunting_yard(operands, operators):
    """Tree of a flat infix expression as nested (op, left, right) tuples."""
    out = [operands[0]]
    stack = []

    def reduce():
        op = stack.pop()
        r = out.pop()
        out.append((op, out.pop(), r))

    for op, operand in zip(operators, operands[1:]):
        p, assoc = _PREC[op]
        while stack:
            q = _PREC[stack[-1]][0]
            if q > p or (q == p and assoc == "left"):
                reduce()
            else:
                break
        stack.append(op)
        out.append(operand)
    while stack:
        reduce()
    return out[0]


def shape(node):
    if isinstance(node, S.Var):
        return node.name
    if isinstance(node, S.BinOp):
        return (node.op, shape(node.left), shape(node.right))
    if isinstance(node, S.Collapse):
        return (node.op, shape(node.left), shape(node.right))
    if isinstance(node, S.AndAlso):
        return ("andalso", shape(node.left), shape(node.right))
    if isinstance(node, S.OrElse):
        return ("orelse", shape(node.left), shape(node.right))
    if isinstance(node, S.Assign):
        return (":=", shape(node.target), shape(node.value))
    raise AssertionError(f"unexpected node {node!r}")


@settings(max_examples=500)
@given(st.lists(st.sampled_from(sorted(_PREC)), min_size=1, max_size=8))
def test_parse_matches_precedence_oracle(ops):
    names = [f"v{i}" for i in range(len(ops) + 1)]
    src = names[0] + "".join(f" {op} {n}" for op, n in zip(ops, names[1:]))
    assert shape(raw(src)) == shunting_yard(names, ops)


_EXPRS = [
    "1 + 2 * 3", "(1, (2, 3))", "if a then b", "not (a andalso b orelse c)", "a && b || c",
    "let val x = (1, ()) in x end", "case l of [] => 0 |: x::xs => 1",
    "#[4; gen i => 'b:0]", "#(a, b)", "fun_app x y z", "#1 (2, 3)", "(a; b; c)",
    "let fun f (x, y) = if x then y in f end",
]


@pytest.mark.parametrize("src", _EXPRS)
def test_desugar_is_idempotent(src):
    once = desugar(raw(src))
    assert to_sexpr(desugar(once)) == to_sexpr(once)


_SUGARED = (S.TupleExpr, S.HwTupleExpr, S.UnitExpr, S.AndAlso, S.OrElse, S.NotExpr, S.Collapse,
            S.PTuple, S.TyTuple)


def walk(node):
    if isinstance(node, (list, tuple)):
        for x in node:
            yield from walk(x)
    elif isinstance(node, S.Node):
        yield node
        for f in fields(node):
            if f.name not in ("span", "ty", "info"):
                yield from walk(getattr(node, f.name))


@pytest.mark.parametrize("src", _EXPRS)
def test_no_derived_forms_survive(src):
    tree = parse_source(src)
    assert not [n for n in walk(tree) if isinstance(n, _SUGARED)]
    assert not [n for n in walk(tree) if isinstance(n, S.If) and n.orelse is None]


def _children(node):
    for f in fields(node):
        if f.name in ("span", "ty", "info"):
            continue
        for c in walk_direct(getattr(node, f.name)):
            yield c


def walk_direct(value):
    if isinstance(value, S.Node):
        yield value
    elif isinstance(value, (list, tuple)):
        for x in value:
            yield from walk_direct(x)


@pytest.mark.parametrize("src", _EXPRS)
def test_child_spans_nest_inside_parents(src):
    tree = raw(src)
    for node in walk(tree):
        for child in _children(node):
            assert node.span.start <= child.span.start <= child.span.end <= node.span.end, \
                (node, child)


@settings(max_examples=200)
@given(st.lists(st.sampled_from(["+", "*", "::", "=", "andalso", "&&"]), min_size=1, max_size=6))
def test_operator_spans_nest(ops):
    src = "a0" + "".join(f" {op} a{i + 1}" for i, op in enumerate(ops))
    tree = raw(src)
    for node in walk(tree):
        for child in _children(node):
            assert node.span.start <= child.span.start and child.span.end <= node.span.end
