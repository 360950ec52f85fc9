"""Executable progress and preservation checks.

A literal small-step machine over core terms (substitution-based, with a
reference store and a wrapper store), a generator of well-typed software
terms, and a driver that steps each term while re-checking its type.

Each reduction rule has a guard; a step collects every rule whose guard
holds, so rule selection being a function is checked on every step rather
than assumed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, fields
from typing import Callable

from . import syntax as S
from .errors import (DivisionByZero, EvalError, GeminiError, InternalError, MatchFailure,
                     OutOfRange, Overflow)
from .eval_sw import floor_div, floor_mod, check_int
from .types import (BIT, INT, REAL, STRING, UNIT, Array, Arrow, Bit, ListT, Ref, SRecord, Sw,
                    Type, render)

# ---------------------------------------------------------------- results


@dataclass
class NextTerm:
    term: object
    rule: str


@dataclass
class IsValue:
    pass


@dataclass
class Stuck:
    reason: str


@dataclass
class Raised:
    """A run-time error the semantics defines (division by zero, failed match...)."""
    error: GeminiError


@dataclass
class Stores:
    mu: dict = field(default_factory=dict)     # location -> value term
    omega: dict = field(default_factory=dict)  # wrapper location -> hardware value term
    mu_types: dict = field(default_factory=dict)
    omega_types: dict = field(default_factory=dict)


# ---------------------------------------------------------------- values and substitution

def is_value(t) -> bool:
    if isinstance(t, (S.IntLit, S.RealLit, S.StringLit, S.BitLit, S.Loc, S.WrapLoc, S.Lambda,
                      S.ModuleTerm)):
        return True
    if isinstance(t, (S.RecordExpr, S.HwRecordExpr)):
        return all(is_value(x) for _, x in t.fields)
    if isinstance(t, (S.ListExpr, S.ArrayExpr)):
        return all(is_value(x) for x in t.items)
    if isinstance(t, S.DataValue):
        return t.payload is None or is_value(t.payload)
    return False


def is_hw_value(t) -> bool:
    if isinstance(t, S.BitLit):
        return True
    if isinstance(t, S.ArrayExpr):
        return all(is_hw_value(x) for x in t.items)
    if isinstance(t, S.HwRecordExpr):
        return all(is_hw_value(x) for _, x in t.fields)
    return False


def pattern_vars(p) -> set:
    return {n.name for n in S.walk(p) if isinstance(n, S.PVar)}


def _rebuild(node, fn):
    """Copy ``node`` with ``fn`` applied to every child node (types reset)."""
    def go(v):
        if isinstance(v, S.Node):
            return fn(v)
        if isinstance(v, list):
            return [go(x) for x in v]
        if isinstance(v, tuple):
            return tuple(go(x) for x in v)
        return v
    kw = {f.name: go(getattr(node, f.name)) for f in fields(node)
          if f.name not in ("span", "ty", "info")}
    return type(node)(**kw, span=node.span)


def fresh(t):
    """Deep copy without any inference results attached."""
    return _rebuild(t, fresh)


def subst(t, m: dict):
    """Replace free variables by closed values."""
    if not m:
        return fresh(t)
    if isinstance(t, S.Var):
        v = m.get(t.name)
        return fresh(v) if v is not None else S.Var(t.name, span=t.span)
    if isinstance(t, S.Lambda):
        inner = _without(m, pattern_vars(t.param) | ({t.name} if t.name else set()))
        return S.Lambda(fresh(t.param), subst(t.body, inner), t.name, span=t.span)
    if isinstance(t, S.ModuleTerm):
        inner = _without(m, pattern_vars(t.param))
        return S.ModuleTerm(fresh(t.param), subst(t.body, inner),
                            fresh(t.ret_ann) if t.ret_ann else None, t.name, span=t.span)
    if isinstance(t, S.Case):
        arms = [(fresh(p), subst(e, _without(m, pattern_vars(p)))) for p, e in t.arms]
        return S.Case(subst(t.subject, m), arms, span=t.span)
    if isinstance(t, S.ArrayGen):
        return S.ArrayGen(subst(t.size, m), t.index, subst(t.body, _without(m, {t.index})),
                          span=t.span)
    if isinstance(t, S.Let):
        decs = []
        cur = m
        for d in t.decs:
            d2, cur = _subst_dec(d, cur)
            decs.append(d2)
        return S.Let(decs, subst(t.body, cur), span=t.span)
    return _rebuild(t, lambda c: subst(c, m))


def _without(m: dict, names) -> dict:
    if not names or not any(n in m for n in names):
        return m
    return {k: v for k, v in m.items() if k not in names}


def _subst_dec(d, m: dict):
    if isinstance(d, S.ValDec):
        inner = _without(m, {d.name}) if isinstance(d.expr, S.ArrayGen) else m
        out = S.ValDec(d.name, fresh(d.ann) if d.ann else None, subst(d.expr, inner), span=d.span)
        return out, _without(m, {d.name})
    if isinstance(d, S.FunDec):
        bound = {d.name}
        for p in d.params:
            bound |= pattern_vars(p)
        out = S.FunDec(d.name, [fresh(p) for p in d.params],
                       fresh(d.ret_ann) if d.ret_ann else None,
                       subst(d.body, _without(m, bound)), span=d.span)
        return out, _without(m, {d.name})
    if isinstance(d, S.ModuleDec):
        bound = pattern_vars(d.param) | ({d.size_param.name} if d.size_param else set())
        out = S.ModuleDec(d.name, fresh(d.size_param) if d.size_param else None, fresh(d.param),
                          fresh(d.ret_ann) if d.ret_ann else None,
                          subst(d.body, _without(m, bound)), span=d.span)
        return out, _without(m, {d.name})
    return fresh(d), m


def _curry(params: list, body, name: str | None):
    """``fun f p1 p2 = e`` as nested lambdas; the outermost one is recursive in ``f``."""
    inner = body
    for p in reversed(params[1:]):
        inner = S.Lambda(p, inner, None, span=body.span)
    return S.Lambda(params[0], inner, name, span=body.span)


# ---------------------------------------------------------------- pattern matching

def match(p, v, out: dict) -> bool:
    if isinstance(p, S.PWild):
        return True
    if isinstance(p, S.PVar):
        out[p.name] = v
        return True
    if isinstance(p, S.PLit):
        lit = {int: S.IntLit, float: S.RealLit, str: S.StringLit}[type(p.value)]
        return isinstance(v, lit) and v.value == p.value
    if isinstance(p, S.PRecord):
        if not isinstance(v, (S.RecordExpr, S.HwRecordExpr)):
            return False
        vals = dict(v.fields)
        return all(match(sub, vals[lab], out) for lab, sub in p.fields)
    if isinstance(p, S.PNil):
        return isinstance(v, S.ListExpr) and not v.items
    if isinstance(p, S.PCons):
        if not isinstance(v, S.ListExpr) or not v.items:
            return False
        return match(p.head, v.items[0], out) and match(p.tail, S.ListExpr(v.items[1:]), out)
    if isinstance(p, S.PCon):
        if not isinstance(v, S.DataValue) or v.ctor != p.name:
            return False
        return p.arg is None or match(p.arg, v.payload, out)
    return False


# ---------------------------------------------------------------- primitive operations

def term_equal(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, (S.IntLit, S.RealLit, S.StringLit, S.BitLit)):
        return a.value == b.value
    if isinstance(a, S.RecordExpr):
        bf = dict(b.fields)
        return all(term_equal(x, bf[lab]) for lab, x in a.fields)
    if isinstance(a, S.ListExpr):
        return len(a.items) == len(b.items) and all(map(term_equal, a.items, b.items))
    if isinstance(a, S.DataValue):
        if a.ctor != b.ctor:
            return False
        return a.payload is None or term_equal(a.payload, b.payload)
    raise EvalError(f"equality is not defined on {type(a).__name__}")


def _order(op: str, a, b) -> int:
    x, y = a.value, b.value
    return int({"<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op])


def _bits_op(op: str, a, b):
    """Bitwise gate on literal hardware values, element- and field-wise."""
    if isinstance(a, S.BitLit):
        v = {"&": a.value & b.value, "|": a.value | b.value, "^": a.value ^ b.value}[op]
        return S.BitLit(v)
    if isinstance(a, S.ArrayExpr):
        if len(a.items) != len(b.items):
            raise InternalError("array lengths differ in a bitwise operation")
        return S.ArrayExpr([_bits_op(op, x, y) for x, y in zip(a.items, b.items)])
    bf = dict(b.fields)
    return S.HwRecordExpr([(lab, _bits_op(op, x, bf[lab])) for lab, x in a.fields])


def _bits_not(a):
    if isinstance(a, S.BitLit):
        return S.BitLit(1 - a.value)
    if isinstance(a, S.ArrayExpr):
        return S.ArrayExpr([_bits_not(x) for x in a.items])
    return S.HwRecordExpr([(lab, _bits_not(x)) for lab, x in a.fields])


def _reduce(op: str, a):
    vals = [x.value for x in a.items]
    if op == "&->":
        return S.BitLit(int(all(vals)))
    if op == "|->":
        return S.BitLit(int(any(vals)))
    return S.BitLit(sum(vals) & 1)


def _shift(op: str, a, amount):
    bits = list(a.items)
    k = sum(b.value << i for i, b in enumerate(amount.items))
    n = len(bits)
    k = min(k, n)
    if op == "<<":
        out = [bits[i - k] if i - k >= 0 else S.BitLit(0) for i in range(n)]
    else:
        fill = bits[-1] if (op == ">>>" and n) else S.BitLit(0)
        out = [bits[i + k] if i + k < n else fill for i in range(n)]
    return S.ArrayExpr([S.BitLit(b.value) for b in out])


def _binop_value(op: str, a, b):
    if op in ("+", "-", "*"):
        r = {"+": a.value + b.value, "-": a.value - b.value, "*": a.value * b.value}[op]
        return S.IntLit(check_int(r))
    if op == "/":
        return S.IntLit(floor_div(a.value, b.value))
    if op == "%":
        return S.IntLit(floor_mod(a.value, b.value))
    if op in ("+.", "-.", "*.", "/."):
        if op == "/." and b.value == 0.0:
            raise DivisionByZero("real division by zero")
        r = {"+.": lambda: a.value + b.value, "-.": lambda: a.value - b.value,
             "*.": lambda: a.value * b.value, "/.": lambda: a.value / b.value}[op]()
        return S.RealLit(r)
    if op == "=":
        return S.IntLit(int(term_equal(a, b)))
    if op == "<>":
        return S.IntLit(int(not term_equal(a, b)))
    if op in ("<", ">", "<=", ">="):
        return S.IntLit(_order(op, a, b))
    if op == "::":
        return S.ListExpr([a] + list(b.items))
    if op in ("&", "|", "^"):
        return _bits_op(op, a, b)
    if op in ("<<", ">>", ">>>"):
        return _shift(op, a, b)
    raise InternalError(f"unknown operator {op}")


# ---------------------------------------------------------------- the machine

Rule = tuple[str, Callable, Callable]  # name, guard(t, st), action(t, st) -> term
RULES: dict[type, list[Rule]] = {}


def rule(node_type, name: str, guard: Callable):
    def deco(action):
        RULES.setdefault(node_type, []).append((name, guard, action))
        return action
    return deco


def _first_nonvalue(items) -> int | None:
    for i, x in enumerate(items):
        if not is_value(x):
            return i
    return None


def _step_sub(t, st: Stores):
    """Step a subterm; propagates non-step outcomes."""
    r = small_step(t, st)
    if isinstance(r, NextTerm):
        return r
    if isinstance(r, IsValue):
        return Stuck("internal: stepping a value")
    return r


class _Propagate(Exception):
    def __init__(self, result):
        self.result = result


def _sub(t, st: Stores):
    r = _step_sub(t, st)
    if not isinstance(r, NextTerm):
        raise _Propagate(r)
    return r.term


def _rebuild_with(node, **changes):
    kw = {f.name: getattr(node, f.name) for f in fields(node)
          if f.name not in ("span", "ty", "info")}
    kw.update(changes)
    return type(node)(**kw, span=node.span)


def _congruence(node_type, name, attr):
    """Rule stepping ``attr`` when it is the leftmost non-value child."""
    def guard(t, st, _attr=attr):
        order = _CHILD_ORDER[node_type]
        for a in order:
            if a == _attr:
                return not is_value(getattr(t, a))
            if not is_value(getattr(t, a)):
                return False
        return False

    def action(t, st, _attr=attr):
        return _rebuild_with(t, **{_attr: _sub(getattr(t, _attr), st)})
    RULES.setdefault(node_type, []).append((name, guard, action))


_CHILD_ORDER = {
    S.BinOp: ("left", "right"), S.UnOp: ("operand",), S.If: ("cond",), S.App: ("fn", "arg"),
    S.Proj: ("expr",), S.Index: ("expr", "index"), S.RefExpr: ("expr",), S.Deref: ("expr",),
    S.Assign: ("target", "value"), S.SwExpr: ("expr",), S.UnswExpr: ("expr",),
    S.Case: ("subject",), S.BitArrayLit: ("width", "value"), S.ArrayGen: ("size",),
    S.DataValue: ("payload",),
}
for _nt, _attrs in _CHILD_ORDER.items():
    for _a in _attrs:
        _congruence(_nt, f"{_nt.__name__.lower()}-{_a}", _a)


def _all_values(*attrs):
    return lambda t, st: all(is_value(getattr(t, a)) for a in attrs)


def _seq_guard(kind: str):
    def guard(t, st):
        items = [x for _, x in t.fields] if kind == "fields" else t.items
        return _first_nonvalue(items) is not None
    return guard


def _step_items(t, st):
    i = _first_nonvalue(t.items)
    items = list(t.items)
    items[i] = _sub(items[i], st)
    return _rebuild_with(t, items=items)


def _step_fields(t, st):
    flds = list(t.fields)
    i = _first_nonvalue([x for _, x in flds])
    lab, x = flds[i]
    flds[i] = (lab, _sub(x, st))
    return _rebuild_with(t, fields=flds)


for _nt in (S.ListExpr, S.ArrayExpr):
    RULES.setdefault(_nt, []).append((f"{_nt.__name__.lower()}-item", _seq_guard("items"),
                                      _step_items))
for _nt in (S.RecordExpr, S.HwRecordExpr):
    RULES.setdefault(_nt, []).append((f"{_nt.__name__.lower()}-field", _seq_guard("fields"),
                                      _step_fields))


@rule(S.BinOp, "binop", _all_values("left", "right"))
def _binop(t, st):
    return _binop_value(t.op, t.left, t.right)


@rule(S.UnOp, "unop", _all_values("operand"))
def _unop(t, st):
    v = t.operand
    if t.op == "~":
        if isinstance(v, S.RealLit):
            return S.RealLit(-v.value)
        return S.IntLit(check_int(-v.value))
    if t.op == "!":
        return _bits_not(v)
    return _reduce(t.op, v)


@rule(S.If, "if-true", lambda t, st: isinstance(t.cond, S.IntLit) and t.cond.value != 0)
def _if_true(t, st):
    return t.then


@rule(S.If, "if-false", lambda t, st: isinstance(t.cond, S.IntLit) and t.cond.value == 0)
def _if_false(t, st):
    return t.orelse


@rule(S.App, "app-beta",
      lambda t, st: is_value(t.fn) and is_value(t.arg) and isinstance(t.fn, S.Lambda))
def _beta(t, st):
    f = t.fn
    m: dict = {}
    if not match(f.param, t.arg, m):
        raise MatchFailure("function argument does not match its pattern")
    if f.name:
        m[f.name] = f
    return subst(f.body, m)


@rule(S.App, "app-module",
      lambda t, st: is_value(t.fn) and is_value(t.arg) and isinstance(t.fn, S.ModuleTerm))
def _module_app(t, st):
    m: dict = {}
    if not match(t.fn.param, t.arg, m):
        raise MatchFailure("module argument does not match its pattern")
    return subst(t.fn.body, m)


@rule(S.Proj, "proj", _all_values("expr"))
def _proj(t, st):
    return dict(t.expr.fields)[t.label]


@rule(S.Index, "index", _all_values("expr", "index"))
def _index(t, st):
    i = t.index.value
    if not 0 <= i < len(t.expr.items):
        raise OutOfRange(f"index {i} is out of range for an array of size {len(t.expr.items)}")
    return t.expr.items[i]


@rule(S.RefExpr, "ref-alloc", _all_values("expr"))
def _ref(t, st):
    loc = len(st.mu)
    assert loc not in st.mu
    st.mu[loc] = t.expr
    ty = t.ty
    if isinstance(ty, Ref):
        st.mu_types[loc] = ty.elem
    return S.Loc(loc, span=t.span)


@rule(S.Deref, "deref", lambda t, st: isinstance(t.expr, S.Loc))
def _deref(t, st):
    return st.mu[t.expr.index]


@rule(S.Assign, "assign", lambda t, st: isinstance(t.target, S.Loc) and is_value(t.value))
def _assign(t, st):
    st.mu[t.target.index] = t.value
    return S.RecordExpr([], span=t.span)


@rule(S.SwExpr, "sw-wrap", _all_values("expr"))
def _sw(t, st):
    w = len(st.omega)
    st.omega[w] = t.expr
    ty = t.ty
    if isinstance(ty, Sw):
        st.omega_types[w] = ty.hw
    return S.WrapLoc(w, span=t.span)


@rule(S.UnswExpr, "unsw", lambda t, st: isinstance(t.expr, S.WrapLoc))
def _unsw(t, st):
    return st.omega[t.expr.index]


@rule(S.Case, "case-match", _all_values("subject"))
def _case(t, st):
    for p, body in t.arms:
        m: dict = {}
        if match(p, t.subject, m):
            return subst(body, m)
    raise MatchFailure("no case arm matches the value")


@rule(S.Seq, "seq-step", lambda t, st: not is_value(t.exprs[0]))
def _seq_step(t, st):
    return S.Seq([_sub(t.exprs[0], st)] + list(t.exprs[1:]), span=t.span)


@rule(S.Seq, "seq-next", lambda t, st: is_value(t.exprs[0]) and len(t.exprs) > 1)
def _seq_next(t, st):
    rest = list(t.exprs[1:])
    return rest[0] if len(rest) == 1 else S.Seq(rest, span=t.span)


@rule(S.Seq, "seq-last", lambda t, st: is_value(t.exprs[0]) and len(t.exprs) == 1)
def _seq_last(t, st):
    return t.exprs[0]


def _let_first(t):
    return t.decs[0] if t.decs else None


@rule(S.Let, "let-body", lambda t, st: not t.decs)
def _let_body(t, st):
    return t.body


@rule(S.Let, "let-val-step",
      lambda t, st: isinstance(_let_first(t), S.ValDec) and not is_value(t.decs[0].expr)
      and not isinstance(t.decs[0].expr, S.ArrayGen))
def _let_val_step(t, st):
    d = t.decs[0]
    d2 = S.ValDec(d.name, d.ann, _sub(d.expr, st), span=d.span)
    return S.Let([d2] + list(t.decs[1:]), t.body, span=t.span)


@rule(S.Let, "let-val-bind",
      lambda t, st: isinstance(_let_first(t), S.ValDec) and is_value(t.decs[0].expr))
def _let_val_bind(t, st):
    d = t.decs[0]
    return subst(S.Let(list(t.decs[1:]), t.body, span=t.span), {d.name: d.expr})


@rule(S.Let, "let-fun",
      lambda t, st: isinstance(_let_first(t), S.FunDec))
def _let_fun(t, st):
    d = t.decs[0]
    lam = _curry(list(d.params), d.body, d.name)
    return subst(S.Let(list(t.decs[1:]), t.body, span=t.span), {d.name: lam})


@rule(S.Let, "let-module",
      lambda t, st: isinstance(_let_first(t), S.ModuleDec) and t.decs[0].size_param is None)
def _let_module(t, st):
    d = t.decs[0]
    mod = S.ModuleTerm(d.param, d.body, d.ret_ann, d.name, span=d.span)
    return subst(S.Let(list(t.decs[1:]), t.body, span=t.span), {d.name: mod})


@rule(S.ArrayGen, "array-gen", _all_values("size"))
def _array_gen(t, st):
    n = t.size.value
    if n < 0:
        raise EvalError(f"array size {n} is negative")
    return S.ArrayExpr([subst(t.body, {t.index: S.IntLit(i)}) for i in range(n)], span=t.span)


@rule(S.BitArrayLit, "bit-array", _all_values("width", "value"))
def _bit_array(t, st):
    from .hwops import int_to_bits
    if t.mode == "r":
        from .errors import UnsupportedFeature
        raise UnsupportedFeature("'r: bit arrays are not supported")
    node = int_to_bits(t.width.value, t.value.value, t.mode == "s")
    return S.ArrayExpr([S.BitLit(e.value) for e in node.elems], span=t.span)


def applicable_rules(t, st: Stores) -> list[str]:
    """Names of every rule whose left-hand side matches ``t``."""
    return [name for name, guard, _ in RULES.get(type(t), ()) if guard(t, st)]


def small_step(t, st: Stores):
    """Apply exactly one reduction rule to ``t``."""
    if is_value(t):
        return IsValue()
    candidates = [(name, act) for name, guard, act in RULES.get(type(t), ()) if guard(t, st)]
    if not candidates:
        return Stuck(f"no rule applies to {type(t).__name__}")
    if len(candidates) > 1:
        raise InternalError(f"rules overlap on {type(t).__name__}: "
                            f"{', '.join(n for n, _ in candidates)}")
    name, act = candidates[0]
    try:
        return NextTerm(act(t, st), name)
    except _Propagate as p:
        return p.result
    except (EvalError, GeminiError) as exc:
        return Raised(exc)
    except (KeyError, AttributeError, TypeError, IndexError) as exc:
        return Stuck(f"{name}: {type(exc).__name__}: {exc}")


# ---------------------------------------------------------------- typing intermediate terms

def type_of(t, st: Stores):
    """Infer the type of a closed runtime term under the current store typing.

    Returns (typed copy, type) or (None, diagnostics) when ill-typed.
    """
    from .infer import infer_program
    copy = fresh(t)
    res = infer_program(copy, require_module=False, store_typing=dict(st.mu_types),
                        wrap_typing=dict(st.omega_types))
    if res.errors:
        return None, res.errors
    return copy, res.type


def type_accepts(expected: Type, found: Type) -> bool:
    """Whether ``found`` (possibly more general) can take the type ``expected``."""
    from .infer import unify
    from .types import SubstEnv
    try:
        unify(expected, found, SubstEnv())
        return True
    except GeminiError:
        return False


# ---------------------------------------------------------------- the safety check

@dataclass
class SafetyReport:
    steps: int
    outcome: str  # "value" | "raised" | "stuck" | "fuel"
    final: object
    stores: Stores
    stuck_reason: str | None = None
    violations: list = field(default_factory=list)  # (step, message)
    error: GeminiError | None = None
    rules: list = field(default_factory=list)


def check_safety(t, expected: Type, fuel: int = 100_000, trace_rules: bool = False) -> SafetyReport:
    st = Stores()
    typed, ty = type_of(t, st)
    if typed is None:
        return SafetyReport(0, "stuck", t, st, "the initial term is ill-typed",
                            [(0, str(ty[0].message))])
    violations = []
    if not type_accepts(expected, ty):
        violations.append((0, f"initial type {render(ty)} is not {render(expected)}"))
    cur = typed
    rules = []
    for step in range(1, fuel + 1):
        r = small_step(cur, st)
        if isinstance(r, IsValue):
            return SafetyReport(step - 1, "value", cur, st, None, violations, rules=rules)
        if isinstance(r, Stuck):
            return SafetyReport(step - 1, "stuck", cur, st, r.reason, violations, rules=rules)
        if isinstance(r, Raised):
            return SafetyReport(step - 1, "raised", cur, st, None, violations, r.error, rules)
        if trace_rules:
            rules.append(r.rule)
        typed, ty = type_of(r.term, st)
        if typed is None:
            violations.append((step, f"after {r.rule}: {ty[0].message}"))
            cur = r.term
            continue
        if not type_accepts(expected, ty):
            violations.append((step, f"after {r.rule}: type {render(ty)} is not {render(expected)}"))
        cur = typed
    return SafetyReport(fuel, "fuel", cur, st, None, violations, rules=rules)


def run_small_step(t, fuel: int = 100_000):
    """Reduce without type checks; returns (outcome, final term, stores)."""
    st = Stores()
    cur = t
    for _ in range(fuel):
        r = small_step(cur, st)
        if isinstance(r, IsValue):
            return "value", cur, st
        if isinstance(r, Stuck):
            return "stuck", cur, st
        if isinstance(r, Raised):
            return "raised", r.error, st
        cur = r.term
    return "fuel", cur, st


# ---------------------------------------------------------------- comparing with big-step

def normalize_term(v, st: Stores):
    if isinstance(v, S.IntLit):
        return ("int", v.value)
    if isinstance(v, S.RealLit):
        return ("real", repr(v.value))
    if isinstance(v, S.StringLit):
        return ("string", v.value)
    if isinstance(v, S.BitLit):
        return ("bit", v.value)
    if isinstance(v, S.RecordExpr):
        return ("record", tuple((lab, normalize_term(x, st)) for lab, x in v.fields))
    if isinstance(v, S.HwRecordExpr):
        return ("hrecord", tuple((lab, normalize_term(x, st)) for lab, x in v.fields))
    if isinstance(v, S.ListExpr):
        return ("list", tuple(normalize_term(x, st) for x in v.items))
    if isinstance(v, S.ArrayExpr):
        return ("array", tuple(normalize_term(x, st) for x in v.items))
    if isinstance(v, S.Loc):
        return ("ref", normalize_term(st.mu[v.index], st))
    if isinstance(v, S.WrapLoc):
        return ("sw", normalize_term(st.omega[v.index], st))
    if isinstance(v, (S.Lambda, S.ModuleTerm)):
        return ("fn",)
    if isinstance(v, S.DataValue):
        return ("data", v.ctor, None if v.payload is None else normalize_term(v.payload, st))
    raise InternalError(f"not a value: {v!r}")


def normalize_value(v, store):
    from .netlist import ArrayNode, Const, RecordNode
    from .values import (NIL, Builtin, Closure, Cons, CtorVal, DatatypeVal, ModuleVal,
                         RecordVal, RefVal, SWVal)
    if isinstance(v, bool):
        return ("int", int(v))
    if isinstance(v, int):
        return ("int", v)
    if isinstance(v, float):
        return ("real", repr(v))
    if isinstance(v, str):
        return ("string", v)
    if isinstance(v, Const):
        return ("bit", v.value)
    if isinstance(v, RecordVal):
        return ("record", tuple((lab, normalize_value(x, store)) for lab, x in v.fields))
    if isinstance(v, RecordNode):
        return ("hrecord", tuple((lab, normalize_value(x, store)) for lab, x in v.fields))
    if v is NIL or isinstance(v, Cons):
        return ("list", tuple(normalize_value(x, store) for x in v))
    if isinstance(v, ArrayNode):
        return ("array", tuple(normalize_value(x, store) for x in v.elems))
    if isinstance(v, RefVal):
        return ("ref", normalize_value(store.read(v), store))
    if isinstance(v, SWVal):
        return ("sw", normalize_value(v.hw, store))
    if isinstance(v, (Closure, Builtin, CtorVal, ModuleVal)):
        return ("fn",)
    if isinstance(v, DatatypeVal):
        return ("data", v.ctor, None if v.payload is None else normalize_value(v.payload, store))
    raise InternalError(f"cannot normalize {v!r}")


def big_step(t):
    """Evaluate with the production evaluator; returns ("value", norm) or ("raised", class)."""
    from .eval_sw import Evaluator
    from .infer import infer_program
    copy = fresh(t)
    res = infer_program(copy, require_module=False)
    if res.errors:
        raise InternalError(f"big-step on an ill-typed term: {res.errors[0].message}")
    ev = Evaluator()
    try:
        v = ev.evaluate(copy)
    except GeminiError as exc:
        return ("raised", type(exc).__name__)
    return ("value", normalize_value(v, ev.store))


# ---------------------------------------------------------------- term generation

_LEAF_TYPES = [INT, INT, INT, REAL, STRING, UNIT, Sw(BIT)]


class Generator:
    """Type-directed random generation of closed, well-typed software terms."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.names = 0

    def fresh_name(self, prefix: str = "x") -> str:
        self.names += 1
        return f"{prefix}{self.names}"

    def pick_type(self, depth: int) -> Type:
        r = self.rng
        if depth <= 1:
            return r.choice(_LEAF_TYPES)
        c = r.random()
        if c < 0.45:
            return r.choice(_LEAF_TYPES)
        if c < 0.6:
            return ListT(self.pick_type(depth - 1))
        if c < 0.72:
            n = r.randint(2, 3)
            return SRecord(tuple((str(i + 1), self.pick_type(depth - 1)) for i in range(n)))
        if c < 0.82:
            return Ref(self.pick_type(depth - 1))
        if c < 0.92:
            return Arrow(r.choice([INT, STRING]), self.pick_type(depth - 1))
        return Sw(Array(BIT, r.randint(1, 3)))

    # literals -------------------------------------------------------------
    def literal(self, t: Type, env: list):
        r = self.rng
        if t == INT:
            return S.IntLit(r.randint(-20, 20))
        if t == REAL:
            return S.RealLit(r.choice([0.0, 0.5, 1.25, 2.0, -3.5, 10.0]))
        if t == STRING:
            return S.StringLit(r.choice(["", "a", "bc", "hello"]))
        if t == UNIT:
            return S.RecordExpr([])
        if isinstance(t, ListT):
            return S.ListExpr([self.literal(t.elem, env) for _ in range(r.randint(0, 2))])
        if isinstance(t, SRecord):
            return S.RecordExpr([(lab, self.literal(ft, env)) for lab, ft in t.fields])
        if isinstance(t, Ref):
            return S.RefExpr(self.literal(t.elem, env))
        if isinstance(t, Sw):
            return S.SwExpr(self.hw_literal(t.hw))
        if isinstance(t, Arrow):
            x = self.fresh_name()
            f = self.fresh_name("f")
            body = self.gen(t.result, 1, env + [(x, t.arg)])
            return self._fun(f, x, t.arg, body)
        raise InternalError(f"no literal for {render(t)}")

    def hw_literal(self, h: Type):
        if isinstance(h, Bit):
            return S.BitLit(self.rng.randint(0, 1))
        return S.ArrayExpr([self.hw_literal(h.elem) for _ in range(h.size)])

    def _fun(self, f: str, x: str, arg_t: Type, body):
        ann = _type_ann(arg_t)
        return S.Let([S.FunDec(f, [S.PVar(x, ann)], None, body)], S.Var(f))

    # general generation ---------------------------------------------------
    def gen(self, t: Type, depth: int, env: list):
        r = self.rng
        vars_ = [n for n, vt in env if vt == t]
        if depth <= 1:
            if vars_ and r.random() < 0.5:
                return S.Var(r.choice(vars_))
            return self.literal(t, env)
        options = [self.literal, self.gen_if, self.gen_let, self.gen_app, self.gen_proj,
                   self.gen_case]
        if vars_:
            options.append(lambda t, env, d=None: S.Var(r.choice(vars_)))
        if t == INT:
            options += [self.gen_arith, self.gen_arith, self.gen_compare, self.gen_list_case]
        if t == REAL:
            options.append(self.gen_real)
        if isinstance(t, ListT):
            options.append(self.gen_cons)
        if isinstance(t, SRecord):
            options.append(self.gen_record)
        if t == UNIT:
            options.append(self.gen_assign)
        if isinstance(t, Sw):
            options += [self.gen_hw, self.gen_hw]
        if isinstance(t, Ref):
            options.append(self.gen_ref)
        choice = r.choice(options)
        if choice == self.literal:
            return self.literal(t, env)
        return choice(t, env, depth)

    def sub(self, t, env, depth):
        return self.gen(t, depth - 1 - (self.rng.random() < 0.3), env)

    def gen_if(self, t, env, depth):
        return S.If(self.sub(INT, env, depth), self.sub(t, env, depth), self.sub(t, env, depth))

    def gen_let(self, t, env, depth):
        st = self.pick_type(depth - 1)
        x = self.fresh_name()
        rhs = self.sub(st, env, depth)
        return S.Let([S.ValDec(x, None, rhs)], self.sub(t, env + [(x, st)], depth))

    def gen_app(self, t, env, depth):
        at = self.rng.choice([INT, STRING, INT])
        f = self.fresh_name("f")
        x = self.fresh_name()
        body = self.sub(t, env + [(x, at)], depth)
        fn = self._fun(f, x, at, body)
        return S.App(fn, self.sub(at, env, depth))

    def gen_proj(self, t, env, depth):
        other = self.pick_type(1)
        if self.rng.random() < 0.5:
            rec = S.RecordExpr([("1", self.sub(t, env, depth)), ("2", self.sub(other, env, depth))])
            return S.Proj("1", rec)
        rec = S.RecordExpr([("1", self.sub(other, env, depth)), ("2", self.sub(t, env, depth))])
        return S.Proj("2", rec)

    def gen_case(self, t, env, depth):
        k = self.rng.randint(0, 2)
        arms = [(S.PLit(i), self.sub(t, env, depth)) for i in range(k)]
        x = self.fresh_name()
        arms.append((S.PVar(x), self.sub(t, env + [(x, INT)], depth)))
        return S.Case(self.sub(INT, env, depth), arms)

    def gen_list_case(self, t, env, depth):
        et = self.pick_type(1)
        h, tl = self.fresh_name(), self.fresh_name()
        arms = [(S.PNil(), self.sub(t, env, depth)),
                (S.PCons(S.PVar(h), S.PVar(tl)),
                 self.sub(t, env + [(h, et), (tl, ListT(et))], depth))]
        return S.Case(self.sub(ListT(et), env, depth), arms)

    def gen_arith(self, t, env, depth):
        op = self.rng.choice(["+", "-", "*", "/", "%", "+", "-"])
        e = S.BinOp(op, self.sub(INT, env, depth), self.sub(INT, env, depth))
        return S.UnOp("~", e) if self.rng.random() < 0.1 else e

    def gen_compare(self, t, env, depth):
        ct = self.rng.choice([INT, REAL, STRING])
        op = self.rng.choice(["=", "<>", "<", ">", "<=", ">="])
        return S.BinOp(op, self.sub(ct, env, depth), self.sub(ct, env, depth))

    def gen_real(self, t, env, depth):
        op = self.rng.choice(["+.", "-.", "*.", "/."])
        return S.BinOp(op, self.sub(REAL, env, depth), self.sub(REAL, env, depth))

    def gen_cons(self, t, env, depth):
        return S.BinOp("::", self.sub(t.elem, env, depth), self.sub(t, env, depth))

    def gen_record(self, t, env, depth):
        return S.RecordExpr([(lab, self.sub(ft, env, depth)) for lab, ft in t.fields])

    def gen_ref(self, t, env, depth):
        return S.RefExpr(self.sub(t.elem, env, depth))

    def gen_assign(self, t, env, depth):
        vt = self.pick_type(1)
        if self.rng.random() < 0.5:
            return S.Assign(S.RefExpr(self.sub(vt, env, depth)), self.sub(vt, env, depth))
        # let val r = ref e in (r := e'; $r; ()) end
        r = self.fresh_name("r")
        body = S.Seq([S.Assign(S.Var(r), self.sub(vt, env, depth)), S.Deref(S.Var(r)),
                      S.RecordExpr([])])
        return S.Let([S.ValDec(r, None, S.RefExpr(self.sub(vt, env, depth)))], body)

    def gen_hw(self, t, env, depth):
        h = t.hw
        r = self.rng
        w = lambda: S.UnswExpr(self.sub(t, env, depth))  # noqa: E731
        c = r.random()
        if c < 0.3:
            return S.SwExpr(S.UnOp("!", w()))
        if c < 0.7:
            return S.SwExpr(S.BinOp(r.choice(["&", "|", "^"]), w(), w()))
        if isinstance(h, Bit):
            at = Sw(Array(BIT, r.randint(1, 3)))
            return S.SwExpr(S.UnOp(r.choice(["&->", "|->", "^->"]),
                                   S.UnswExpr(self.sub(at, env, depth))))
        if c < 0.85:
            amount = Sw(Array(BIT, 2))
            return S.SwExpr(S.BinOp(r.choice(["<<", ">>", ">>>"]), w(),
                                    S.UnswExpr(self.sub(amount, env, depth))))
        bits = [S.UnswExpr(self.sub(Sw(BIT), env, depth)) for _ in range(h.size)]
        if r.random() < 0.5:
            return S.SwExpr(S.ArrayExpr(bits))
        i = r.randrange(h.size)
        return S.SwExpr(S.ArrayGen(S.IntLit(h.size), "i", S.If(
            S.BinOp("=", S.Var("i"), S.IntLit(i)), bits[0],
            S.Index(S.UnswExpr(self.sub(t, env, depth)), S.Var("i")))))


def _type_ann(t: Type):
    if t == INT:
        return S.TyName("int")
    if t == STRING:
        return S.TyName("string")
    if t == REAL:
        return S.TyName("real")
    raise InternalError(f"no annotation for {render(t)}")


def gen_well_typed(seed: int, depth: int):
    """A closed well-typed term and its type."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    g = Generator(seed)
    if depth == 1:
        t = g.rng.choice([INT, REAL, STRING])
        return g.literal(t, []), t
    t = g.pick_type(min(depth, 3))
    return g.gen(t, depth, []), t


# ---------------------------------------------------------------- corpus driver

@dataclass
class CorpusSummary:
    terms: int = 0
    rejected: int = 0
    values: int = 0
    raised: int = 0
    stuck: int = 0
    fuel: int = 0
    preservation_violations: int = 0
    disagreements: int = 0
    steps: int = 0
    failures: list = field(default_factory=list)

    def merge(self, other: "CorpusSummary") -> None:
        for f in ("terms", "rejected", "values", "raised", "stuck", "fuel",
                  "preservation_violations", "disagreements", "steps"):
            setattr(self, f, getattr(self, f) + getattr(other, f))
        self.failures += other.failures

    def table(self) -> str:
        rows = [("terms", self.terms), ("rejected by inference", self.rejected),
                ("reached a value", self.values), ("raised a run-time error", self.raised),
                ("stuck", self.stuck), ("fuel exhausted", self.fuel),
                ("preservation violations", self.preservation_violations),
                ("big-step/small-step disagreements", self.disagreements),
                ("total steps", self.steps)]
        w = max(len(a) for a, _ in rows)
        return "\n".join(f"{a.ljust(w)}  {b}" for a, b in rows) + "\n"


def check_seed(seed: int, depth: int, fuel: int = 100_000) -> CorpusSummary:
    out = CorpusSummary(terms=1)
    term, ty = gen_well_typed(seed, depth)
    rep = check_safety(term, ty, fuel)
    out.steps = rep.steps
    if rep.outcome == "stuck" and rep.stuck_reason == "the initial term is ill-typed":
        out.rejected = 1
        out.failures.append((seed, "rejected", rep.violations))
        return out
    setattr(out, {"value": "values", "raised": "raised", "stuck": "stuck",
                  "fuel": "fuel"}[rep.outcome], 1)
    if rep.outcome == "stuck":
        out.failures.append((seed, "stuck", rep.stuck_reason))
    if rep.violations:
        out.preservation_violations = len(rep.violations)
        out.failures.append((seed, "preservation", rep.violations[:3]))
    if rep.outcome in ("value", "raised"):
        big = big_step(term)
        if rep.outcome == "value":
            small = ("value", normalize_term(rep.final, rep.stores))
        else:
            small = ("raised", type(rep.error).__name__)
        if big != small:
            out.disagreements = 1
            out.failures.append((seed, "disagree", (big, small)))
    return out


def run_corpus(seeds, depth: int = 6, fuel: int = 100_000, workers: int = 1) -> CorpusSummary:
    seeds = list(seeds)
    total = CorpusSummary()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            for part in pool.map(_check_chunk, [(seeds[i::workers], depth, fuel)
                                                for i in range(workers)]):
                total.merge(part)
        return total
    for s in seeds:
        total.merge(check_seed(s, depth, fuel))
    return total


def _check_chunk(args) -> CorpusSummary:
    seeds, depth, fuel = args
    total = CorpusSummary()
    for s in seeds:
        total.merge(check_seed(s, depth, fuel))
    return total

