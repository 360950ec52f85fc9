"""Staging: evaluate every software term at compile time, leaving a hardware graph.

The evaluator is environment-based and big-step.  Call-by-value,
left-to-right.  Hardware operators build netlist nodes; gates whose inputs
are all literals are folded.
"""

from __future__ import annotations

import sys
from typing import Any

from . import syntax as S
from .errors import (DivisionByZero, EvalError, GeminiError, InternalError, MatchFailure,
                     NonConcreteModule, NonModuleProgram, OutOfRange, Overflow, TypeMismatch,
                     UnsupportedFeature)
from .hwops import bit_gate, hw_binop, hw_not, int_to_bits, reduce_bits, shift
from .lexer import INT_MAX, INT_MIN
from .netlist import (ONE, ZERO, ArrayNode, Field, HwNode, Netlist, Pin, RecordNode, Slice,
                      fields_of)
from .types import (BIT, Array, Bit, HRecord, Meta, SizeVar, Temporal, Type, render, temporal)
from .values import (NIL, UNIT_VAL, Builtin, BuiltinModule, Closure, Cons, CtorVal, DatatypeVal,
                     ModuleVal, PreParamModuleVal, RecordVal, RefVal, Store, SWVal, values_equal)


class Env:
    """Chained value environment."""
    __slots__ = ("vars", "parent")

    def __init__(self, parent: Env | None = None, vars: dict | None = None):
        self.vars = vars if vars is not None else {}
        self.parent = parent

    def lookup(self, name: str):
        e = self
        while e is not None:
            if name in e.vars:
                return e.vars[name]
            e = e.parent
        raise EvalError(f"unbound identifier '{name}' at run time")


class PartialArray:
    """An array generator under construction; earlier elements may be read."""

    def __init__(self, name: str, size: int):
        self.name = name
        self.size = size
        self.elems: list = []


def check_int(v: int, span=None) -> int:
    if not INT_MIN <= v <= INT_MAX:
        raise Overflow(f"integer result {v} is outside the 32-bit range", span)
    return v


def floor_div(a: int, b: int, span=None) -> int:
    if b == 0:
        raise DivisionByZero("division by zero", span)
    return check_int(a // b, span)


def floor_mod(a: int, b: int, span=None) -> int:
    if b == 0:
        raise DivisionByZero("modulo by zero", span)
    return a % b


def int_binop(op: str, a: int, b: int, span=None) -> int:
    if op == "+":
        return check_int(a + b, span)
    if op == "-":
        return check_int(a - b, span)
    if op == "*":
        return check_int(a * b, span)
    if op == "/":
        return floor_div(a, b, span)
    if op == "%":
        return floor_mod(a, b, span)
    raise InternalError(op)


def real_binop(op: str, a: float, b: float, span=None) -> float:
    if op == "+.":
        return a + b
    if op == "-.":
        return a - b
    if op == "*.":
        return a * b
    if op == "/.":
        if b == 0.0:
            raise DivisionByZero("real division by zero", span)
        return a / b
    raise InternalError(op)


def compare(op: str, a, b) -> int:
    if op == "=":
        return int(values_equal(a, b))
    if op == "<>":
        return int(not values_equal(a, b))
    if op == "<":
        return int(a < b)
    if op == ">":
        return int(a > b)
    if op == "<=":
        return int(a <= b)
    if op == ">=":
        return int(a >= b)
    raise InternalError(op)


def types_match(static: Type, concrete: Type) -> bool:
    """Whether a concrete hardware type fits a statically inferred one.

    Metas and dynamic sizes in ``static`` match anything.
    """
    if isinstance(static, Meta):
        return True
    if isinstance(static, Bit):
        return isinstance(concrete, Bit)
    if isinstance(static, Array):
        if not isinstance(concrete, Array):
            return False
        if isinstance(static.size, int) and static.size != concrete.size:
            return False
        return types_match(static.elem, concrete.elem)
    if isinstance(static, Temporal):
        if not isinstance(concrete, Temporal):
            return False
        if isinstance(static.time, int) and static.time != concrete.time:
            return False
        return types_match(static.elem, concrete.elem)
    if isinstance(static, HRecord):
        if not isinstance(concrete, HRecord):
            return False
        cf = dict(concrete.fields)
        if set(cf) != {lab for lab, _ in static.fields}:
            return False
        return all(types_match(t, cf[lab]) for lab, t in static.fields)
    return static == concrete


def is_concrete(t: Type) -> bool:
    if isinstance(t, (Meta, SizeVar)):
        return False
    if isinstance(t, Array):
        return isinstance(t.size, int) and is_concrete(t.elem)
    if isinstance(t, Temporal):
        return isinstance(t.time, int) and is_concrete(t.elem)
    if isinstance(t, HRecord):
        return all(is_concrete(x) for _, x in t.fields)
    return isinstance(t, Bit)


class Evaluator:
    def __init__(self, out=None, base_dir: str | None = None, recursion_limit: int = 20000):
        from .stdlib import value_env
        self.store = Store()
        self.out = out if out is not None else sys.stdout
        self.base_dir = base_dir
        self.globals = Env(None, value_env())
        self.recursion_limit = recursion_limit

    # entry points ----------------------------------------------------------
    def evaluate(self, tree, env: Env | None = None):
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, self.recursion_limit))
        try:
            return self.eval(tree, env or Env(self.globals))
        except RecursionError:
            raise EvalError("evaluation recursed too deeply", tree.span) from None
        finally:
            sys.setrecursionlimit(old)

    # expressions -----------------------------------------------------------
    def eval(self, e, env: Env):
        method = getattr(self, "eval_" + type(e).__name__, None)
        if method is None:
            raise InternalError(f"no evaluation rule for {type(e).__name__}")
        try:
            return method(e, env)
        except GeminiError as exc:
            if exc.span is None:
                exc.span = e.span
            raise

    def eval_IntLit(self, e, env):
        return e.value

    def eval_RealLit(self, e, env):
        return e.value

    def eval_StringLit(self, e, env):
        return e.value

    def eval_BitLit(self, e, env):
        return ONE if e.value else ZERO

    def eval_Var(self, e, env):
        v = env.lookup(e.name)
        if isinstance(v, PartialArray):
            raise EvalError(f"'{e.name}' can only be indexed while it is being generated", e.span)
        return v

    def eval_RecordExpr(self, e, env):
        return RecordVal(tuple((lab, self.eval(x, env)) for lab, x in e.fields))

    def eval_HwRecordExpr(self, e, env):
        return RecordNode(tuple((lab, self.hw(self.eval(x, env), x)) for lab, x in e.fields))

    def eval_ListExpr(self, e, env):
        items = [self.eval(x, env) for x in e.items]
        out = NIL
        for v in reversed(items):
            out = Cons(v, out)
        return out

    def eval_ArrayExpr(self, e, env):
        return ArrayNode(tuple(self.hw(self.eval(x, env), x) for x in e.items))

    def eval_ArrayGen(self, e, env, partial: PartialArray | None = None):
        n = self.eval(e.size, env)
        if n < 0:
            raise OutOfRange(f"array size {n} is negative", e.size.span)
        elems = partial.elems if partial is not None else []
        for i in range(n):
            inner = Env(env, {e.index: i})
            elems.append(self.hw(self.eval(e.body, inner), e.body))
        return ArrayNode(tuple(elems))

    def eval_BitArrayLit(self, e, env):
        width = self.eval(e.width, env)
        value = self.eval(e.value, env)
        if e.mode == "r":
            raise UnsupportedFeature("'r: bit arrays are not supported", e.span)
        return int_to_bits(width, value, signed=(e.mode == "s"))

    def eval_Proj(self, e, env):
        v = self.eval(e.expr, env)
        if isinstance(v, RecordVal):
            return v.get(e.label)
        if isinstance(v, RecordNode):
            return v.field(e.label)
        if isinstance(v, HwNode) and isinstance(v.type, HRecord):
            return Field(v, e.label)
        raise InternalError(f"projection #{e.label} on {v!r}")

    def eval_Index(self, e, env):
        if isinstance(e.expr, S.Var):
            target = env.lookup(e.expr.name)
            if isinstance(target, PartialArray):
                i = self.eval(e.index, env)
                if not 0 <= i < len(target.elems):
                    raise OutOfRange(f"element {i} of '{target.name}' is read before it is "
                                     f"generated", e.index.span)
                return target.elems[i]
        arr = self.hw(self.eval(e.expr, env), e.expr)
        i = self.eval(e.index, env)
        size = arr.type.size if isinstance(arr.type, Array) else None
        if size is None:
            raise InternalError("indexing a non-array")
        if not 0 <= i < size:
            raise OutOfRange(f"index {i} is out of range for an array of size {size}", e.index.span)
        if isinstance(arr, ArrayNode):
            return arr.elems[i]
        return Slice(arr, i)

    def eval_Deref(self, e, env):
        return self.store.read(self.eval(e.expr, env))

    def eval_RefExpr(self, e, env):
        return self.store.alloc(self.eval(e.expr, env))

    def eval_Assign(self, e, env):
        r = self.eval(e.target, env)
        v = self.eval(e.value, env)
        self.store.write(r, v)
        return UNIT_VAL

    def eval_SwExpr(self, e, env):
        return SWVal(self.eval(e.expr, env))

    def eval_UnswExpr(self, e, env):
        return self.eval(e.expr, env).hw

    def eval_UnOp(self, e, env):
        v = self.eval(e.operand, env)
        if e.op == "~":
            if isinstance(v, float):
                return -v
            return check_int(-v, e.span)
        if e.op == "!":
            return hw_not(v)
        return reduce_bits(e.op, v)

    def eval_BinOp(self, e, env):
        op = e.op
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        if op in ("+", "-", "*", "/", "%"):
            return int_binop(op, a, b, e.span)
        if op in ("+.", "-.", "*.", "/."):
            return real_binop(op, a, b, e.span)
        if op in ("&", "|", "^"):
            return hw_binop(op, a, b)
        if op in ("<<", ">>", ">>>"):
            return shift(op, a, b)
        if op == "::":
            return Cons(a, b)
        return compare(op, a, b)

    def eval_If(self, e, env):
        if self.eval(e.cond, env) != 0:
            return self.eval(e.then, env)
        return self.eval(e.orelse, env)

    def eval_Case(self, e, env):
        v = self.eval(e.subject, env)
        for p, body in e.arms:
            binds: dict = {}
            if self.match(p, v, binds):
                return self.eval(body, Env(env, binds))
        raise MatchFailure("no case arm matches the value", e.span)

    def eval_Let(self, e, env):
        inner = Env(env)
        for d in e.decs:
            self.dec(d, inner)
        return self.eval(e.body, inner)

    def eval_Seq(self, e, env):
        v: Any = UNIT_VAL
        for x in e.exprs:
            v = self.eval(x, env)
        return v

    def eval_App(self, e, env):
        f = self.eval(e.fn, env)
        a = self.eval(e.arg, env)
        return self.apply(f, a, e.span)

    def eval_Paramize(self, e, env):
        m = self.eval(e.module, env)
        n = self.eval(e.size, env)
        if not isinstance(m, PreParamModuleVal):
            raise InternalError("size parameter applied to a plain module")
        base = m.module
        return ModuleVal(base.name, base.param, base.body, base.env, base.ret_ann,
                         base.size_param, n)

    # runtime forms shared with the small-step machine
    def eval_Lambda(self, e, env):
        return Closure([e.param], e.body, env, e.name)

    def eval_ModuleTerm(self, e, env):
        return ModuleVal(e.name or "module", e.param, e.body, env, e.ret_ann)

    def eval_HwGate(self, e, env):
        return bit_gate(e.op, [self.eval(x, env) for x in e.inputs])

    def eval_HwNot(self, e, env):
        return hw_not(self.eval(e.operand, env))

    def eval_DataValue(self, e, env):
        ctor = env.lookup(e.ctor)
        if e.payload is None:
            return ctor
        return DatatypeVal(ctor.ctor, ctor.tag, self.eval(e.payload, env))

    # application --------------------------------------------------------------
    def apply(self, f, a, span=None):
        if isinstance(f, Closure):
            bound = f.bound + (a,)
            if len(bound) < len(f.params):
                return Closure(f.params, f.body, f.env, f.name, bound)
            binds: dict = {}
            if f.name is not None:
                binds[f.name] = Closure(f.params, f.body, f.env, f.name)
            for p, v in zip(f.params, bound):
                if not self.match(p, v, binds):
                    raise MatchFailure("function argument does not match its pattern", span)
            return self.eval(f.body, Env(f.env, binds))
        if isinstance(f, Builtin):
            args = f.args + (a,)
            if len(args) < f.arity:
                return Builtin(f.name, f.arity, f.fn, args)
            try:
                return f.fn(self, *args)
            except GeminiError as exc:
                exc.span = exc.span or span
                raise
        if isinstance(f, CtorVal):
            return DatatypeVal(f.ctor, f.tag, a)
        if isinstance(f, ModuleVal):
            return self.apply_module(f, a, span)
        if isinstance(f, BuiltinModule):
            return f.fn(self.hw(a))
        raise InternalError(f"cannot apply {type(f).__name__}")

    def module_env(self, m: ModuleVal) -> Env:
        if m.size_param is None:
            return Env(m.env)
        return Env(m.env, {m.size_param.name: m.size})

    def staged_type(self, ann, static: Type, env: Env) -> Type:
        """An annotation's type with its size expressions evaluated now."""
        if ann is None:
            return static
        return self.eval_annotation(ann, env)

    def eval_annotation(self, a, env: Env) -> Type:
        if isinstance(a, S.TyName):
            if a.name == "bit":
                return BIT
            return Meta(0)
        if isinstance(a, S.TyArray):
            n = self.eval(a.size, env)
            if n < 0:
                raise EvalError(f"array size {n} is negative", a.size.span)
            return Array(self.eval_annotation(a.elem, env), n)
        if isinstance(a, S.TyTemporal):
            n = self.eval(a.time, env)
            if n < 0:
                raise EvalError(f"delay time {n} is negative", a.time.span)
            return temporal(self.eval_annotation(a.elem, env), n)
        if isinstance(a, S.TyRecord):
            return HRecord(tuple((lab, self.eval_annotation(t, env)) for lab, t in a.fields))
        return Meta(0)

    def param_types(self, p, env: Env) -> Type:
        """Expected hardware type of a module parameter pattern."""
        if isinstance(p, S.PVar):
            static = p.ty if isinstance(p.ty, Type) else Meta(0)
            return self.staged_type(p.ann, static, env)
        if isinstance(p, S.PRecord):
            return HRecord(tuple((lab, self.param_types(sub, env)) for lab, sub in p.fields))
        return Meta(0)

    def check_hw_type(self, expected: Type, value: HwNode, what: str, span) -> None:
        if not types_match(expected, value.type):
            detail = _size_detail(expected, value.type)
            msg = f"{what}: expected {render(expected)}, found {render(value.type)}"
            raise TypeMismatch(f"{detail}: {msg}" if detail else msg, span,
                               types=(render(expected), render(value.type)))

    def apply_module(self, m: ModuleVal, a, span=None):
        a = self.hw(a)
        env = self.module_env(m)
        self.check_hw_type(self.param_types(m.param, env), a, f"argument of module {m.name}", span)
        binds: dict = {}
        if not self.match(m.param, a, binds):
            raise MatchFailure(f"argument of module {m.name} does not match its pattern", span)
        out = self.hw(self.eval(m.body, Env(env, binds)))
        if m.ret_ann is not None:
            self.check_hw_type(self.eval_annotation(m.ret_ann, env), out,
                               f"result of module {m.name}", span)
        return out

    def hw(self, v, where=None) -> HwNode:
        if isinstance(v, HwNode):
            return v
        if isinstance(v, DatatypeVal):
            raise UnsupportedFeature("hardware datatype values have no circuit encoding",
                                     getattr(where, "span", None))
        raise InternalError(f"expected a hardware value, got {type(v).__name__}")

    # patterns ----------------------------------------------------------------
    def match(self, p, v, binds: dict) -> bool:
        if isinstance(p, S.PWild):
            return True
        if isinstance(p, S.PVar):
            info = getattr(p, "ctor", None)
            if info is not None:
                return isinstance(v, DatatypeVal) and v.tag == info.tag and v.ctor == info.name
            binds[p.name] = v
            return True
        if isinstance(p, S.PLit):
            return type(v) is type(p.value) and v == p.value
        if isinstance(p, S.PCon):
            info = getattr(p, "ctor", None)
            if not isinstance(v, DatatypeVal) or v.ctor != p.name:
                return False
            if info is not None and v.tag != info.tag:
                return False
            if p.arg is None:
                return True
            return self.match(p.arg, v.payload, binds)
        if isinstance(p, S.PRecord):
            if isinstance(v, RecordVal):
                vals = dict(v.fields)
            elif isinstance(v, HwNode):
                vals = dict(fields_of(v))
            else:
                return False
            return all(self.match(sub, vals[lab], binds) for lab, sub in p.fields)
        if isinstance(p, S.PNil):
            return v is NIL
        if isinstance(p, S.PCons):
            return (isinstance(v, Cons) and self.match(p.head, v.head, binds)
                    and self.match(p.tail, v.tail, binds))
        raise InternalError(f"not a pattern: {p!r}")

    # declarations -------------------------------------------------------------
    def dec(self, d, env: Env) -> None:
        if isinstance(d, S.ValDec):
            if isinstance(d.expr, S.ArrayGen):
                partial = PartialArray(d.name, 0)
                inner = Env(env, {d.name: partial})
                try:
                    v = self.eval_ArrayGen(d.expr, inner, partial)
                except GeminiError as exc:
                    exc.span = exc.span or d.expr.span
                    raise
                d.expr.ty = d.expr.ty
            else:
                v = self.eval(d.expr, env)
            env.vars[d.name] = v
        elif isinstance(d, S.FunDec):
            env.vars[d.name] = Closure(list(d.params), d.body, env, d.name)
        elif isinstance(d, S.ModuleDec):
            m = ModuleVal(d.name, d.param, d.body, env, d.ret_ann, d.size_param)
            env.vars[d.name] = PreParamModuleVal(m) if d.size_param is not None else m
        elif isinstance(d, S.DatatypeDec):
            for name, info in d.info.ctors.items():
                env.vars[name] = (DatatypeVal(name, info.tag) if info.payload is None
                                  else CtorVal(name, info.tag))
        elif isinstance(d, S.TypeDec):
            pass
        else:
            raise InternalError(f"not a declaration: {d!r}")


def _size_detail(expected: Type, found: Type) -> str:
    """First differing array size or delay between two hardware types."""
    if isinstance(expected, Array) and isinstance(found, Array):
        if isinstance(expected.size, int) and expected.size != found.size:
            return f"array sizes differ: {expected.size} vs {found.size}"
        return _size_detail(expected.elem, found.elem)
    if isinstance(expected, Temporal) and isinstance(found, Temporal):
        if isinstance(expected.time, int) and expected.time != found.time:
            return f"delays differ: {expected.time} vs {found.time}"
        return _size_detail(expected.elem, found.elem)
    if isinstance(expected, HRecord) and isinstance(found, HRecord):
        ff = dict(found.fields)
        for lab, t in expected.fields:
            if lab in ff:
                d = _size_detail(t, ff[lab])
                if d:
                    return d
    return ""


# ---------------------------------------------------------------- top-level module

def _pin_leaves(p, expected: Type, prefix: str | None = None):
    """(pin name, type, pattern path) for each leaf of a module parameter pattern."""
    if isinstance(p, S.PVar):
        return [(p.name, expected, p)]
    if isinstance(p, S.PWild):
        return [(prefix or "_", expected, p)]
    if isinstance(p, S.PRecord):
        ef = dict(expected.fields) if isinstance(expected, HRecord) else {}
        out = []
        for lab, sub in p.fields:
            out += _pin_leaves(sub, ef.get(lab, Meta(0)), f"{prefix}_{lab}" if prefix else f"in{lab}")
        return out
    raise UnsupportedFeature("top-level module parameters must be variables or records of "
                             "variables", p.span)


def _pin_value(p, pins: dict):
    if isinstance(p, (S.PVar, S.PWild)):
        return pins[id(p)]
    return RecordNode(tuple((lab, _pin_value(sub, pins)) for lab, sub in p.fields))


def expand_top_module(m, name: str, ev: Evaluator | None = None) -> Netlist:
    """Apply the program's module to named input pins and build its netlist."""
    ev = ev or Evaluator()
    if isinstance(m, PreParamModuleVal):
        raise NonModuleProgram("the program returns a size-parameterized module; instantiate "
                               "it with <:n:> first")
    if isinstance(m, BuiltinModule):
        raise NonConcreteModule(f"the built-in module {m.name} has no fixed port types")
    if not isinstance(m, ModuleVal):
        raise NonModuleProgram("the program does not evaluate to a module")
    env = ev.module_env(m)
    expected = ev.param_types(m.param, env)
    leaves = _pin_leaves(m.param, expected)
    ports, pins, by_pattern = [], {}, {}
    for pname, t, pat in leaves:
        if not is_concrete(t):
            raise NonConcreteModule(f"input '{pname}' of module {m.name} has a non-concrete type "
                                    f"{render(t)}", pat.span)
        if pname in pins:
            raise NonConcreteModule(f"duplicate input name '{pname}'", pat.span)
        pin = Pin(pname, t)
        pins[pname] = pin
        by_pattern[id(pat)] = pin
        ports.append((pname, t))
    arg = _pin_value(m.param, by_pattern)
    out = ev.apply_module(m, arg)
    if not is_concrete(out.type):
        raise NonConcreteModule(f"the output of module {m.name} has a non-concrete type "
                                f"{render(out.type)}")
    return Netlist(name, ports, out, pins)
