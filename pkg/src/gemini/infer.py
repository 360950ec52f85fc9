"""Semantic analysis: decoration, unification-driven inference and rule checking.

Inference and checking run in one traversal.  Errors are recorded as
diagnostics and the offending expression is given BOTTOM (or its binding
TOP) so that independent mistakes are all reported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import syntax as S
from .errors import (Diagnostic, GeminiError, InternalError, KindError, NonModuleProgram,
                     OccursError, OutOfRange, Span, TypeMismatch, UnboundIdentifier,
                     UnknownTypeName)
from .types import (BIT, HARDWARE, INT, MODULE, REAL, SOFTWARE, STRING, UNIT, UNKNOWN, Array,
                    Arrow, Bit, Bottom, HDatatype, HRecord, Int, ListT, Meta, Module,
                    ParamModule, Poly, Real, Ref, SDatatype, SizeVar, SMu, SRecord, String,
                    SubstEnv, Sw, Temporal, Top, Type, datatype_of, fresh_meta, fresh_size,
                    kind_of, render, render_pair, replace_vars, substitute, temporal)

_tags = itertools.count(1)

# ---------------------------------------------------------------- deferred constraints


@dataclass
class HasField:
    """``record`` must be a record type with ``label : fld``."""
    record: Type
    label: str
    fld: Type
    span: Span | None = None

    def types(self):
        return (self.record, self.fld)

    def replace(self, mapping):
        return HasField(replace_vars(self.record, mapping), self.label,
                        replace_vars(self.fld, mapping), self.span)

    def zonk(self, sigma, bound):
        return HasField(sigma.zonk(self.record, bound), self.label, sigma.zonk(self.fld, bound), self.span)


@dataclass
class EqType:
    """Values of ``t`` must support ``=``/``<>``."""
    t: Type
    span: Span | None = None

    def types(self):
        return (self.t,)

    def replace(self, mapping):
        return EqType(replace_vars(self.t, mapping), self.span)

    def zonk(self, sigma, bound):
        return EqType(sigma.zonk(self.t, bound), self.span)


@dataclass
class OneOf:
    """``t`` must be one of ``options``; ``default`` is used if it stays unknown."""
    t: Type
    options: tuple
    what: str
    default: Type | None = None
    span: Span | None = None

    def types(self):
        return (self.t,)

    def replace(self, mapping):
        return OneOf(replace_vars(self.t, mapping), self.options, self.what, self.default, self.span)

    def zonk(self, sigma, bound):
        return OneOf(sigma.zonk(self.t, bound), self.options, self.what, self.default, self.span)


# ---------------------------------------------------------------- datatypes and scopes

@dataclass
class CtorInfo:
    name: str
    kind: str  # "s" | "h"
    tag: int
    params: tuple  # (Meta, ...)
    payload: Type | None  # with the recursive type already expanded once
    result: Type
    family: tuple  # ((ctor name, arity), ...) for the whole datatype

    def instantiate(self) -> tuple[Type | None, Type]:
        mapping = {p.id: fresh_meta(p.kind) for p in self.params}
        payload = None if self.payload is None else replace_vars(self.payload, mapping)
        return payload, replace_vars(self.result, mapping)


@dataclass
class DatatypeInfo:
    name: str
    kind: str
    tag: int
    params: tuple
    union: Type
    ctors: dict


@dataclass
class TypeCon:
    """A named type constructor: ``params`` are substituted by arguments."""
    params: tuple
    body: Type

    def apply(self, args: list, span=None) -> Type:
        if len(args) != len(self.params):
            raise TypeMismatch(f"type constructor expects {len(self.params)} argument(s), "
                               f"got {len(args)}", span)
        return replace_vars(self.body, {p.id: a for p, a in zip(self.params, args)})


class Scope:
    def __init__(self, parent: Scope | None = None):
        self.parent = parent
        self.values: dict = {}  # name -> Type | CtorInfo
        self.types: dict = {}   # name -> TypeCon

    def lookup(self, name: str):
        s = self
        while s is not None:
            if name in s.values:
                return s.values[name]
            s = s.parent
        return None

    def lookup_type(self, name: str):
        s = self
        while s is not None:
            if name in s.types:
                return s.types[name]
            s = s.parent
        return None

    def chain(self):
        s = self
        while s is not None:
            yield s
            s = s.parent


_BASE_TYPES = {"int": INT, "real": REAL, "string": STRING, "bit": BIT, "unit": UNIT}
_KIND_NAMES = {SOFTWARE: "software", HARDWARE: "hardware", MODULE: "module"}


def _size_of(expr) -> object:
    """Static array size from an annotation or generator expression."""
    if isinstance(expr, S.IntLit):
        return expr.value
    if isinstance(expr, S.Var):
        return fresh_size(expr.name)
    return fresh_size()


# ---------------------------------------------------------------- decoration

class Decorator:
    """Fills binder slots with translated annotations or fresh kinded metas."""

    def __init__(self, sigma: SubstEnv, root: Scope):
        self.sigma = sigma
        self.scope = Scope(root)

    # annotation translation
    def translate(self, ann, tyvars: dict, want: str = UNKNOWN) -> Type:
        t = self._translate(ann, tyvars, want)
        self._require_kind(t, want, ann.span)
        return t

    def _require_kind(self, t, want, span):
        if want == UNKNOWN:
            return
        t = self.sigma.resolve(t)
        k = kind_of(t)
        if isinstance(t, Meta) and k == UNKNOWN:
            self.sigma.bind(t, fresh_meta(want, span))
            return
        if k != want and k != UNKNOWN:
            raise KindError(f"expected a {_KIND_NAMES[want]} type, found {render(t)}", span)

    def _tyvar(self, name, tyvars, want, span):
        m = tyvars.get(name)
        if m is None:
            m = tyvars[name] = fresh_meta(want, span)
        return m

    def _translate(self, a, tyvars, want) -> Type:
        if isinstance(a, S.TyVar):
            return self._tyvar(a.name, tyvars, want, a.span)
        if isinstance(a, S.TyName):
            if a.name in _BASE_TYPES and not a.args:
                return _BASE_TYPES[a.name]
            if a.name == "list" and len(a.args) == 1:
                return ListT(self.translate(a.args[0], tyvars, SOFTWARE))
            if a.name == "ref" and len(a.args) == 1:
                return Ref(self.translate(a.args[0], tyvars, SOFTWARE))
            if a.name == "sw" and len(a.args) == 1:
                return Sw(self.translate(a.args[0], tyvars, HARDWARE))
            con = self.scope.lookup_type(a.name)
            if con is None:
                raise UnknownTypeName(f"unknown type name '{a.name}'", a.span)
            return con.apply([self.translate(x, tyvars) for x in a.args], a.span)
        if isinstance(a, S.TyRecord):
            # a plain record type in a hardware position (e.g. `(bit * bit)[8]`) is a
            # hardware record
            hw = a.hw or (want == HARDWARE and bool(a.fields))
            k = HARDWARE if hw else SOFTWARE
            flds = tuple((lab, self.translate(t, tyvars, k)) for lab, t in a.fields)
            return HRecord(flds) if hw else SRecord(flds)
        if isinstance(a, S.TyArrow):
            return Arrow(self.translate(a.arg, tyvars, SOFTWARE), self.translate(a.result, tyvars, SOFTWARE))
        if isinstance(a, S.TyArray):
            size = _size_of(a.size)
            if isinstance(size, int) and size < 0:
                raise TypeMismatch("array size must be non-negative", a.size.span)
            return Array(self.translate(a.elem, tyvars, HARDWARE), size)
        if isinstance(a, S.TyTemporal):
            time = _size_of(a.time)
            if isinstance(time, int) and time < 0:
                raise TypeMismatch("delay time must be non-negative", a.time.span)
            return temporal(self.translate(a.elem, tyvars, HARDWARE), time)
        raise InternalError(f"not a type annotation: {a!r}")

    # traversal
    def expr(self, e) -> None:
        if isinstance(e, S.Let):
            saved = self.scope
            self.scope = Scope(saved)
            for d in e.decs:
                self.dec(d)
            self.expr(e.body)
            e.scope_types = self.scope
            self.scope = saved
            return
        if isinstance(e, S.Case):
            self.expr(e.subject)
            for p, body in e.arms:
                self.pattern(p, {}, UNKNOWN)
                self.expr(body)
            return
        if isinstance(e, S.ArrayGen):
            e.ty = INT
            self.expr(e.size)
            self.expr(e.body)
            return
        if isinstance(e, S.Lambda):
            self.pattern(e.param, {}, SOFTWARE)
            self.expr(e.body)
            return
        if isinstance(e, S.ModuleTerm):
            self.pattern(e.param, {}, HARDWARE)
            e.ret_ty = (self.translate(e.ret_ann, {}, HARDWARE) if e.ret_ann is not None
                        else fresh_meta(HARDWARE, e.span))
            self.expr(e.body)
            return
        for c in S.children(e):
            self.expr(c)

    def pattern(self, p, tyvars: dict, kind: str) -> None:
        if isinstance(p, S.PVar):
            p.ty = (self.translate(p.ann, tyvars, kind) if p.ann is not None
                    else fresh_meta(kind, p.span))
        elif isinstance(p, S.PRecord):
            k = HARDWARE if p.hw else (SOFTWARE if kind == HARDWARE else kind)
            for _, sub in p.fields:
                self.pattern(sub, tyvars, k)
        elif isinstance(p, S.PCon):
            if p.arg is not None:
                self.pattern(p.arg, tyvars, UNKNOWN)
        elif isinstance(p, S.PCons):
            self.pattern(p.head, tyvars, SOFTWARE)
            self.pattern(p.tail, tyvars, SOFTWARE)

    def dec(self, d) -> None:
        if isinstance(d, S.ValDec):
            tyvars: dict = {}
            d.ty = self.translate(d.ann, tyvars) if d.ann is not None else fresh_meta(UNKNOWN, d.span)
            self.expr(d.expr)
        elif isinstance(d, S.FunDec):
            tyvars = {}
            for p in d.params:
                self.pattern(p, tyvars, SOFTWARE)
            d.ret_ty = (self.translate(d.ret_ann, tyvars, SOFTWARE) if d.ret_ann is not None
                        else fresh_meta(SOFTWARE, d.span))
            self.expr(d.body)
        elif isinstance(d, S.ModuleDec):
            tyvars = {}
            if d.size_param is not None:
                sp = d.size_param
                sp.ty = self.translate(sp.ann, tyvars, SOFTWARE) if sp.ann is not None else INT
            self.pattern(d.param, tyvars, HARDWARE)
            d.ret_ty = (self.translate(d.ret_ann, tyvars, HARDWARE) if d.ret_ann is not None
                        else fresh_meta(HARDWARE, d.span))
            self.expr(d.body)
        elif isinstance(d, S.TypeDec):
            tyvars = {v: fresh_meta(UNKNOWN, d.span) for v in d.tyvars}
            params = tuple(tyvars.values())
            body = self.translate(d.body, tyvars)
            params = tuple(self.sigma.zonk(p) for p in params)
            self.scope.types[d.name] = TypeCon(params, self.sigma.zonk(body))
        elif isinstance(d, S.DatatypeDec):
            self.datatype(d)
        else:
            raise InternalError(f"not a declaration: {d!r}")

    def datatype(self, d: S.DatatypeDec) -> None:
        hw = d.kind == "h"
        want = HARDWARE if hw else SOFTWARE
        tyvars = {v: fresh_meta(UNKNOWN, d.span) for v in d.tyvars}
        params = tuple(tyvars.values())
        m = fresh_meta(want, d.span)
        self.scope.types[d.name] = TypeCon(params, m)
        payloads = []
        for cname, ann in d.ctors:
            payloads.append(None if ann is None else self.translate(ann, tyvars, want))
        params = tuple(self.sigma.zonk(p) for p in params)
        payloads = [None if p is None else self.sigma.zonk(p) for p in payloads]
        tag = next(_tags)
        ctors = tuple((c, p) for (c, _), p in zip(d.ctors, payloads))
        dt = (HDatatype if hw else SDatatype)(d.name, tag, ctors, params)
        recursive = any(p is not None and m.id in self.sigma.free_metas(p) for p in payloads)
        union = SMu((m,), dt) if recursive else dt
        self.sigma.bind(m, union)
        self.scope.types[d.name] = TypeCon(params, union)
        family = tuple((c, 0 if p is None else 1) for c, p in ctors)
        infos = {}
        for c, p in ctors:
            expanded = None if p is None else replace_vars(p, {m.id: union})
            infos[c] = CtorInfo(c, d.kind, tag, params, expanded, union, family)
        d.info = DatatypeInfo(d.name, d.kind, tag, params, union, infos)


def decorate(tree, sigma: SubstEnv | None = None, root: Scope | None = None):
    """Fill every binder slot of ``tree`` in place; returns the tree."""
    Decorator(sigma or SubstEnv(), root or Scope()).expr(tree)
    return tree


# ---------------------------------------------------------------- unification

class Unifier:
    """Unification in the fixed case order, recording new bindings in ``log``."""

    def __init__(self, sigma: SubstEnv):
        self.sigma = sigma
        self.log: dict = {}

    def resolve(self, t: Type) -> Type:
        t = self.sigma.resolve(t)
        if isinstance(t, Temporal):
            inner = self.sigma.resolve(t.elem)
            if isinstance(inner, (Temporal, Array, HRecord)) and isinstance(t.time, int):
                return self.resolve(temporal(inner, t.time))
        return t

    def bind(self, m: Meta, t: Type) -> None:
        self.sigma.bind(m, t)
        self.log[m.id] = t

    def unify(self, t1: Type, t2: Type) -> None:
        a, b = self.resolve(t1), self.resolve(t2)
        if a is b:
            return
        if isinstance(a, (Top, Bottom)) or isinstance(b, (Top, Bottom)):
            return
        if isinstance(a, Meta):
            return self.bind_meta(a, b)
        if isinstance(b, Meta):
            return self.bind_meta(b, a)
        ka, kb = kind_of(a), kind_of(b)
        if ka != kb:
            x, y = render_pair(a, b)
            raise KindError(f"{_KIND_NAMES[ka]} type {x} is incompatible with "
                            f"{_KIND_NAMES[kb]} type {y}", types=(x, y))
        self.structural(a, b)

    def bind_meta(self, m: Meta, t: Type) -> None:
        if isinstance(t, Meta):
            if t.id == m.id:
                return
            if m.kind == UNKNOWN:
                return self.bind(m, t)
            if t.kind == UNKNOWN:
                return self.bind(t, m)
            if m.kind != t.kind:
                raise KindError(f"a {_KIND_NAMES[m.kind]} type variable cannot stand for a "
                                f"{_KIND_NAMES[t.kind]} type variable")
            return self.bind(m, t)
        kt = kind_of(t)
        if m.kind != UNKNOWN and kt != m.kind:
            raise KindError(f"expected a {_KIND_NAMES[m.kind]} type, found {_KIND_NAMES[kt]} "
                            f"type {render(t)}", types=(render(t),))
        if m.id in self.sigma.free_metas(t):
            x, y = render_pair(m, t)
            raise OccursError(f"cannot construct the infinite type {x} = {y}", types=(x, y))
        self.bind(m, t)

    def mismatch(self, a, b, detail: str = ""):
        x, y = render_pair(a, b)
        msg = f"{x} is not compatible with {y}"
        raise TypeMismatch(f"{detail}: {msg}" if detail else msg, types=(x, y))

    def structural(self, a: Type, b: Type) -> None:
        da, db = datatype_of(a), datatype_of(b)
        if da is not None or db is not None:
            if da is None or db is None or da.tag != db.tag or type(da) is not type(db):
                self.mismatch(a, b)
            for x, y in zip(da.args, db.args):
                self.unify(x, y)
            return
        if type(a) is not type(b):
            self.mismatch(a, b)
        if isinstance(a, (Int, Real, String, Bit)):
            return
        if isinstance(a, Arrow):
            self.unify(a.arg, b.arg)
            self.unify(a.result, b.result)
        elif isinstance(a, (ListT, Ref)):
            self.unify(a.elem, b.elem)
        elif isinstance(a, Sw):
            self.unify(a.hw, b.hw)
        elif isinstance(a, (SRecord, HRecord)):
            fa, fb = dict(a.fields), dict(b.fields)
            if set(fa) != set(fb):
                self.mismatch(a, b, "record labels differ")
            for lab, t in a.fields:
                self.unify(t, fb[lab])
        elif isinstance(a, Array):
            if isinstance(a.size, int) and isinstance(b.size, int) and a.size != b.size:
                self.mismatch(a, b, f"array sizes differ: {a.size} vs {b.size}")
            self.unify(a.elem, b.elem)
        elif isinstance(a, Temporal):
            if isinstance(a.time, int) and isinstance(b.time, int) and a.time != b.time:
                d = a.time - b.time
                if d > 0:
                    self.unify(temporal(a.elem, d), b.elem)
                else:
                    self.unify(a.elem, temporal(b.elem, -d))
            else:
                self.unify(a.elem, b.elem)
        elif isinstance(a, Module):
            self.unify(a.arg, b.arg)
            self.unify(a.result, b.result)
        elif isinstance(a, ParamModule):
            self.unify(a.size, b.size)
            self.unify(a.arg, b.arg)
            self.unify(a.result, b.result)
        else:
            self.mismatch(a, b)


def unify(t1: Type, t2: Type, sigma: SubstEnv) -> dict:
    """Unify two types, extending ``sigma``; returns the new bindings."""
    u = Unifier(sigma)
    u.unify(t1, t2)
    return u.log


def generalize(t: Type, env_free: set, sigma: SubstEnv, constraints: list | None = None) -> Type:
    """Quantify the free metas of ``t`` that are not free in the environment."""
    t = sigma.zonk(t)
    gen = [m for mid, m in sigma.free_metas(t).items() if mid not in env_free]
    if not gen:
        return t
    ids = {m.id for m in gen}
    mine = []
    if constraints is not None:
        for c in list(constraints):
            cm = set()
            for x in c.types():
                cm |= set(sigma.free_metas(x))
            if cm & ids:
                constraints.remove(c)
                mine.append(c.zonk(sigma, frozenset()))
    return Poly(tuple(gen), t, tuple(mine))


def instantiate(t: Type, pending: list | None = None) -> Type:
    """Replace the bound variables of a Poly with fresh metas of the same kind."""
    if not isinstance(t, Poly):
        return t
    mapping = {v.id: fresh_meta(v.kind) for v in t.vars}
    if pending is not None:
        for c in t.constraints:
            pending.append(c.replace(mapping))
    return replace_vars(t.body, mapping)


# ---------------------------------------------------------------- exhaustiveness

_LIST_FAMILY = (("[]", 0), ("::", 2))


def _simple(p):
    """Pattern as None (wildcard) or (key, args, family)."""
    if isinstance(p, S.PWild):
        return None
    if isinstance(p, S.PVar):
        info = getattr(p, "ctor", None)
        if info is None:
            return None
        return (f"{info.name}#{info.tag}", [], _family(info))
    if isinstance(p, S.PCon):
        info = getattr(p, "ctor", None)
        if info is None:
            return None
        args = [_simple(p.arg)] if p.arg is not None else []
        return (f"{info.name}#{info.tag}", args, _family(info))
    if isinstance(p, S.PLit):
        return (f"lit:{type(p.value).__name__}:{p.value!r}", [], None)
    if isinstance(p, S.PNil):
        return ("[]", [], _LIST_FAMILY)
    if isinstance(p, S.PCons):
        return ("::", [_simple(p.head), _simple(p.tail)], _LIST_FAMILY)
    if isinstance(p, S.PRecord):
        flds = sorted(p.fields, key=lambda f: _label_key(f[0]))
        key = "{" + ",".join(lab for lab, _ in flds) + "}"
        return (key, [_simple(x) for _, x in flds], ((key, len(flds)),))
    raise InternalError(f"not a pattern: {p!r}")


def _family(info: CtorInfo) -> tuple:
    return tuple((f"{c}#{info.tag}", a) for c, a in info.family)


def _label_key(lab: str):
    return (0, int(lab), "") if lab.isdigit() else (1, 0, lab)


def _useful(rows: list, q: list) -> bool:
    if not q:
        return not rows
    head = q[0]
    if head is not None:
        key, args, _ = head
        return _useful(_specialize(rows, key, len(args)), list(args) + q[1:])
    seen = {}
    family = None
    for r in rows:
        if r[0] is not None:
            seen[r[0][0]] = len(r[0][1])
            family = family or r[0][2]
    if family is not None and all(k in seen for k, _ in family):
        return any(_useful(_specialize(rows, k, a), [None] * a + q[1:]) for k, a in family)
    return _useful([r[1:] for r in rows if r[0] is None], q[1:])


def _specialize(rows: list, key: str, arity: int) -> list:
    out = []
    for r in rows:
        if r[0] is None:
            out.append([None] * arity + r[1:])
        elif r[0][0] == key:
            out.append(list(r[0][1]) + r[1:])
    return out


def is_exhaustive(patterns: list) -> bool:
    """Whether the pattern rows cover every value of their type."""
    return not _useful([[_simple(p)] for p in patterns], [None])


# ---------------------------------------------------------------- inference


def _nonexpansive(e) -> bool:
    """Syntactic values: the only right-hand sides a ``val`` may generalize."""
    if isinstance(e, (S.IntLit, S.RealLit, S.StringLit, S.BitLit, S.Var, S.Lambda,
                      S.ModuleTerm)):
        return True
    if isinstance(e, (S.RecordExpr, S.HwRecordExpr)):
        return all(_nonexpansive(x) for _, x in e.fields)
    if isinstance(e, (S.ListExpr, S.ArrayExpr)):
        return all(_nonexpansive(x) for x in e.items)
    return False


@dataclass
class InferResult:
    tree: object
    type: Type | None
    diagnostics: list
    sigma: SubstEnv
    bindings: dict = field(default_factory=dict)

    @property
    def errors(self) -> list:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list:
        return [d for d in self.diagnostics if d.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors


class Inferencer:
    def __init__(self, root: Scope | None = None, sigma: SubstEnv | None = None,
                 store_typing: dict | None = None, wrap_typing: dict | None = None):
        self.sigma = sigma or SubstEnv()
        self.unifier = Unifier(self.sigma)
        self.root = root or Scope()
        self.scope = Scope(self.root)
        self.pending: list = []
        self.diagnostics: list[Diagnostic] = []
        self.store_typing = store_typing or {}
        self.wrap_typing = wrap_typing or {}
        self.decorator = Decorator(self.sigma, self.root)
        self.typed_nodes: list = []

    # diagnostics ---------------------------------------------------------
    def report(self, exc: GeminiError, span: Span | None) -> None:
        if exc.span is None:
            exc.span = span
        self.diagnostics.append(exc.diagnostic())

    def warn(self, code: str, message: str, span: Span | None) -> None:
        self.diagnostics.append(Diagnostic("warning", code, message, span))

    def error_count(self) -> int:
        return sum(1 for d in self.diagnostics if d.severity == "error")

    # unification helpers -------------------------------------------------
    def expect(self, found: Type, expected: Type, span: Span | None = None) -> None:
        """Unify, annotating any failure with the full types involved."""
        try:
            self.unifier.unify(found, expected)
        except TypeMismatch as exc:
            e, f = render_pair(self.sigma.zonk(expected), self.sigma.zonk(found))
            if exc.types != (f, e) and exc.types != (e, f):
                exc.message = f"{exc.message} (expected {e}, found {f})"
            exc.types = (e, f)
            exc.span = exc.span or span
            raise
        except GeminiError as exc:
            exc.span = exc.span or span
            raise

    def need_kind(self, t: Type, kind: str, span) -> None:
        self.expect(t, fresh_meta(kind, span), span)

    def env_free(self) -> set:
        out: set = set()
        for sc in self.scope.chain():
            if sc is self.root:
                break
            for v in sc.values.values():
                if isinstance(v, Type):
                    out |= set(self.sigma.free_metas(v))
        return out

    def generalize(self, t: Type) -> Type:
        self.solve_pending()
        return generalize(t, self.env_free(), self.sigma, self.pending)

    def instantiate(self, t: Type) -> Type:
        return instantiate(t, self.pending)

    # deferred constraints ------------------------------------------------
    def solve_pending(self, final: bool = False) -> None:
        progress = True
        while progress:
            progress = False
            for c in list(self.pending):
                try:
                    done = self.try_solve(c, final)
                except GeminiError as exc:
                    self.pending.remove(c)
                    self.report(exc, c.span)
                    progress = True
                    continue
                if done:
                    self.pending.remove(c)
                    progress = True

    def try_solve(self, c, final: bool) -> bool:
        if isinstance(c, HasField):
            r = self.unifier.resolve(c.record)
            if isinstance(r, Meta):
                if final:
                    raise TypeMismatch(f"cannot determine the record type projected by #{c.label}",
                                       c.span)
                return False
            if isinstance(r, (Top, Bottom)):
                return True
            if isinstance(r, (SRecord, HRecord)):
                flds = dict(r.fields)
                if c.label not in flds:
                    raise TypeMismatch(f"record type {render(self.sigma.zonk(r))} has no field "
                                       f"'{c.label}'", c.span)
                self.expect(flds[c.label], c.fld, c.span)
                return True
            raise TypeMismatch(f"#{c.label} applied to non-record type {render(self.sigma.zonk(r))}",
                               c.span)
        if isinstance(c, EqType):
            verdict = self.equality_ok(c.t)
            if verdict is None:
                if final:
                    self.unifier.unify(c.t, INT)
                    return True
                return False
            if not verdict:
                raise TypeMismatch(f"equality is not defined on values of type "
                                   f"{render(self.sigma.zonk(c.t))}", c.span)
            return True
        if isinstance(c, OneOf):
            r = self.unifier.resolve(c.t)
            if isinstance(r, Meta):
                if final:
                    self.unifier.unify(r, c.default or c.options[0])
                    return True
                return False
            if isinstance(r, (Top, Bottom)) or any(type(r) is type(o) for o in c.options):
                return True
            opts = " or ".join(render(o) for o in c.options)
            raise TypeMismatch(f"{c.what} requires {opts}, found {render(self.sigma.zonk(r))}",
                               c.span, types=(opts, render(self.sigma.zonk(r))))
        raise InternalError(f"unknown constraint {c!r}")

    def equality_ok(self, t: Type):
        r = self.unifier.resolve(t)
        if isinstance(r, Meta):
            return None
        if isinstance(r, (Int, Real, String, Top, Bottom)):
            return True
        if isinstance(r, ListT):
            return self.equality_ok(r.elem)
        if isinstance(r, SRecord):
            verdicts = [self.equality_ok(x) for _, x in r.fields]
            if False in verdicts:
                return False
            return None if None in verdicts else True
        if isinstance(r, (SDatatype, SMu)):
            d = datatype_of(r)
            verdicts = [self.equality_ok(x) for x in d.args]
            if False in verdicts:
                return False
            return None if None in verdicts else True
        return False

    # scopes -------------------------------------------------------------
    def push(self) -> Scope:
        saved = self.scope
        self.scope = Scope(saved)
        return saved

    def lookup(self, name: str, span):
        v = self.scope.lookup(name)
        if v is None:
            raise UnboundIdentifier(f"unbound identifier '{name}'", span)
        return v

    # expressions ----------------------------------------------------------
    def infer(self, e) -> Type:
        try:
            t = self._infer(e)
        except GeminiError as exc:
            self.report(exc, e.span)
            t = Bottom(UNKNOWN)
        e.ty = t
        self.typed_nodes.append(e)
        return t

    def check(self, e, expected: Type) -> Type:
        t = self.infer(e)
        try:
            self.expect(t, expected, e.span)
        except GeminiError as exc:
            self.report(exc, e.span)
        return t

    def _infer(self, e) -> Type:
        method = getattr(self, "infer_" + type(e).__name__, None)
        if method is None:
            raise InternalError(f"no inference rule for {type(e).__name__}")
        return method(e)

    def infer_IntLit(self, e):
        return INT

    def infer_RealLit(self, e):
        return REAL

    def infer_StringLit(self, e):
        return STRING

    def infer_BitLit(self, e):
        return BIT

    def infer_Var(self, e):
        v = self.lookup(e.name, e.span)
        if isinstance(v, CtorInfo):
            e.ctor = v
            payload, result = v.instantiate()
            if payload is None:
                return result
            if v.kind == "h":
                raise TypeMismatch(f"hardware constructor {v.name} must be applied to an argument",
                                   e.span)
            return Arrow(payload, result)
        return self.instantiate(v)

    def infer_RecordExpr(self, e):
        flds = []
        for lab, x in e.fields:
            t = self.infer(x)
            self.need_kind(t, SOFTWARE, x.span)
            flds.append((lab, t))
        return SRecord(tuple(flds))

    def infer_HwRecordExpr(self, e):
        flds = []
        for lab, x in e.fields:
            t = self.infer(x)
            self.need_kind(t, HARDWARE, x.span)
            flds.append((lab, t))
        return HRecord(tuple(flds))

    def infer_ListExpr(self, e):
        elem = fresh_meta(SOFTWARE, e.span)
        for x in e.items:
            self.check(x, elem)
        return ListT(elem)

    def infer_ArrayExpr(self, e):
        elem = fresh_meta(HARDWARE, e.span)
        for x in e.items:
            self.check(x, elem)
        return Array(elem, len(e.items))

    def infer_ArrayGen(self, e):
        self.check(e.size, INT)
        if isinstance(e.size, S.IntLit) and e.size.value < 0:
            raise OutOfRange(f"array size {e.size.value} is negative", e.size.span)
        saved = self.push()
        self.scope.values[e.index] = INT
        try:
            body = self.infer(e.body)
            self.need_kind(body, HARDWARE, e.body.span)
        finally:
            self.scope = saved
        return Array(body, _size_of(e.size))

    def infer_BitArrayLit(self, e):
        self.check(e.width, INT)
        self.check(e.value, INT)
        return Array(BIT, _size_of(e.width))

    def infer_Proj(self, e):
        t = self.infer(e.expr)
        r = self.unifier.resolve(t)
        if isinstance(r, (Top, Bottom)):
            return Bottom(UNKNOWN)
        if isinstance(r, (SRecord, HRecord)):
            flds = dict(r.fields)
            if e.label not in flds:
                raise TypeMismatch(f"record type {render(self.sigma.zonk(r))} has no field "
                                   f"'{e.label}'", e.span)
            return flds[e.label]
        if isinstance(r, Meta):
            f = fresh_meta(r.kind, e.span)
            self.pending.append(HasField(r, e.label, f, e.span))
            return f
        raise TypeMismatch(f"#{e.label} applied to non-record type {render(self.sigma.zonk(r))}",
                           e.span)

    def infer_Index(self, e):
        elem = fresh_meta(HARDWARE, e.span)
        t = self.infer(e.expr)
        self.expect(t, Array(elem, fresh_size()), e.expr.span)
        self.check(e.index, INT)
        r = self.unifier.resolve(t)
        idx = e.index.value if isinstance(e.index, S.IntLit) else None
        if isinstance(r, Array) and isinstance(r.size, int) and idx is not None:
            if not 0 <= idx < r.size:
                raise OutOfRange(f"index {idx} is out of range for an array of size {r.size}",
                                 e.index.span)
        return elem

    def infer_Deref(self, e):
        elem = fresh_meta(SOFTWARE, e.span)
        self.check(e.expr, Ref(elem))
        return elem

    def infer_RefExpr(self, e):
        t = self.infer(e.expr)
        self.need_kind(t, SOFTWARE, e.expr.span)
        return Ref(t)

    def infer_Assign(self, e):
        elem = fresh_meta(SOFTWARE, e.span)
        self.check(e.target, Ref(elem))
        self.check(e.value, elem)
        return UNIT

    def infer_SwExpr(self, e):
        t = self.infer(e.expr)
        self.need_kind(t, HARDWARE, e.expr.span)
        return Sw(t)

    def infer_UnswExpr(self, e):
        h = fresh_meta(HARDWARE, e.span)
        self.check(e.expr, Sw(h))
        return h

    def infer_UnOp(self, e):
        if e.op == "~":
            t = self.infer(e.operand)
            self.pending.append(OneOf(t, (INT, REAL), "negation", INT, e.span))
            self.solve_pending()
            return t
        if e.op == "!":
            t = self.infer(e.operand)
            self.need_kind(t, HARDWARE, e.operand.span)
            return t
        if e.op in ("&->", "|->", "^->"):
            self.check(e.operand, Array(BIT, fresh_size()))
            return BIT
        raise InternalError(f"unknown unary operator {e.op}")

    _INT_OPS = {"+", "-", "*", "/", "%"}
    _REAL_OPS = {"+.", "-.", "*.", "/."}
    _ORDER_OPS = {"<", ">", "<=", ">="}

    def infer_BinOp(self, e):
        op = e.op
        if op in self._INT_OPS:
            self.check(e.left, INT)
            self.check(e.right, INT)
            return INT
        if op in self._REAL_OPS:
            self.check(e.left, REAL)
            self.check(e.right, REAL)
            return REAL
        if op in ("&", "|", "^"):
            t = self.infer(e.left)
            self.need_kind(t, HARDWARE, e.left.span)
            self.check(e.right, t)
            return t
        if op in ("<<", ">>", ">>>"):
            t = self.check(e.left, Array(BIT, fresh_size()))
            self.check(e.right, Array(BIT, fresh_size()))
            return t
        if op in ("=", "<>"):
            t = self.infer(e.left)
            self.need_kind(t, SOFTWARE, e.left.span)
            self.check(e.right, t)
            self.pending.append(EqType(t, e.span))
            self.solve_pending()
            return INT
        if op in self._ORDER_OPS:
            t = self.infer(e.left)
            self.need_kind(t, SOFTWARE, e.left.span)
            self.check(e.right, t)
            self.pending.append(OneOf(t, (INT, REAL, STRING), "comparison", INT, e.span))
            self.solve_pending()
            return INT
        if op == "::":
            elem = fresh_meta(SOFTWARE, e.span)
            self.check(e.left, elem)
            self.check(e.right, ListT(elem))
            return ListT(elem)
        raise InternalError(f"unknown binary operator {op}")

    def infer_If(self, e):
        self.check(e.cond, INT)
        t = self.infer(e.then)
        self.check(e.orelse, t)
        return t

    def infer_Case(self, e):
        subject = self.infer(e.subject)
        result = fresh_meta(UNKNOWN, e.span)
        for p, body in e.arms:
            saved = self.push()
            try:
                try:
                    self.pattern(p, subject, {})
                except GeminiError as exc:
                    self.report(exc, p.span)
                self.check(body, result)
            finally:
                self.scope = saved
        try:
            if not is_exhaustive([p for p, _ in e.arms]):
                self.warn("W001", "NonExhaustiveMatch: this case expression does not cover "
                          "every value", e.span)
        except RecursionError:
            pass
        return result

    def infer_Let(self, e):
        saved = self.push()
        try:
            for d in e.decs:
                self.dec(d)
            return self.infer(e.body)
        finally:
            self.scope = saved

    def infer_Seq(self, e):
        t = UNIT
        for x in e.exprs:
            t = self.infer(x)
        return t

    def infer_App(self, e):
        if isinstance(e.fn, S.Var):
            v = self.scope.lookup(e.fn.name)
            if isinstance(v, CtorInfo):
                e.fn.ctor = v
                return self.apply_ctor(v, e.arg, e.span)
        tf = self.infer(e.fn)
        r = self.unifier.resolve(tf)
        if isinstance(r, Module):
            self.check(e.arg, r.arg)
            return r.result
        if isinstance(r, ParamModule):
            raise TypeMismatch(f"module of type {render(self.sigma.zonk(r))} needs a size "
                               f"parameter <:n:> before it can be applied", e.fn.span)
        if isinstance(r, (Top, Bottom)):
            self.infer(e.arg)
            return Bottom(UNKNOWN)
        if isinstance(r, Meta) or isinstance(r, Arrow):
            ta = self.infer(e.arg)
            if isinstance(r, Arrow):
                self.expect(ta, r.arg, e.arg.span)
                return r.result
            result = fresh_meta(SOFTWARE, e.span)
            self.need_kind(ta, SOFTWARE, e.arg.span)
            self.expect(r, Arrow(ta, result), e.fn.span)
            return result
        self.infer(e.arg)
        raise TypeMismatch(f"value of type {render(self.sigma.zonk(r))} is not a function "
                           f"or module", e.fn.span)

    def apply_ctor(self, info: CtorInfo, arg, span) -> Type:
        payload, result = info.instantiate()
        if payload is None:
            self.infer(arg)
            raise TypeMismatch(f"constructor {info.name} takes no argument", span)
        self.check(arg, payload)
        return result

    def infer_Paramize(self, e):
        tm = self.infer(e.module)
        self.check(e.size, INT)
        r = self.unifier.resolve(tm)
        if isinstance(r, ParamModule):
            return Module(r.arg, r.result)
        if isinstance(r, (Top, Bottom)):
            return Bottom(MODULE)
        raise TypeMismatch(f"<: :> applied to {render(self.sigma.zonk(r))}, which is not a "
                           f"size-parameterized module", e.span)

    # runtime forms used by the small-step machine
    def infer_Lambda(self, e):
        saved = self.push()
        try:
            if e.param.ty is S.PLACEHOLDER:
                self.decorator.pattern(e.param, {}, SOFTWARE)
            pt = fresh_meta(SOFTWARE, e.span)
            rt = fresh_meta(SOFTWARE, e.span)
            if e.name:
                self.scope.values[e.name] = Arrow(pt, rt)
            self.pattern(e.param, pt, {})
            self.check(e.body, rt)
            return Arrow(pt, rt)
        finally:
            self.scope = saved

    def infer_ModuleTerm(self, e):
        saved = self.push()
        try:
            if e.param.ty is S.PLACEHOLDER:
                self.decorator.pattern(e.param, {}, HARDWARE)
            pt = fresh_meta(HARDWARE, e.span)
            self.pattern(e.param, pt, {})
            rt = getattr(e, "ret_ty", None) or fresh_meta(HARDWARE, e.span)
            self.check(e.body, rt)
            return Module(pt, rt)
        finally:
            self.scope = saved

    def infer_Loc(self, e):
        if e.index not in self.store_typing:
            raise InternalError(f"location {e.index} has no store typing")
        return Ref(self.store_typing[e.index])

    def infer_WrapLoc(self, e):
        if e.index not in self.wrap_typing:
            raise InternalError(f"wrapped location {e.index} has no typing")
        return Sw(self.wrap_typing[e.index])

    def infer_HwGate(self, e):
        t = fresh_meta(HARDWARE, e.span)
        for x in e.inputs:
            self.check(x, t)
        return t

    def infer_HwNot(self, e):
        t = self.infer(e.operand)
        self.need_kind(t, HARDWARE, e.span)
        return t

    def infer_DataValue(self, e):
        v = self.lookup(e.ctor, e.span)
        if not isinstance(v, CtorInfo):
            raise InternalError(f"{e.ctor} is not a constructor")
        if e.payload is None:
            return self.infer(S.Var(e.ctor, span=e.span))
        return self.apply_ctor(v, e.payload, e.span)

    # patterns -------------------------------------------------------------
    def pattern(self, p, expected: Type, bound: dict) -> None:
        if isinstance(p, S.PWild):
            return
        if isinstance(p, S.PVar):
            v = self.scope.lookup(p.name) if p.ann is None else None
            if isinstance(v, CtorInfo):
                p.ctor = v
                payload, result = v.instantiate()
                if payload is not None:
                    raise TypeMismatch(f"constructor {v.name} expects an argument pattern", p.span)
                self.expect(expected, result, p.span)
                return
            p.ctor = None
            if p.name in bound:
                raise TypeMismatch(f"variable '{p.name}' is bound twice in one pattern", p.span)
            if p.ty is S.PLACEHOLDER:
                p.ty = fresh_meta(UNKNOWN, p.span)
            self.expect(expected, p.ty, p.span)
            bound[p.name] = True
            self.scope.values[p.name] = p.ty
            return
        if isinstance(p, S.PLit):
            lit = {int: INT, float: REAL, str: STRING}[type(p.value)]
            self.expect(expected, lit, p.span)
            return
        if isinstance(p, S.PCon):
            v = self.lookup(p.name, p.span)
            if not isinstance(v, CtorInfo):
                raise TypeMismatch(f"'{p.name}' is not a constructor", p.span)
            p.ctor = v
            payload, result = v.instantiate()
            self.expect(expected, result, p.span)
            if payload is None:
                if p.arg is not None:
                    raise TypeMismatch(f"constructor {v.name} takes no argument", p.span)
                return
            if p.arg is None:
                raise TypeMismatch(f"constructor {v.name} expects an argument pattern", p.span)
            self.pattern(p.arg, payload, bound)
            return
        if isinstance(p, S.PRecord):
            kind = HARDWARE if p.hw else SOFTWARE
            r = self.unifier.resolve(expected)
            if not p.hw and isinstance(r, HRecord):
                kind = HARDWARE
            metas = [(lab, fresh_meta(kind, p.span)) for lab, _ in p.fields]
            rec = HRecord(tuple(metas)) if kind == HARDWARE else SRecord(tuple(metas))
            self.expect(expected, rec, p.span)
            for (lab, sub), (_, m) in zip(p.fields, metas):
                self.pattern(sub, m, bound)
            return
        if isinstance(p, S.PCons):
            elem = fresh_meta(SOFTWARE, p.span)
            self.expect(expected, ListT(elem), p.span)
            self.pattern(p.head, elem, bound)
            self.pattern(p.tail, ListT(elem), bound)
            return
        if isinstance(p, S.PNil):
            self.expect(expected, ListT(fresh_meta(SOFTWARE, p.span)), p.span)
            return
        raise InternalError(f"not a pattern: {p!r}")

    # declarations --------------------------------------------------------
    def dec(self, d) -> None:
        before = self.error_count()
        try:
            self._dec(d)
        except GeminiError as exc:
            self.report(exc, d.span)
        if self.error_count() > before and isinstance(d, (S.ValDec, S.FunDec, S.ModuleDec)):
            kind = {S.ValDec: UNKNOWN, S.FunDec: SOFTWARE, S.ModuleDec: MODULE}[type(d)]
            self.scope.values[d.name] = Top(kind)

    def _dec(self, d) -> None:
        if isinstance(d, S.ValDec):
            inner = None
            if isinstance(d.expr, S.ArrayGen):
                inner = self.push()
                self.scope.values[d.name] = d.ty
            try:
                t = self.infer(d.expr)
            finally:
                if inner is not None:
                    self.scope = inner
            self.expect(t, d.ty, d.expr.span)
            final = self.generalize(d.ty) if _nonexpansive(d.expr) else self.sigma.zonk(d.ty)
            d.ty = final
            self.scope.values[d.name] = final
            return
        if isinstance(d, S.FunDec):
            self_t = fresh_meta(SOFTWARE, d.span)
            saved = self.push()
            try:
                self.scope.values[d.name] = self_t
                bound: dict = {}
                ptypes = []
                for p in d.params:
                    pt = fresh_meta(SOFTWARE, p.span)
                    self.pattern(p, pt, bound)
                    ptypes.append(pt)
                body = self.infer(d.body)
                self.expect(body, d.ret_ty, d.body.span)
                ft = d.ret_ty
                for pt in reversed(ptypes):
                    ft = Arrow(pt, ft)
                self.expect(self_t, ft, d.span)
            finally:
                self.scope = saved
            d.ty = self.generalize(ft)
            self.scope.values[d.name] = d.ty
            return
        if isinstance(d, S.ModuleDec):
            saved = self.push()
            try:
                if d.size_param is not None:
                    self.expect(d.size_param.ty, INT, d.size_param.span)
                    self.scope.values[d.size_param.name] = INT
                pt = fresh_meta(HARDWARE, d.param.span)
                self.pattern(d.param, pt, {})
                body = self.infer(d.body)
                self.expect(body, d.ret_ty, d.body.span)
            finally:
                self.scope = saved
            mt = (ParamModule(INT, pt, d.ret_ty) if d.size_param is not None
                  else Module(pt, d.ret_ty))
            d.ty = self.generalize(mt)
            self.scope.values[d.name] = d.ty
            return
        if isinstance(d, S.TypeDec):
            return
        if isinstance(d, S.DatatypeDec):
            for name, info in d.info.ctors.items():
                self.scope.values[name] = info
            return
        raise InternalError(f"not a declaration: {d!r}")

    # finishing -----------------------------------------------------------
    def finish(self, extra_nodes=()) -> None:
        self.solve_pending(final=True)
        unknown: dict = {}
        nodes = list(self.typed_nodes) + list(extra_nodes)
        for n in nodes:
            if isinstance(n.ty, Type):
                for mid, m in self.sigma.free_metas(n.ty).items():
                    if m.kind == UNKNOWN:
                        unknown[mid] = m
        for m in unknown.values():
            if self.sigma.resolve(m) is m:
                self.sigma.bind(m, fresh_meta(SOFTWARE, m.origin))
        for n in nodes:
            if isinstance(n.ty, Type):
                n.ty = self.sigma.zonk(n.ty)


def _binder_nodes(tree):
    for n in S.walk(tree):
        if isinstance(n, (S.PVar, S.ValDec, S.FunDec, S.ModuleDec, S.ArrayGen)):
            yield n


def infer_program(tree, root: Scope | None = None, *, require_module: bool = True,
                  max_subst_iters: int = 10000, store_typing: dict | None = None,
                  wrap_typing: dict | None = None) -> InferResult:
    """Decorate ``tree`` in place, infer and check it.

    ``root`` supplies the built-in environment; by default the standard
    library is installed.
    """
    if root is None:
        from .stdlib import type_scope
        root = type_scope()
    inf = Inferencer(root, store_typing=store_typing, wrap_typing=wrap_typing)
    try:
        inf.decorator.expr(tree)
    except GeminiError as exc:
        inf.report(exc, tree.span)
        return InferResult(tree, None, inf.diagnostics, inf.sigma)
    t = inf.infer(tree)
    inf.finish(_binder_nodes(tree))
    t = inf.sigma.zonk(t)
    bindings = {}
    if isinstance(tree, S.Let):
        raw = {d.name: d.ty for d in tree.decs
               if isinstance(d, (S.ValDec, S.FunDec, S.ModuleDec)) and isinstance(d.ty, Type)}
        try:
            bindings, _ = substitute(inf.sigma, raw, max_subst_iters)
        except InternalError as exc:
            inf.diagnostics.append(Diagnostic("error", "E299", f"InternalError: {exc}", tree.span))
    if require_module and inf.error_count() == 0:
        check_program_type(t, tree.span, inf)
    return InferResult(tree, t, inf.diagnostics, inf.sigma, bindings)


def check_program_type(t: Type, span, inf: Inferencer | None = None) -> None:
    """The whole program must denote one concrete, non-polymorphic module."""
    problem = None
    if isinstance(t, Poly):
        problem = f"the program's module is polymorphic: {render(t)}"
    elif isinstance(t, ParamModule):
        problem = (f"the program returns a size-parameterized module {render(t)}; "
                   f"instantiate it with <:n:> first")
    elif not isinstance(t, Module):
        problem = f"a program must evaluate to a module, but this one has type {render(t)}"
    elif SubstEnv().free_metas(t):
        problem = f"the program's module type {render(t)} is not fully concrete"
    if problem is None:
        return
    exc = NonModuleProgram(problem, span)
    if inf is None:
        raise exc
    inf.diagnostics.append(exc.diagnostic())


def infer_source(source: str, origin: str = "<input>", **kw) -> InferResult:
    from .parser import parse_source
    return infer_program(parse_source(source, origin), **kw)


def infer_declarations(source: str, origin: str = "<input>") -> dict:
    """Top-level declaration types of ``source`` (a sequence of declarations)."""
    from .parser import parse_declarations
    decs = parse_declarations(source, origin)
    tree = S.Let(decs, S.RecordExpr([]))
    res = infer_program(tree, require_module=False)
    if res.errors:
        d = res.errors[0]
        raise _diag_to_error(d)
    return res.bindings


def _diag_to_error(d: Diagnostic) -> GeminiError:
    from . import errors as E
    for cls in (E.TypeMismatch, E.KindError, E.OccursError, E.UnboundIdentifier,
                E.NonModuleProgram, E.UnknownTypeName, E.OutOfRange):
        if cls.code == d.code:
            msg = d.message.split(": ", 1)[1] if ": " in d.message else d.message
            return cls(msg, d.span, d.types)
    return GeminiError(d.message, d.span, d.types)
