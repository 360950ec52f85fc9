"""Semantic types: software, hardware and module kinds plus metavariables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .errors import InternalError, Span

SOFTWARE = "software"
HARDWARE = "hardware"
MODULE = "module"
UNKNOWN = "unknown"


class Type:
    __slots__ = ()


# ---------------------------------------------------------------- metavariables and sizes

@dataclass(frozen=True)
class Meta(Type):
    id: int
    kind: str = UNKNOWN  # SOFTWARE | HARDWARE | UNKNOWN
    origin: Span | None = field(default=None, compare=False, hash=False, repr=False)


_meta_ids = itertools.count(1)


def fresh_meta(kind: str = UNKNOWN, origin: Span | None = None) -> Meta:
    return Meta(next(_meta_ids), kind, origin)


@dataclass(frozen=True)
class SizeVar:
    """A size or time that only staging can compute; compatible with any size."""
    id: int
    name: str = "?"

    def __str__(self) -> str:
        return self.name


def fresh_size(name: str = "?") -> SizeVar:
    return SizeVar(next(_meta_ids), name)


Size = "int | SizeVar"


# ---------------------------------------------------------------- software

@dataclass(frozen=True)
class Int(Type):
    pass


@dataclass(frozen=True)
class Real(Type):
    pass


@dataclass(frozen=True)
class String(Type):
    pass


@dataclass(frozen=True)
class Arrow(Type):
    arg: Type
    result: Type


@dataclass(frozen=True)
class ListT(Type):
    elem: Type


@dataclass(frozen=True)
class Sw(Type):
    hw: Type


@dataclass(frozen=True)
class SRecord(Type):
    fields: tuple  # ((label, type), ...)


@dataclass(frozen=True)
class Ref(Type):
    elem: Type


@dataclass(frozen=True)
class SDatatype(Type):
    name: str
    tag: int
    ctors: tuple = field(compare=False)  # ((name, payload | None), ...)
    args: tuple = ()


@dataclass(frozen=True)
class SMu(Type):
    vars: tuple  # (Meta, ...)
    body: Type


# ---------------------------------------------------------------- hardware

@dataclass(frozen=True)
class Bit(Type):
    pass


@dataclass(frozen=True)
class Array(Type):
    elem: Type
    size: object  # int | SizeVar


@dataclass(frozen=True)
class Temporal(Type):
    elem: Type
    time: object  # int | SizeVar


@dataclass(frozen=True)
class HRecord(Type):
    fields: tuple


@dataclass(frozen=True)
class HDatatype(Type):
    name: str
    tag: int
    ctors: tuple = field(compare=False)
    args: tuple = ()


# ---------------------------------------------------------------- modules and binders

@dataclass(frozen=True)
class Module(Type):
    arg: Type
    result: Type


@dataclass(frozen=True)
class ParamModule(Type):
    size: Type
    arg: Type
    result: Type


@dataclass(frozen=True)
class Poly(Type):
    """Universally quantified type; ``constraints`` are deferred obligations."""
    vars: tuple  # (Meta, ...)
    body: Type
    constraints: tuple = field(default=(), compare=False)


SPoly = HPoly = MPoly = Poly


@dataclass(frozen=True)
class Top(Type):
    kind: str = UNKNOWN


@dataclass(frozen=True)
class Bottom(Type):
    kind: str = UNKNOWN


INT, REAL, STRING, BIT = Int(), Real(), String(), Bit()
UNIT = SRecord(())

_SOFT = (Int, Real, String, Arrow, ListT, Sw, SRecord, Ref, SDatatype, SMu)
_HARD = (Bit, Array, Temporal, HRecord, HDatatype)
_MOD = (Module, ParamModule)


def kind_of(t: Type) -> str:
    if isinstance(t, Meta):
        return t.kind
    if isinstance(t, _SOFT):
        return SOFTWARE
    if isinstance(t, _HARD):
        return HARDWARE
    if isinstance(t, _MOD):
        return MODULE
    if isinstance(t, Poly):
        return kind_of(t.body)
    if isinstance(t, (Top, Bottom)):
        return t.kind
    raise InternalError(f"not a type: {t!r}")


def is_error_type(t: Type) -> bool:
    return isinstance(t, (Top, Bottom))


def temporal(h: Type, time) -> Type:
    """Normalizing constructor: times add up and are pushed to the leaves."""
    if isinstance(time, int) and time == 0:
        return h
    if isinstance(h, Temporal):
        if isinstance(h.time, int) and isinstance(time, int):
            return temporal(h.elem, h.time + time)
        return Temporal(h.elem, fresh_size())
    if isinstance(h, Array):
        return Array(temporal(h.elem, time), h.size)
    if isinstance(h, HRecord):
        return HRecord(tuple((lab, temporal(ft, time)) for lab, ft in h.fields))
    return Temporal(h, time)


# ---------------------------------------------------------------- structure helpers

def map_children(t: Type, fn) -> Type:
    """Rebuild ``t`` with ``fn`` applied to each immediate sub-type."""
    if isinstance(t, Arrow):
        return Arrow(fn(t.arg), fn(t.result))
    if isinstance(t, ListT):
        return ListT(fn(t.elem))
    if isinstance(t, Sw):
        return Sw(fn(t.hw))
    if isinstance(t, Ref):
        return Ref(fn(t.elem))
    if isinstance(t, SRecord):
        return SRecord(tuple((lab, fn(x)) for lab, x in t.fields))
    if isinstance(t, HRecord):
        return HRecord(tuple((lab, fn(x)) for lab, x in t.fields))
    if isinstance(t, (SDatatype, HDatatype)):
        ctors = tuple((c, None if p is None else fn(p)) for c, p in t.ctors)
        return type(t)(t.name, t.tag, ctors, tuple(fn(a) for a in t.args))
    if isinstance(t, Array):
        return Array(fn(t.elem), t.size)
    if isinstance(t, Temporal):
        return temporal(fn(t.elem), t.time)
    if isinstance(t, Module):
        return Module(fn(t.arg), fn(t.result))
    if isinstance(t, ParamModule):
        return ParamModule(fn(t.size), fn(t.arg), fn(t.result))
    return t


def sub_types(t: Type) -> Iterable[Type]:
    if isinstance(t, Arrow):
        return (t.arg, t.result)
    if isinstance(t, (ListT, Ref)):
        return (t.elem,)
    if isinstance(t, Sw):
        return (t.hw,)
    if isinstance(t, (SRecord, HRecord)):
        return tuple(x for _, x in t.fields)
    if isinstance(t, (SDatatype, HDatatype)):
        return tuple(t.args) + tuple(p for _, p in t.ctors if p is not None)
    if isinstance(t, (Array, Temporal)):
        return (t.elem,)
    if isinstance(t, Module):
        return (t.arg, t.result)
    if isinstance(t, ParamModule):
        return (t.size, t.arg, t.result)
    if isinstance(t, (SMu, Poly)):
        return (t.body,)
    return ()


def var_ids(t: Type) -> frozenset:
    """Ids of the variables bound by an SMu or Poly binder."""
    return frozenset(v.id for v in t.vars)


def replace_vars(t: Type, mapping: dict) -> Type:
    """Replace metas by id, leaving variables bound by inner SMu/Poly alone."""
    if not mapping:
        return t
    if isinstance(t, Meta):
        return mapping.get(t.id, t)
    if isinstance(t, (SMu, Poly)):
        ids = var_ids(t)
        inner = {k: v for k, v in mapping.items() if k not in ids}
        if isinstance(t, SMu):
            return SMu(t.vars, replace_vars(t.body, inner))
        cons = tuple(c.replace(inner) for c in t.constraints)
        return Poly(t.vars, replace_vars(t.body, inner), cons)
    return map_children(t, lambda x: replace_vars(x, mapping))


def unfold(mu: SMu) -> Type:
    """Expand a recursive type exactly one level."""
    return replace_vars(mu.body, {v.id: mu for v in mu.vars})


def datatype_of(t: Type):
    """The SDatatype/HDatatype inside ``t`` (unrolled once if recursive), else None."""
    if isinstance(t, SMu):
        t = unfold(t)
    if isinstance(t, (SDatatype, HDatatype)):
        return t
    return None


# ---------------------------------------------------------------- substitution environment

class SubstEnv:
    """The global substitution Σ: each metavariable id is bound at most once."""

    def __init__(self):
        self.map: dict[int, Type] = {}

    def __contains__(self, meta_id: int) -> bool:
        return meta_id in self.map

    def __len__(self) -> int:
        return len(self.map)

    def get(self, meta_id: int):
        return self.map.get(meta_id)

    def bind(self, meta: Meta, t: Type) -> None:
        if meta.id in self.map:
            raise InternalError(f"metavariable {meta.id} is already bound")
        self.map[meta.id] = t

    def resolve(self, t: Type) -> Type:
        while isinstance(t, Meta) and t.id in self.map:
            t = self.map[t.id]
        return t

    def zonk(self, t: Type, bound: frozenset = frozenset()) -> Type:
        """Apply Σ exhaustively, skipping bound variables."""
        if isinstance(t, Meta):
            if t.id in bound:
                return t
            r = self.resolve(t)
            return r if r is t else self.zonk(r, bound)
        if isinstance(t, SMu):
            return SMu(t.vars, self.zonk(t.body, bound | var_ids(t)))
        if isinstance(t, Poly):
            b = bound | var_ids(t)
            return Poly(t.vars, self.zonk(t.body, b), tuple(c.zonk(self, b) for c in t.constraints))
        if isinstance(t, (Int, Real, String, Bit, Top, Bottom)):
            return t
        return map_children(t, lambda x: self.zonk(x, bound))

    def free_metas(self, t: Type, out: dict | None = None, bound: frozenset = frozenset()) -> dict:
        """Ordered free metas of ``t`` after applying Σ (id -> Meta)."""
        if out is None:
            out = {}
        t = self.resolve(t) if not (isinstance(t, Meta) and t.id in bound) else t
        if isinstance(t, Meta):
            if t.id not in bound:
                out.setdefault(t.id, t)
            return out
        if isinstance(t, (SMu, Poly)):
            bound = bound | var_ids(t)
        for s in sub_types(t):
            self.free_metas(s, out, bound)
        return out


def substitute_type_once(t: Type, sigma: SubstEnv, bound: frozenset = frozenset()) -> tuple[Type, bool]:
    """One pass: each free meta is replaced by its image in Σ, without chasing."""
    if isinstance(t, Meta):
        if t.id in bound or t.id not in sigma:
            return t, False
        image = sigma.get(t.id)
        return image, not (isinstance(image, Meta) and image.id == t.id)
    if isinstance(t, (SMu, Poly)):
        body, changed = substitute_type_once(t.body, sigma, bound | var_ids(t))
        if isinstance(t, SMu):
            return SMu(t.vars, body), changed
        return Poly(t.vars, body, t.constraints), changed
    changed = False

    def step(x):
        nonlocal changed
        y, c = substitute_type_once(x, sigma, bound)
        changed = changed or c
        return y
    return map_children(t, step), changed


def substitute(sigma: SubstEnv, env: dict, max_iters: int = 10000) -> tuple[dict, int]:
    """Apply Σ to every entry of ``env`` until nothing changes.

    Returns the new environment and the number of passes that changed it.
    """
    current = dict(env)
    passes = 0
    while True:
        changed = False
        nxt = {}
        for name, t in current.items():
            t2, c = substitute_type_once(t, sigma)
            nxt[name] = t2
            changed = changed or c
        current = nxt
        if not changed:
            return current, passes
        passes += 1
        if passes > max_iters:
            raise InternalError(f"substitution did not reach a fixed point after {max_iters} passes")


# ---------------------------------------------------------------- rendering

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _var_name(i: int) -> str:
    name = _LETTERS[i % 26]
    return "'" + (name if i < 26 else f"{name}{i // 26}")


def is_tuple_fields(fields: tuple) -> bool:
    return len(fields) >= 2 and [lab for lab, _ in fields] == [str(i + 1) for i in range(len(fields))]


class _Renderer:
    def __init__(self):
        self.names: dict[int, str] = {}

    def name(self, meta_id: int) -> str:
        if meta_id not in self.names:
            self.names[meta_id] = _var_name(len(self.names))
        return self.names[meta_id]

    # precedence: 0 arrow/module, 1 tuple, 2 postfix/atom
    def go(self, t: Type, prec: int = 0) -> str:
        if isinstance(t, Meta):
            return self.name(t.id)
        if isinstance(t, Int):
            return "int"
        if isinstance(t, Real):
            return "real"
        if isinstance(t, String):
            return "string"
        if isinstance(t, Bit):
            return "bit"
        if isinstance(t, Top):
            return "TOP"
        if isinstance(t, Bottom):
            return "BOTTOM"
        if isinstance(t, Arrow):
            s = f"{self.go(t.arg, 1)} -> {self.go(t.result, 0)}"
            return f"({s})" if prec > 0 else s
        if isinstance(t, Module):
            s = f"{self.go(t.arg, 1)} ~> {self.go(t.result, 0)}"
            return f"({s})" if prec > 0 else s
        if isinstance(t, ParamModule):
            s = f"<:{self.go(t.size, 2)}:> {self.go(t.arg, 1)} ~> {self.go(t.result, 0)}"
            return f"({s})" if prec > 0 else s
        if isinstance(t, ListT):
            return f"{self.go(t.elem, 2)} list"
        if isinstance(t, Ref):
            return f"{self.go(t.elem, 2)} ref"
        if isinstance(t, Sw):
            return f"{self.go(t.hw, 2)} sw"
        if isinstance(t, (SRecord, HRecord)):
            hw = isinstance(t, HRecord)
            if not t.fields:
                return "#{}" if hw else "unit"
            if is_tuple_fields(t.fields):
                sep = " #* " if hw else " * "
                s = sep.join(self.go(x, 2) for _, x in t.fields)
                return f"({s})" if prec > 1 else s
            inner = ", ".join(f"{lab}: {self.go(x)}" for lab, x in t.fields)
            return ("#{" if hw else "{") + inner + "}"
        if isinstance(t, (SDatatype, HDatatype)):
            if not t.args:
                return t.name
            if len(t.args) == 1:
                return f"{self.go(t.args[0], 2)} {t.name}"
            return "(" + ", ".join(self.go(a) for a in t.args) + f") {t.name}"
        if isinstance(t, SMu):
            return self.go(t.body, prec)
        if isinstance(t, Array):
            return f"{self.go(t.elem, 2)}[{t.size}]"
        if isinstance(t, Temporal):
            s = f"{self.go(t.elem, 2)} @ {t.time}"
            return f"({s})" if prec > 1 else s
        if isinstance(t, Poly):
            for v in t.vars:
                self.name(v.id)
            return self.go(t.body, prec)
        return repr(t)


def render(t: Type) -> str:
    return _Renderer().go(t)


def render_pair(t1: Type, t2: Type) -> tuple[str, str]:
    """Render two types with one shared naming of metavariables."""
    r = _Renderer()
    return r.go(t1), r.go(t2)


def alpha_equivalent(t1: Type, t2: Type) -> bool:
    """Equal up to a consistent renaming of metavariables and sizes."""
    fwd: dict = {}
    bwd: dict = {}

    def same_var(a, b) -> bool:
        if fwd.setdefault(a, b) != b or bwd.setdefault(b, a) != a:
            return False
        return True

    def go(a, b) -> bool:
        if isinstance(a, Meta) and isinstance(b, Meta):
            return same_var(a.id, b.id)
        if type(a) is not type(b):
            return False
        if isinstance(a, (SDatatype, HDatatype)):
            return a.tag == b.tag and len(a.args) == len(b.args) and all(map(go, a.args, b.args))
        if isinstance(a, (SRecord, HRecord)):
            if [l for l, _ in a.fields] != [l for l, _ in b.fields]:
                return False
        if isinstance(a, (Array, Temporal)):
            sa, sb = (a.size, b.size) if isinstance(a, Array) else (a.time, b.time)
            if isinstance(sa, SizeVar) != isinstance(sb, SizeVar):
                return False
            if isinstance(sa, int) and sa != sb:
                return False
        if isinstance(a, (Poly, SMu)) and len(a.vars) != len(b.vars):
            return False
        if isinstance(a, (Poly, SMu)):
            for x, y in zip(a.vars, b.vars):
                if not same_var(x.id, y.id):
                    return False
        subs_a, subs_b = sub_types(a), sub_types(b)
        if isinstance(a, (SDatatype, HDatatype)):
            return True
        return len(subs_a) == len(subs_b) and all(map(go, subs_a, subs_b))

    return go(t1, t2)
