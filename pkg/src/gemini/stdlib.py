"""Built-in structures: their type signatures and host implementations."""

from __future__ import annotations

import math
import os
from functools import lru_cache

from .errors import LibraryError, Overflow
from .hwops import twos_complement
from .lexer import INT_MAX, INT_MIN
from .netlist import ArrayNode, Delay, elements
from .types import BIT, HARDWARE, Array, Module, Poly, SubstEnv, fresh_meta, fresh_size, temporal
from .values import UNIT_VAL, Builtin, BuiltinModule, SWVal, from_py_list

# name -> signature in surface type syntax
SIGNATURES = {
    "Core.print": "string -> unit",
    "Core.read": "string -> string",
    "List.nth": "('a list * int) -> 'a",
    "List.length": "'a list -> int",
    "List.rev": "'a list -> 'a list",
    "List.map": "('a -> 'b) -> 'a list -> 'b list",
    "List.filter": "('a -> int) -> 'a list -> 'a list",
    "List.foldl": "('a * 'b -> 'b) -> 'b -> 'a list -> 'b",
    "List.foldr": "('a * 'b -> 'b) -> 'b -> 'a list -> 'b",
    "Int.toString": "int -> string",
    "String.size": "string -> int",
    "String.substring": "(string * int * int) -> string",
    "String.concat": "string list -> string",
    "String.split": "string -> string -> string list",
    "Real.floor": "real -> int",
    "Real.ceil": "real -> int",
    "Real.round": "real -> int",
    "Real.fromInt": "int -> real",
    "Real.toString": "real -> string",
    "Array.toList": "'a[n] sw -> 'a sw list",
    "Array.fromList": "'a sw list -> 'a[n] sw",
}
ALIASES = {"print": "Core.print"}


def _module_signatures() -> dict:
    n = fresh_size("n")
    h = fresh_meta(HARDWARE)
    return {
        "BitArray.twosComp": Module(Array(BIT, n), Array(BIT, n)),
        "HW.dff": Poly((h,), Module(h, temporal(h, 1))),
    }


def signature(text: str):
    """Translate a signature string and quantify all of its variables."""
    from .infer import Decorator, Scope
    from .parser import parse_type
    sigma = SubstEnv()
    t = sigma.zonk(Decorator(sigma, Scope()).translate(parse_type(text), {}))
    free = list(sigma.free_metas(t).values())
    return Poly(tuple(free), t) if free else t


@lru_cache(maxsize=None)
def _all_signatures() -> tuple:
    sigs = {name: signature(text) for name, text in SIGNATURES.items()}
    sigs.update(_module_signatures())
    for alias, target in ALIASES.items():
        sigs[alias] = sigs[target]
    return tuple(sigs.items())


def type_scope():
    """A fresh root scope holding every built-in's type."""
    from .infer import Scope
    root = Scope()
    root.values.update(dict(_all_signatures()))
    return root


# ---------------------------------------------------------------- implementations

def _int(v: int) -> int:
    if not INT_MIN <= v <= INT_MAX:
        raise Overflow(f"{v} is outside the 32-bit integer range")
    return v


def _fmt_int(v: int) -> str:
    return f"~{-v}" if v < 0 else str(v)


def _fmt_real(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "~inf"
    s = repr(v)
    return "~" + s[1:] if s.startswith("-") else s


def _real_to_int(v: float, how) -> int:
    if math.isnan(v) or math.isinf(v):
        raise LibraryError(f"cannot convert {_fmt_real(v)} to an integer")
    return _int(int(how(v)))


def _round_half_away(v: float) -> float:
    return math.copysign(math.floor(abs(v) + 0.5), v)


def _print(ev, s):
    ev.out.write(s)
    return UNIT_VAL


def _read(ev, path):
    full = path if os.path.isabs(path) else os.path.join(ev.base_dir or ".", path)
    try:
        with open(full, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise LibraryError(f"cannot read file {path!r}: {exc.strerror}") from None


def _nth(ev, pair):
    lst, i = pair.get("1"), pair.get("2")
    if i >= 0:
        for k, x in enumerate(lst):
            if k == i:
                return x
    raise LibraryError(f"List.nth: index {i} is out of bounds")


def _map(ev, f, lst):
    return from_py_list([ev.apply(f, x) for x in lst])


def _filter(ev, f, lst):
    return from_py_list([x for x in lst if ev.apply(f, x) != 0])


def _pair(a, b):
    from .values import RecordVal
    return RecordVal((("1", a), ("2", b)))


def _foldl(ev, f, acc, lst):
    for x in lst:
        acc = ev.apply(f, _pair(x, acc))
    return acc


def _foldr(ev, f, acc, lst):
    for x in reversed(list(lst)):
        acc = ev.apply(f, _pair(x, acc))
    return acc


def _substring(ev, triple):
    s, i, j = triple.get("1"), triple.get("2"), triple.get("3")
    if not 0 <= i <= j <= len(s):
        raise LibraryError(f"String.substring: indices {i}..{j} are out of bounds for a string "
                           f"of length {len(s)}")
    return s[i:j]


def _split(ev, s, delim):
    if not delim:
        raise LibraryError("String.split: the delimiter must not be empty")
    return from_py_list(s.split(delim))


def _to_list(ev, w):
    return from_py_list([SWVal(e) for e in elements(w.hw)])


def _from_list(ev, lst):
    return SWVal(ArrayNode(tuple(x.hw for x in lst)))


IMPLEMENTATIONS = {
    "Core.print": (1, _print),
    "Core.read": (1, _read),
    "List.nth": (1, _nth),
    "List.length": (1, lambda ev, l: sum(1 for _ in l)),
    "List.rev": (1, lambda ev, l: from_py_list(reversed(list(l)))),
    "List.map": (2, _map),
    "List.filter": (2, _filter),
    "List.foldl": (3, _foldl),
    "List.foldr": (3, _foldr),
    "Int.toString": (1, lambda ev, i: _fmt_int(i)),
    "String.size": (1, lambda ev, s: len(s)),
    "String.substring": (1, _substring),
    "String.concat": (1, lambda ev, l: "".join(l)),
    "String.split": (2, _split),
    "Real.floor": (1, lambda ev, r: _real_to_int(r, math.floor)),
    "Real.ceil": (1, lambda ev, r: _real_to_int(r, math.ceil)),
    "Real.round": (1, lambda ev, r: _real_to_int(r, _round_half_away)),
    "Real.fromInt": (1, lambda ev, i: float(i)),
    "Real.toString": (1, lambda ev, r: _fmt_real(r)),
    "Array.toList": (1, _to_list),
    "Array.fromList": (1, _from_list),
}


def value_env() -> dict:
    """Initial value bindings for every built-in."""
    env = {name: Builtin(name, arity, fn) for name, (arity, fn) in IMPLEMENTATIONS.items()}
    env["BitArray.twosComp"] = BuiltinModule("BitArray.twosComp", twos_complement)
    env["HW.dff"] = BuiltinModule("HW.dff", Delay)
    for alias, target in ALIASES.items():
        env[alias] = env[target]
    return env


def twos_complement_module(width: int):
    """Stand-alone netlist computing the two's complement of a ``width``-bit input."""
    from .netlist import Netlist, Pin
    if width < 1:
        raise LibraryError("twosComp needs a width of at least 1")
    pin = Pin("x", Array(BIT, width))
    return Netlist("twos_comp", [("x", pin.type)], twos_complement(pin), {"x": pin})

