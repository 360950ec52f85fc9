"""Random record-bearing hardware designs, rendered as source programs."""

from __future__ import annotations

import random


def _width(t) -> int:
    tag = t[0]
    if tag == "bit":
        return 1
    if tag == "array":
        return t[2] * _width(t[1])
    return sum(_width(f) for _, f in t[1])


def _render_type(t) -> str:
    tag = t[0]
    if tag == "bit":
        return "bit"
    if tag == "array":
        inner = _render_type(t[1])
        if t[1][0] == "record":
            inner = f"({inner})"
        return f"{inner}[{t[2]}]"
    if t[0] == "record" and all(lab == str(i + 1) for i, (lab, _) in enumerate(t[1])):
        return "(" + " * ".join(_render_type(f) for _, f in t[1]) + ")"
    return "#{" + ", ".join(f"{lab}: {_render_type(f)}" for lab, f in t[1]) + "}"


class DesignGen:
    def __init__(self, seed: int, max_bits: int = 12):
        self.rng = random.Random(seed)
        self.budget = max_bits

    def gen_type(self, depth: int, budget: int):
        r = self.rng
        if depth == 0 or budget < 2 or r.random() < 0.3:
            return ("bit",)
        if r.random() < 0.4:
            elem = self.gen_type(depth - 1, budget // 2)
            most = budget // _width(elem)
            if most >= 1:
                return ("array", elem, r.randint(1, min(3, most)))
            return elem
        fields = []
        left = budget
        tuple_style = r.random() < 0.4
        for i in range(r.randint(1, 3)):
            if left < 1:
                break
            f = self.gen_type(depth - 1, max(1, left // 2))
            left -= _width(f)
            fields.append((str(i + 1) if tuple_style else "abcdefg"[i], f))
        if tuple_style and len(fields) == 1:
            fields = [("a", fields[0][1])]
        return ("record", tuple(fields))

    def paths(self, expr: str, t):
        """(expression, type) for every sub-value reachable by field and index reads."""
        yield expr, t
        if t[0] == "array":
            for i in range(t[2]):
                yield from self.paths(f"({expr})[:{i}:]", t[1])
        elif t[0] == "record":
            for lab, ft in t[1]:
                yield from self.paths(f"#{lab}({expr})", ft)

    def bit_expr(self, leaves, depth: int) -> str:
        r = self.rng
        if depth == 0 or r.random() < 0.3:
            return r.choice(leaves)
        pick = r.random()
        if pick < 0.2:
            return f"!({self.bit_expr(leaves, depth - 1)})"
        op = r.choice(["&", "|", "^"])
        return f"({self.bit_expr(leaves, depth - 1)} {op} {self.bit_expr(leaves, depth - 1)})"

    def out_expr(self, reads, depth: int) -> str:
        r = self.rng
        bits = [e for e, t in reads if t[0] == "bit"]
        roll = r.random()
        if depth == 0 or roll < 0.35:
            return self.bit_expr(bits, 2)
        if roll < 0.5:
            e, _ = r.choice(reads)
            return f"HW.dff ({e})" if r.random() < 0.2 else e
        if roll < 0.7:
            n = r.randint(1, 3)
            return "#[" + ", ".join(self.bit_expr(bits, 2) for _ in range(n)) + "]"
        n = r.randint(1, 3)
        inner = ", ".join(f"{'pqrs'[i]} = {self.out_expr(reads, depth - 1)}" for i in range(n))
        return "#{" + inner + "}"

    def program(self) -> str:
        r = self.rng
        ports = []
        left = self.budget
        for i in range(r.randint(1, 3)):
            if left < 1:
                break
            t = self.gen_type(3, left if i == 0 else max(1, left // 2))
            left -= _width(t)
            ports.append((f"x{i}", t))
        reads = [p for name, t in ports for p in self.paths(name, t)]
        fields = ", ".join(f"{'pqrs'[i]} = {self.out_expr(reads, 2)}"
                           for i in range(r.randint(1, 3)))
        sig = ", ".join(f"{name}: {_render_type(t)}" for name, t in ports)
        return f"let\nmodule design #({sig}) =\n    #{{{fields}}}\nin\ndesign\nend\n"


def random_design(seed: int, max_bits: int = 12) -> str:
    return DesignGen(seed, max_bits).program()
