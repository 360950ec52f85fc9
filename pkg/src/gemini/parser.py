"""Recursive-descent parser with precedence climbing, and the derived-form desugarer."""

from __future__ import annotations

from dataclasses import fields

from . import syntax as S
from .errors import ParseError, Span
from .lexer import Token, tokenize

# token kind -> (binding power, associativity, operator spelling); higher binds tighter
BINARY = {
    "ASSIGN": (1, "right", ":="),
    "ORELSE": (2, "left", "orelse"),
    "ANDALSO": (3, "left", "andalso"),
    "SLL": (4, "left", "<<"), "SRL": (4, "left", ">>"), "SRA": (4, "left", ">>>"),
    "EQ": (5, "left", "="), "NE": (5, "left", "<>"),
    "GT": (6, "left", ">"), "LT": (6, "left", "<"), "GE": (6, "left", ">="), "LE": (6, "left", "<="),
    "CONS": (7, "right", "::"),
    "LOR": (8, "left", "||"), "LXOR": (8, "left", "^^"),
    "LAND": (9, "left", "&&"),
    "MINUS": (10, "left", "-"), "RSUB": (10, "left", "-."), "PLUS": (10, "left", "+"),
    "RADD": (10, "left", "+."), "CARET": (10, "left", "^"), "PIPE": (10, "left", "|"),
    "RDIV": (11, "left", "/."), "RMUL": (11, "left", "*."), "DIV": (11, "left", "/"),
    "TIMES": (11, "left", "*"), "AMP": (11, "left", "&"), "MOD": (11, "left", "%"),
}

BITARRAY = {"UARR": "u", "SARR": "s", "RARR": "r"}
PREFIX_SYMBOL = {"TILDE": "~", "BANG": "!", "ANDRED": "&->", "ORRED": "|->", "XORRED": "^->"}
PREFIX_KEYWORD = {"SW", "UNSW", "REF", "NOT"}

ATOM_START = {
    "INT", "REAL", "STRING", "BIT", "ID", "QID", "LPAREN", "LBRACK", "LBRACE", "HLBRACK",
    "HLBRACE", "HLPAREN", "NIL", "LET",
}
ARG_START = ATOM_START | set(PREFIX_SYMBOL) | {"DOLLAR", "HASH"}
DEC_START = {"VAL", "FUN", "TYPE", "SDATATYPE", "HDATATYPE", "MODULE"}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    # ------------------------------------------------------------ helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.tok.kind in kinds

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def expect(self, *kinds: str) -> Token:
        if self.tok.kind not in kinds:
            self.fail(kinds)
        return self.advance()

    def fail(self, expected) -> None:
        t = self.tok
        found = "end of file" if t.kind == "EOF" else f"{t.kind} {t.text!r}"
        exp = ", ".join(sorted(set(expected)))
        raise ParseError(f"unexpected {found}; expected one of: {exp}", t.span)

    def span_from(self, start: Span) -> Span:
        prev = self.toks[self.pos - 1] if self.pos > 0 else self.tok
        return start.merge(prev.span)

    # ------------------------------------------------------------ program
    def program(self) -> S.Node:
        e = self.expr()
        self.expect("EOF")
        return e

    def declarations_only(self) -> list:
        decs = self.decs()
        self.expect("EOF")
        return decs

    # ------------------------------------------------------------ expressions
    def expr(self) -> S.Node:
        if self.at("IF"):
            return self.if_expr()
        if self.at("CASE"):
            return self.case_expr()
        return self.binary(0)

    def if_expr(self) -> S.Node:
        start = self.advance().span
        cond = self.binary(0)
        self.expect("THEN")
        then = self.expr()
        orelse = None
        if self.at("ELSE"):
            self.advance()
            orelse = self.expr()
        return S.If(cond, then, orelse, span=self.span_from(start))

    def case_expr(self) -> S.Node:
        start = self.advance().span
        subject = self.binary(0)
        self.expect("OF")
        arms = [self.arm()]
        while self.at("BAR"):
            self.advance()
            arms.append(self.arm())
        return S.Case(subject, arms, span=self.span_from(start))

    def arm(self):
        pat = self.pattern()
        self.expect("DARROW")
        return (pat, self.expr())

    def binary(self, min_bp: int) -> S.Node:
        left = self.operand_or_control(min_bp)
        while self.tok.kind in BINARY:
            bp, assoc, op = BINARY[self.tok.kind]
            if bp < min_bp:
                break
            self.advance()
            right = self.binary(bp + 1 if assoc == "left" else bp)
            span = left.span.merge(right.span)
            left = self._binop(op, left, right, span)
        return left

    def operand_or_control(self, min_bp: int) -> S.Node:
        # `x := if ...` style right operands may be control forms
        if min_bp > 0 and self.at("IF", "CASE"):
            return self.expr()
        return self.bitarray()

    @staticmethod
    def _binop(op: str, left: S.Node, right: S.Node, span: Span) -> S.Node:
        if op == ":=":
            return S.Assign(left, right, span=span)
        if op == "andalso":
            return S.AndAlso(left, right, span=span)
        if op == "orelse":
            return S.OrElse(left, right, span=span)
        if op in ("&&", "||", "^^"):
            return S.Collapse(op, left, right, span=span)
        return S.BinOp(op, left, right, span=span)

    def bitarray(self) -> S.Node:
        left = self.kwprefix()
        if self.tok.kind in BITARRAY:
            mode = BITARRAY[self.advance().kind]
            right = self.kwprefix()
            if self.tok.kind in BITARRAY:
                raise ParseError("bit-array operators are non-associative; add parentheses",
                                 self.tok.span)
            return S.BitArrayLit(left, right, mode, span=left.span.merge(right.span))
        return left

    def kwprefix(self) -> S.Node:
        if self.tok.kind in PREFIX_KEYWORD:
            t = self.advance()
            operand = self.kwprefix()
            span = t.span.merge(operand.span)
            if t.kind == "SW":
                return S.SwExpr(operand, span=span)
            if t.kind == "UNSW":
                return S.UnswExpr(operand, span=span)
            if t.kind == "REF":
                return S.RefExpr(operand, span=span)
            return S.NotExpr(operand, span=span)
        return self.application()

    def application(self) -> S.Node:
        fn = self.postfix()
        while self.tok.kind in ARG_START:
            arg = self.postfix()
            fn = S.App(fn, arg, span=fn.span.merge(arg.span))
        return fn

    def postfix(self) -> S.Node:
        e = self.prefix()
        while self.at("LIDX", "LPARAM"):
            if self.advance().kind == "LIDX":
                idx = self.expr()
                end = self.expect("RIDX")
                e = S.Index(e, idx, span=e.span.merge(end.span))
            else:
                size = self.expr()
                end = self.expect("RPARAM")
                e = S.Paramize(e, size, span=e.span.merge(end.span))
        return e

    def prefix(self) -> S.Node:
        t = self.tok
        if t.kind in PREFIX_SYMBOL:
            self.advance()
            operand = self.prefix()
            return S.UnOp(PREFIX_SYMBOL[t.kind], operand, span=t.span.merge(operand.span))
        if t.kind == "DOLLAR":
            self.advance()
            operand = self.prefix()
            return S.Deref(operand, span=t.span.merge(operand.span))
        if t.kind == "HASH":
            self.advance()
            label = self.label()
            operand = self.prefix()
            return S.Proj(label, operand, span=t.span.merge(operand.span))
        return self.atom()

    def label(self) -> str:
        t = self.expect("ID", "INT")
        if t.kind == "INT" and (t.value < 1 or t.text != str(t.value)):
            raise ParseError(f"invalid record label {t.text!r}", t.span)
        return t.text

    def atom(self) -> S.Node:
        t = self.tok
        k = t.kind
        if k == "INT":
            self.advance()
            return S.IntLit(t.value, span=t.span)
        if k == "REAL":
            self.advance()
            return S.RealLit(t.value, span=t.span)
        if k == "STRING":
            self.advance()
            return S.StringLit(t.value, span=t.span)
        if k == "BIT":
            self.advance()
            return S.BitLit(t.value, span=t.span)
        if k in ("ID", "QID"):
            self.advance()
            return S.Var(t.text, span=t.span)
        if k == "NIL":
            self.advance()
            return S.ListExpr([], span=t.span)
        if k == "LET":
            return self.let_expr()
        if k == "LPAREN":
            return self.paren()
        if k == "LBRACK":
            self.advance()
            items = self.comma_list("RBRACK", self.expr)
            end = self.expect("RBRACK")
            return S.ListExpr(items, span=t.span.merge(end.span))
        if k == "LBRACE":
            self.advance()
            flds = self.record_fields("RBRACE")
            end = self.expect("RBRACE")
            return S.RecordExpr(flds, span=t.span.merge(end.span))
        if k == "HLBRACE":
            self.advance()
            flds = self.record_fields("RBRACE")
            end = self.expect("RBRACE")
            return S.HwRecordExpr(flds, span=t.span.merge(end.span))
        if k == "HLPAREN":
            self.advance()
            items = self.comma_list("RPAREN", self.expr)
            end = self.expect("RPAREN")
            return S.HwTupleExpr(items, span=t.span.merge(end.span))
        if k == "HLBRACK":
            return self.array()
        self.fail(ATOM_START | set(PREFIX_SYMBOL) | PREFIX_KEYWORD | {"DOLLAR", "HASH", "IF", "CASE"})

    def comma_list(self, closer: str, item) -> list:
        items = []
        if self.at(closer):
            return items
        items.append(item())
        while self.at("COMMA"):
            self.advance()
            items.append(item())
        return items

    def record_fields(self, closer: str) -> list:
        def one():
            lab = self.label()
            self.expect("EQ")
            return (lab, self.expr())
        flds = self.comma_list(closer, one)
        seen = set()
        for lab, e in flds:
            if lab in seen:
                raise ParseError(f"duplicate record label {lab!r}", e.span)
            seen.add(lab)
        return flds

    def paren(self) -> S.Node:
        start = self.advance().span
        if self.at("RPAREN"):
            end = self.advance()
            return S.UnitExpr(span=start.merge(end.span))
        first = self.expr()
        if self.at("COMMA"):
            items = [first]
            while self.at("COMMA"):
                self.advance()
                items.append(self.expr())
            end = self.expect("RPAREN")
            return S.TupleExpr(items, span=start.merge(end.span))
        if self.at("SEMI"):
            items = [first]
            while self.at("SEMI"):
                self.advance()
                items.append(self.expr())
            end = self.expect("RPAREN")
            return S.Seq(items, span=start.merge(end.span))
        self.expect("RPAREN", "COMMA", "SEMI")
        return first

    def array(self) -> S.Node:
        start = self.advance().span
        if self.at("RBRACK"):
            end = self.advance()
            return S.ArrayExpr([], span=start.merge(end.span))
        first = self.expr()
        if self.at("SEMI"):
            self.advance()
            self.expect("GEN")
            idx = self.expect("ID").text
            self.expect("DARROW")
            body = self.expr()
            end = self.expect("RBRACK")
            return S.ArrayGen(first, idx, body, span=start.merge(end.span))
        items = [first]
        while self.at("COMMA"):
            self.advance()
            items.append(self.expr())
        end = self.expect("RBRACK", "COMMA", "SEMI")
        return S.ArrayExpr(items, span=start.merge(end.span))

    def let_expr(self) -> S.Node:
        start = self.advance().span
        decs = self.decs()
        self.expect("IN")
        body = self.expr()
        if self.at("SEMI"):
            items = [body]
            while self.at("SEMI"):
                self.advance()
                items.append(self.expr())
            body = S.Seq(items, span=items[0].span.merge(items[-1].span))
        end = self.expect("END", "SEMI")
        return S.Let(decs, body, span=start.merge(end.span))

    # ------------------------------------------------------------ declarations
    def decs(self) -> list:
        out = []
        while True:
            if self.at("SEMI"):
                self.advance()
                continue
            if self.tok.kind not in DEC_START:
                break
            out.append(self.dec())
        return out

    def dec(self) -> S.Node:
        t = self.tok
        if t.kind == "VAL":
            self.advance()
            name = self.expect("ID").text
            ann = self.opt_annotation()
            self.expect("EQ")
            e = self.expr()
            return S.ValDec(name, ann, e, span=self.span_from(t.span))
        if t.kind == "FUN":
            self.advance()
            name = self.expect("ID").text
            params = [self.fun_param()]
            while self.at("ID", "LPAREN", "LBRACE"):
                params.append(self.fun_param())
            ann = self.opt_annotation()
            self.expect("EQ")
            body = self.expr()
            return S.FunDec(name, params, ann, body, span=self.span_from(t.span))
        if t.kind == "TYPE":
            self.advance()
            tyvars = self.tyvar_seq()
            name = self.expect("ID").text
            self.expect("EQ")
            body = self.ty()
            return S.TypeDec(tyvars, name, body, span=self.span_from(t.span))
        if t.kind in ("SDATATYPE", "HDATATYPE"):
            self.advance()
            tyvars = self.tyvar_seq()
            name = self.expect("ID").text
            self.expect("EQ")
            ctors = [self.ctor_def()]
            while self.at("BAR"):
                self.advance()
                ctors.append(self.ctor_def())
            kind = "s" if t.kind == "SDATATYPE" else "h"
            return S.DatatypeDec(kind, tyvars, name, ctors, span=self.span_from(t.span))
        if t.kind == "MODULE":
            self.advance()
            name = self.expect("ID").text
            size_param = None
            if self.at("LPARAM"):
                self.advance()
                p = self.expect("ID")
                ann = self.opt_annotation()
                self.expect("RPARAM")
                size_param = S.PVar(p.text, ann, span=p.span)
            param = self.module_param()
            ann = self.opt_annotation()
            self.expect("EQ")
            body = self.expr()
            return S.ModuleDec(name, size_param, param, ann, body, span=self.span_from(t.span))
        self.fail(DEC_START)

    def opt_annotation(self):
        if self.at("COLON"):
            self.advance()
            return self.ty()
        return None

    def tyvar_seq(self) -> list:
        if self.at("TYVAR"):
            return [self.advance().text]
        if self.at("LPAREN") and self.peek().kind == "TYVAR":
            self.advance()
            names = [self.expect("TYVAR").text]
            while self.at("COMMA"):
                self.advance()
                names.append(self.expect("TYVAR").text)
            self.expect("RPAREN")
            return names
        return []

    def ctor_def(self):
        name = self.expect("ID").text
        if self.at("OF"):
            self.advance()
            return (name, self.ty())
        return (name, None)

    def typed_name(self) -> S.Node:
        t = self.expect("ID")
        ann = self.opt_annotation()
        if t.text == "_":
            return S.PWild(span=t.span) if ann is None else S.PVar("_", ann, span=t.span)
        return S.PVar(t.text, ann, span=self.span_from(t.span))

    def fun_param(self) -> S.Node:
        t = self.tok
        if t.kind == "ID":
            self.advance()
            return S.PVar(t.text, span=t.span) if t.text != "_" else S.PWild(span=t.span)
        if t.kind == "LPAREN":
            self.advance()
            if self.at("RPAREN"):
                end = self.advance()
                return S.PRecord([], span=t.span.merge(end.span))
            items = self.comma_list("RPAREN", self.typed_name)
            end = self.expect("RPAREN")
            if len(items) == 1:
                return items[0]
            return S.PTuple(items, span=t.span.merge(end.span))
        if t.kind == "LBRACE":
            self.advance()
            items = self.comma_list("RBRACE", self.typed_name)
            end = self.expect("RBRACE")
            return S.PRecord([(p.name, p) for p in items], span=t.span.merge(end.span))
        self.fail({"ID", "LPAREN", "LBRACE"})

    def module_param(self) -> S.Node:
        t = self.tok
        if t.kind == "HLPAREN":
            self.advance()
            items = self.comma_list("RPAREN", self.typed_name)
            end = self.expect("RPAREN")
            return S.PTuple(items, hw=True, span=t.span.merge(end.span))
        if t.kind == "HLBRACE":
            self.advance()
            items = self.comma_list("RBRACE", self.typed_name)
            end = self.expect("RBRACE")
            return S.PRecord([(p.name, p) for p in items], hw=True, span=t.span.merge(end.span))
        if t.kind == "LPAREN":
            self.advance()
            p = self.typed_name()
            self.expect("RPAREN")
            return p
        if t.kind == "ID":
            self.advance()
            return S.PVar(t.text, span=t.span)
        self.fail({"ID", "LPAREN", "HLPAREN", "HLBRACE"})

    # ------------------------------------------------------------ patterns
    def pattern(self) -> S.Node:
        head = self.app_pattern()
        if self.at("CONS"):
            self.advance()
            tail = self.pattern()
            return S.PCons(head, tail, span=head.span.merge(tail.span))
        return head

    def app_pattern(self) -> S.Node:
        t = self.tok
        if t.kind == "ID" and self.peek().kind in (
                "INT", "REAL", "STRING", "ID", "LPAREN", "LBRACK", "LBRACE", "NIL"):
            self.advance()
            arg = self.atom_pattern()
            return S.PCon(t.text, arg, span=t.span.merge(arg.span))
        return self.atom_pattern()

    def atom_pattern(self) -> S.Node:
        t = self.tok
        k = t.kind
        if k in ("INT", "REAL", "STRING"):
            self.advance()
            return S.PLit(t.value, span=t.span)
        if k == "ID":
            self.advance()
            return S.PWild(span=t.span) if t.text == "_" else S.PVar(t.text, span=t.span)
        if k == "NIL":
            self.advance()
            return S.PNil(span=t.span)
        if k == "LBRACK":
            self.advance()
            items = self.comma_list("RBRACK", self.pattern)
            end = self.expect("RBRACK")
            span = t.span.merge(end.span)
            out: S.Node = S.PNil(span=span)
            for p in reversed(items):
                out = S.PCons(p, out, span=p.span.merge(span))
            return out
        if k == "LPAREN":
            self.advance()
            if self.at("RPAREN"):
                end = self.advance()
                return S.PRecord([], span=t.span.merge(end.span))
            items = self.comma_list("RPAREN", self.annotated_pattern)
            end = self.expect("RPAREN")
            if len(items) == 1:
                return items[0]
            return S.PTuple(items, span=t.span.merge(end.span))
        if k == "LBRACE":
            self.advance()

            def one():
                lab = self.label()
                if self.at("EQ"):
                    self.advance()
                    return (lab, self.pattern())
                return (lab, S.PVar(lab, span=self.toks[self.pos - 1].span))
            flds = self.comma_list("RBRACE", one)
            end = self.expect("RBRACE")
            labels = [lab for lab, _ in flds]
            if len(set(labels)) != len(labels):
                raise ParseError("duplicate label in record pattern", t.span)
            return S.PRecord(flds, span=t.span.merge(end.span))
        self.fail({"INT", "REAL", "STRING", "ID", "NIL", "LBRACK", "LPAREN", "LBRACE"})

    def annotated_pattern(self) -> S.Node:
        p = self.pattern()
        if self.at("COLON") and isinstance(p, S.PVar):
            self.advance()
            p.ann = self.ty()
        return p

    # ------------------------------------------------------------ types
    def ty(self) -> S.Node:
        left = self.tuple_ty()
        if self.at("ARROW"):
            self.advance()
            right = self.ty()
            return S.TyArrow(left, right, span=left.span.merge(right.span))
        return left

    def tuple_ty(self) -> S.Node:
        first = self.app_ty()
        if not self.at("TIMES", "HSTAR"):
            return first
        sep = self.tok.kind
        items = [first]
        while self.at(sep):
            self.advance()
            items.append(self.app_ty())
        if self.at("TIMES", "HSTAR"):
            raise ParseError("cannot mix '*' and '#*' in one tuple type", self.tok.span)
        return S.TyTuple(items, hw=(sep == "HSTAR"), span=first.span.merge(items[-1].span))

    def app_ty(self) -> S.Node:
        t = self.atom_ty()
        while True:
            if self.at("ID"):
                name = self.advance()
                args = t.items if isinstance(t, _TyArgs) else [t]
                t = S.TyName(name.text, args, span=t.span.merge(name.span))
            elif self.at("LBRACK"):
                self.advance()
                size = self.expr()
                end = self.expect("RBRACK")
                t = S.TyArray(t, size, span=t.span.merge(end.span))
            elif self.at("AT"):
                self.advance()
                time = self.prefix()
                t = S.TyTemporal(t, time, span=t.span.merge(time.span))
            elif self.at("REF", "SW"):
                name = self.advance()
                t = S.TyName(name.text, [t], span=t.span.merge(name.span))
            else:
                break
        if isinstance(t, _TyArgs):
            raise ParseError("type argument list must be followed by a type constructor", t.span)
        return t

    def atom_ty(self) -> S.Node:
        t = self.tok
        if t.kind == "TYVAR":
            self.advance()
            return S.TyVar(t.text, span=t.span)
        if t.kind == "ID":
            self.advance()
            return S.TyName(t.text, [], span=t.span)
        if t.kind in ("LBRACE", "HLBRACE"):
            self.advance()

            def one():
                lab = self.label()
                self.expect("COLON")
                return (lab, self.ty())
            flds = self.comma_list("RBRACE", one)
            end = self.expect("RBRACE")
            return S.TyRecord(flds, hw=(t.kind == "HLBRACE"), span=t.span.merge(end.span))
        if t.kind == "LPAREN":
            self.advance()
            first = self.ty()
            if self.at("COMMA"):
                items = [first]
                while self.at("COMMA"):
                    self.advance()
                    items.append(self.ty())
                end = self.expect("RPAREN")
                return _TyArgs(items, span=t.span.merge(end.span))
            self.expect("RPAREN")
            return first
        self.fail({"TYVAR", "ID", "LBRACE", "HLBRACE", "LPAREN"})


class _TyArgs(S.Node):
    def __init__(self, items, span):
        super().__init__(span=span)
        self.items = items


def parse(tokens: list[Token]) -> S.Node:
    return Parser(tokens).program()


def parse_source(source: str, origin: str = "<input>") -> S.Node:
    return desugar(parse(tokenize(source, origin)))


def parse_declarations(source: str, origin: str = "<input>") -> list:
    return [desugar(d) for d in Parser(tokenize(source, origin)).declarations_only()]


def parse_type(source: str) -> S.Node:
    p = Parser(tokenize(source))
    t = p.ty()
    p.expect("EOF")
    return desugar(t)


# ---------------------------------------------------------------- desugaring

def _numbered(items) -> list:
    return [(str(i + 1), x) for i, x in enumerate(items)]


def desugar(node):
    """Rewrite derived forms into core forms; the identity on core trees."""
    if isinstance(node, list):
        return [desugar(x) for x in node]
    if isinstance(node, tuple):
        return tuple(desugar(x) for x in node)
    if not isinstance(node, S.Node):
        return node
    sp = node.span
    if isinstance(node, S.TupleExpr):
        return S.RecordExpr(desugar(_numbered(node.items)), span=sp)
    if isinstance(node, S.HwTupleExpr):
        return S.HwRecordExpr(desugar(_numbered(node.items)), span=sp)
    if isinstance(node, S.UnitExpr):
        return S.RecordExpr([], span=sp)
    if isinstance(node, S.If) and node.orelse is None:
        return S.If(desugar(node.cond), desugar(node.then), S.RecordExpr([], span=sp), span=sp)
    if isinstance(node, S.AndAlso):
        return S.If(desugar(node.left), desugar(node.right), S.IntLit(0, span=sp), span=sp)
    if isinstance(node, S.OrElse):
        return S.If(desugar(node.left), S.IntLit(1, span=sp), desugar(node.right), span=sp)
    if isinstance(node, S.NotExpr):
        return S.If(desugar(node.operand), S.IntLit(0, span=sp), S.IntLit(1, span=sp), span=sp)
    if isinstance(node, S.Collapse):
        op = {"&&": "&", "||": "|", "^^": "^"}[node.op]
        left = S.UnOp("|->", desugar(node.left), span=node.left.span)
        right = S.UnOp("|->", desugar(node.right), span=node.right.span)
        return S.BinOp(op, left, right, span=sp)
    if isinstance(node, S.PTuple):
        return S.PRecord(desugar(_numbered(node.items)), hw=node.hw, span=sp)
    if isinstance(node, S.TyTuple):
        return S.TyRecord(desugar(_numbered(node.items)), hw=node.hw, span=sp)
    kwargs = {}
    for f in fields(node):
        if f.name in ("span", "ty", "info"):
            continue
        kwargs[f.name] = desugar(getattr(node, f.name))
    out = type(node)(**kwargs, span=sp)
    out.ty = node.ty
    if isinstance(node, S.DatatypeDec):
        out.info = node.info
    return out
