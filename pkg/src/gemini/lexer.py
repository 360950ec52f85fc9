"""Tokenizer: longest match wins, ties go to the pattern listed first."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from .errors import LexError, Span

INT_MIN = -(2 ** 31)
INT_MAX = 2 ** 31 - 1

KEYWORDS = [
    "let", "in", "end", "val", "fun", "type", "sdatatype", "hdatatype", "module",
    "of", "if", "then", "else", "case", "andalso", "orelse", "not", "ref", "sw",
    "unsw", "nil", "gen",
]

# (kind, literal) for fixed operator/punctuation lexemes.
SYMBOLS = [
    (">>>", "SRA"), (">>", "SRL"), ("<<", "SLL"), (">=", "GE"), ("<=", "LE"), ("<>", "NE"),
    ("<:", "LPARAM"), ("<", "LT"), (">", "GT"), ("=>", "DARROW"), ("=", "EQ"),
    ("->", "ARROW"), ("-.", "RSUB"), ("-", "MINUS"), ("+.", "RADD"), ("+", "PLUS"),
    ("*.", "RMUL"), ("*", "TIMES"), ("/.", "RDIV"), ("/", "DIV"), ("%", "MOD"), ("~", "TILDE"),
    ("&->", "ANDRED"), ("&&", "LAND"), ("&", "AMP"),
    ("|->", "ORRED"), ("||", "LOR"), ("|:", "BAR"), ("|", "PIPE"),
    ("^->", "XORRED"), ("^^", "LXOR"), ("^", "CARET"), ("!", "BANG"),
    ("::", "CONS"), (":=", "ASSIGN"), (":]", "RIDX"), (":>", "RPARAM"), (":", "COLON"),
    ("$", "DOLLAR"), ("#[", "HLBRACK"), ("#{", "HLBRACE"), ("#(", "HLPAREN"), ("#*", "HSTAR"),
    ("#", "HASH"), ("[:", "LIDX"), ("[", "LBRACK"), ("]", "RBRACK"), ("{", "LBRACE"),
    ("}", "RBRACE"), ("(", "LPAREN"), (")", "RPAREN"), (",", "COMMA"), (";", "SEMI"),
    (".", "DOT"), ("@", "AT"), ("'u:", "UARR"), ("'s:", "SARR"), ("'r:", "RARR"),
]

PUNCTUATION = {
    "LPAREN", "RPAREN", "LBRACK", "RBRACK", "LBRACE", "RBRACE", "COMMA", "SEMI", "COLON",
    "DOT", "DARROW", "BAR", "LIDX", "RIDX", "LPARAM", "RPARAM", "HLBRACK", "HLBRACE",
    "HLPAREN", "HASH",
}

_DEC = r"[0-9]+"
_EXP = r"(?:[eE]~?[0-9]+)"

# Ordered pattern table: (kind, token class, regex).
PATTERNS: list[tuple[str, str, re.Pattern]] = []
for _kw in KEYWORDS:
    PATTERNS.append((_kw.upper(), "keyword", re.compile(re.escape(_kw))))
PATTERNS += [
    ("REAL", "real-lit", re.compile(rf"~?(?:{_DEC}\.[0-9]*{_EXP}?|\.{_DEC}{_EXP}?|{_DEC}{_EXP})")),
    ("INT", "int-lit", re.compile(r"#'[A-Za-z]:[0-9A-Za-z]*")),
    ("INT", "int-lit", re.compile(rf"~?{_DEC}")),
    ("BIT", "bit-lit", re.compile(r"'b:[0-9][0-9A-Za-z]*")),
    ("QID", "identifier", re.compile(r"[A-Za-z_][A-Za-z0-9_]*\.[A-Za-z_][A-Za-z0-9_]*")),
    ("ID", "identifier", re.compile(r"[A-Za-z_][A-Za-z0-9_]*")),
    ("TYVAR", "identifier", re.compile(r"'[A-Za-z_][A-Za-z0-9_]*")),
]
for _lit, _kind in SYMBOLS:
    PATTERNS.append((_kind, "punctuation" if _kind in PUNCTUATION else "operator",
                     re.compile(re.escape(_lit))))

_BASES = {"b": 2, "o": 8, "x": 16, "h": 16}
_ESCAPES = {"\\": "\\", "'": "'", '"': '"', "a": "\a", "b": "\b", "e": "\x1b",
            "f": "\f", "n": "\n", "r": "\r", "t": "\t", "0": "\0"}
_HEX = set("0123456789abcdefABCDEF")


@dataclass(frozen=True)
class Token:
    cls: str
    kind: str
    text: str
    value: Any
    span: Span

    def dump(self) -> str:
        return f'{self.kind} "{self.text}" @{self.span.line}:{self.span.col}'


@dataclass
class LexState:
    comment_depth: int = 0
    in_string: bool = False


def decode_integer(lexeme: str) -> int:
    """Base-10 value of an integer literal in any supported base."""
    if lexeme.startswith("#'"):
        base = _BASES.get(lexeme[2].lower()) if len(lexeme) > 3 and lexeme[3] == ":" else None
        digits = lexeme[4:]
        if base is None:
            raise LexError(f"unknown integer base prefix in {lexeme!r}")
        if not digits:
            raise LexError(f"integer literal {lexeme!r} has no digits")
        value = 0
        for ch in digits:
            d = int(ch, 36) if ch.isalnum() else 99
            if d >= base:
                raise LexError(f"digit {ch!r} is invalid for base {base} in {lexeme!r}")
            value = value * base + d
    else:
        negative = lexeme.startswith("~")
        body = lexeme[1:] if negative else lexeme
        if not body.isdigit():
            raise LexError(f"malformed integer literal {lexeme!r}")
        value = -int(body) if negative else int(body)
    if not INT_MIN <= value <= INT_MAX:
        raise LexError(f"integer literal {lexeme!r} is outside the 32-bit range")
    return value


def decode_real(lexeme: str) -> float:
    return float(lexeme.replace("~", "-"))


class _Cursor:
    def __init__(self, source: str, origin: str):
        self.source = source
        self.origin = origin
        self.line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self.line_starts.append(i + 1)

    def span(self, start: int, end: int) -> Span:
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= start:
                lo = mid
            else:
                hi = mid - 1
        return Span(start, end, lo + 1, start - self.line_starts[lo] + 1, self.origin)


def _skip_comment(src: str, pos: int, cur: _Cursor, state: LexState) -> int:
    start = pos
    state.comment_depth = 0
    while pos < len(src):
        if src.startswith("(*", pos):
            state.comment_depth += 1
            pos += 2
        elif src.startswith("*)", pos):
            state.comment_depth -= 1
            pos += 2
            if state.comment_depth == 0:
                return pos
        else:
            pos += 1
    raise LexError("unterminated comment at end of file", cur.span(start, len(src)))


def _scan_string(src: str, pos: int, cur: _Cursor, state: LexState) -> tuple[int, str]:
    start = pos
    state.in_string = True
    pos += 1
    out = []
    while pos < len(src):
        ch = src[pos]
        if ch == '"':
            state.in_string = False
            return pos + 1, "".join(out)
        if ch == "\n":
            break
        if ch == "\\":
            nxt = src[pos + 1: pos + 3]
            if len(nxt) == 2 and nxt[0] in _HEX and nxt[1] in _HEX:
                out.append(chr(int(nxt, 16)))
                pos += 3
                continue
            if nxt[:1] in _ESCAPES:
                out.append(_ESCAPES[nxt[0]])
                pos += 2
                continue
            raise LexError(f"invalid escape sequence \\{nxt[:1]}", cur.span(pos, pos + 2))
        out.append(ch)
        pos += 1
    raise LexError("unterminated string literal", cur.span(start, pos))


def _longest(src: str, pos: int) -> tuple[str, str, int] | None:
    best = None
    for kind, cls, rx in PATTERNS:
        m = rx.match(src, pos)
        if m and m.end() > pos and (best is None or m.end() > best[2]):
            best = (kind, cls, m.end())
    return best


def tokenize(source: str, origin: str = "<input>") -> list[Token]:
    cur = _Cursor(source, origin)
    state = LexState()
    tokens: list[Token] = []
    pos, n = 0, len(source)
    while pos < n:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue
        if source.startswith("(*", pos):
            pos = _skip_comment(source, pos, cur, state)
            continue
        if ch == '"':
            end, text = _scan_string(source, pos, cur, state)
            tokens.append(Token("string-lit", "STRING", source[pos:end], text, cur.span(pos, end)))
            pos = end
            continue
        best = _longest(source, pos)
        if best is None:
            raise LexError(f"illegal character {ch!r}", cur.span(pos, pos + 1))
        kind, cls, end = best
        text = source[pos:end]
        span = cur.span(pos, end)
        value: Any = text
        try:
            if kind == "INT":
                value = decode_integer(text)
            elif kind == "REAL":
                value = decode_real(text)
        except LexError as exc:
            raise LexError(exc.message, span) from None
        if kind == "BIT":
            if text not in ("'b:0", "'b:1"):
                raise LexError(f"bit literal must be 'b:0 or 'b:1, got {text!r}", span)
            value = int(text[-1])
        tokens.append(Token(cls, kind, text, value, span))
        pos = end
    tokens.append(Token("eof", "EOF", "", None, cur.span(n, n)))
    return tokens
