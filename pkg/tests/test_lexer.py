import re

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gemini.errors import LexError
from gemini.lexer import INT_MAX, INT_MIN, SYMBOLS, decode_integer, tokenize


def kinds(src):
    return [t.kind for t in tokenize(src)][:-1]


def test_greater_equal_is_one_token():
    assert kinds(">=") == ["GE"]


def test_keyword_wins_over_identifier():
    toks = tokenize("if")
    assert (toks[0].kind, toks[0].cls) == ("IF", "keyword")


def test_keyword_prefix_is_still_an_identifier():
    assert kinds("iffy ending") == ["ID", "ID"]


def test_unterminated_nested_comment():
    with pytest.raises(LexError, match="unterminated comment"):
        tokenize("(* (* x *)")


def test_nested_comments_are_skipped():
    assert [t.value for t in tokenize("(* a (* b *) c *) 1")][:-1] == [1]


def test_unterminated_string():
    with pytest.raises(LexError, match="unterminated string"):
        tokenize('"abc')


def test_illegal_character_reports_position():
    with pytest.raises(LexError) as exc:
        tokenize("x = `")
    assert (exc.value.span.line, exc.value.span.col) == (1, 5)


@pytest.mark.parametrize("lexeme, value", [
    ("#'h:beef", 48879),
    ("#'x:beef", 48879),
    ("0", 0),
    ("#'b:1010", 10),
    ("#'o:17", 15),
    ("~12", -12),
    ("~2147483648", INT_MIN),
])
def test_decode_integer_examples(lexeme, value):
    assert decode_integer(lexeme) == value


@pytest.mark.parametrize("lexeme", ["#'b:2", "#'o:8", "#'h:g", "#'q:1", "2147483648", "#'x:"])
def test_decode_integer_rejects(lexeme):
    with pytest.raises(LexError):
        decode_integer(lexeme)


_PREFIX = {2: "#'b:", 8: "#'o:", 16: "#'x:"}


@settings(max_examples=1000)
@given(st.sampled_from([2, 8, 10, 16]), st.integers(0, INT_MAX))
def test_decode_integer_matches_python_int(base, n):
    digits = {2: "b", 8: "o", 10: "d", 16: "x"}[base]
    body = format(n, digits)
    lexeme = body if base == 10 else _PREFIX[base] + body
    assert decode_integer(lexeme) == int(body, base) == n


def test_string_escapes():
    [tok, _] = tokenize(r'"a\tb\\c\"d\41"')
    assert tok.value == 'a\tb\\c"dA'


def test_hex_escape_takes_exactly_two_digits():
    [tok, _] = tokenize(r'"\414"')
    assert tok.value == "A4"


def test_shift_operators_longest_match():
    assert kinds("x>>>y>>z>=w>v") == ["ID", "SRA", "ID", "SRL", "ID", "GE", "ID", "GT", "ID"]


_OPERATORS = [lit for lit, _ in SYMBOLS]


@given(st.sampled_from(_OPERATORS))
def test_every_symbol_lexes_as_itself(lit):
    toks = tokenize(lit)
    assert len(toks) == 2 and toks[0].text == lit


@given(st.sampled_from(_OPERATORS), st.sampled_from(_OPERATORS))
def test_adjacent_operators_take_the_longest_prefix(a, b):
    src = a + b
    assume("(*" not in src and "*)" not in src)
    first = tokenize(src)[0].text
    longest = max((lit for lit in _OPERATORS if src.startswith(lit)), key=len)
    assert first == longest


_PIECES = st.sampled_from([
    "x", "foo_1", "42", "#'h:ff", "'b:1", "1.5", '"s"', "if", "then", ">=", "::", "#[",
    "(* c *)", "(", ")", "'a", "List.map",
])


@given(st.lists(st.tuples(_PIECES, st.sampled_from([" ", "\n", "  ", "\t"])), max_size=20))
def test_spans_increase_and_cover_the_source(parts):
    src = "".join(p + sep for p, sep in parts)
    toks = tokenize(src)
    pos = 0
    for t in toks:
        assert t.span.start >= pos
        gap = re.sub(r"\(\*.*?\*\)", "", src[pos:t.span.start])
        assert gap.strip() == ""
        assert src[t.span.start:t.span.end] == t.text
        pos = t.span.end
    assert pos == len(src) or src[pos:].strip() == ""


def test_line_and_column():
    toks = tokenize("a\n  bb")
    assert (toks[1].span.line, toks[1].span.col) == (2, 3)


def test_dump_format():
    assert tokenize(">= x")[0].dump() == 'GE ">=" @1:1'


def test_nil_and_type_variables():
    assert kinds("nil 'a") == ["NIL", "TYVAR"]
