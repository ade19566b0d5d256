"""Expression parser: grammar, positioned errors and print/parse round trips."""

import random
from fractions import Fraction

import pytest

from libs.errors import ExprSyntaxError, UninstantiatedParameterError, UnknownIdentifierError
from libs.exactalg import Poly
from libs.expr import ParseContext, format_poly, parse_poly, tokenize

CTX3 = ParseContext.default(3)


def test_half_square():
    p = parse_poly("x1^2/2", CTX3)
    assert dict(p.terms) == {(2, 0, 0): Fraction(1, 2)}


def test_parameter_exponent_is_substituted():
    ctx = ParseContext.default(2, {"k": 3})
    x1, x2 = Poly.variable(2, 0), Poly.variable(2, 1)
    assert parse_poly("x1^k + x2^k", ctx) == x1 ** 3 + x2 ** 3


def test_unbound_parameter_exponent():
    ctx = ParseContext.default(2, {"k": None})
    with pytest.raises(UninstantiatedParameterError, match="parameter k requires a value"):
        parse_poly("x1^k", ctx)


def test_trailing_operator_reports_end_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_poly("x1 + ", CTX3)
    assert info.value.offset == 5


@pytest.mark.parametrize("text, offset", [
    ("2x1", 1),
    ("x1 x2", 3),
    ("x1(x2)", 2),
    ("x1^-1", 3),
    ("x1^x2", 3),
    ("1/x1", 2),
    ("1/0", 2),
    ("x1 $ 2", 3),
    ("(x1 + x2", 8),
])
def test_malformed_inputs_are_positioned(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_poly(text, CTX3)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_poly("x1 + y7", CTX3)
    assert info.value.offset == 5


def test_named_coordinates_and_precedence():
    ctx = ParseContext(["u", "v"])
    u, v = Poly.variable(2, 0), Poly.variable(2, 1)
    assert parse_poly("-u^2*v + 3/4*(u - v)", ctx) == -(u ** 2) * v + (u - v) * Fraction(3, 4)
    assert parse_poly("2^3", ctx) == Poly.constant(2, 8)
    assert parse_poly("- -u", ctx) == u


def test_context_rejects_overlapping_names():
    with pytest.raises(ValueError):
        ParseContext(["x1"], {"x1": 2})


def test_tokenizer_offsets():
    tokens = tokenize("x1 + 12")
    assert [(t.kind, t.offset) for t in tokens] == [("ident", 0), ("op", 3), ("int", 5), ("end", 7)]


def _random_expression(rng, depth=0):
    if depth > 2 or rng.random() < 0.3:
        choice = rng.random()
        if choice < 0.5:
            return f"x{rng.randint(1, 3)}"
        if choice < 0.8:
            return str(rng.randint(0, 9))
        return f"{rng.randint(1, 9)}/{rng.randint(1, 9)}"
    left = _random_expression(rng, depth + 1)
    right = _random_expression(rng, depth + 1)
    op = rng.choice(["+", "-", "*", "^"])
    if op == "^":
        return f"({left})^{rng.randint(0, 3)}"
    return f"({left}) {op} ({right})"


FIXTURE_FIELDS = ["1", "0", "x1^2/2", "x2^2/2", "x1", "x1^2", "x1^3", "x1^3 + x2^3"]


def test_round_trip_corpus():
    rng = random.Random(2024)
    corpus = [_random_expression(rng) for _ in range(200 - len(FIXTURE_FIELDS))] + FIXTURE_FIELDS
    assert len(corpus) == 200
    for text in corpus:
        poly = parse_poly(text, CTX3)
        printed = format_poly(poly, CTX3)
        assert parse_poly(printed, CTX3) == poly, text
        assert format_poly(parse_poly(printed, CTX3), CTX3) == printed
