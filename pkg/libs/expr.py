#   @file expr.py
#   @brief Recursive-descent parser for polynomial expressions in the manifest syntax.
#   @date 19-Oct-2026
#
#   Grammar (whitespace between tokens is ignored):
#
#       expr    := term (('+' | '-') term)*
#       term    := unary (('*' | '/') unary)*
#       unary   := ('+' | '-') unary | power
#       power   := atom ('^' exponent)?
#       exponent:= INTEGER | PARAMETER | '(' INTEGER ')'
#       atom    := INTEGER | IDENT | '(' expr ')'
#
#   Division is only allowed by a nonzero constant. Implicit multiplication
#   ("2x1", "x1 x2") is rejected.

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from libs.errors import ExprSyntaxError, UninstantiatedParameterError, UnknownIdentifierError
from libs.exactalg import Poly

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class Token:
    kind: str          # 'int', 'ident', 'op', 'end'
    text: str
    offset: int


@dataclass
class ParseContext:
    """Names visible to an expression: coordinates (in order) and integer parameters."""
    variables: Sequence[str]
    parameters: Dict[str, Optional[int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.variables:
            raise ValueError("parse context needs at least one variable")
        overlap = set(self.variables) & set(self.parameters)
        if overlap:
            raise ValueError(f"names used both as coordinates and parameters: {sorted(overlap)}")

    @classmethod
    def default(cls, n: int, parameters: Optional[Dict[str, Optional[int]]] = None) -> "ParseContext":
        return cls([f"x{i + 1}" for i in range(n)], dict(parameters or {}))

    @property
    def free_parameters(self) -> List[str]:
        return [name for name, value in self.parameters.items() if value is None]


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            offset = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[offset]!r}", offset, text)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    for prev, cur in zip(tokens, tokens[1:]):
        if prev.kind in ("int", "ident") and cur.kind in ("int", "ident"):
            raise ExprSyntaxError("implicit multiplication is not allowed", cur.offset, text)
        if prev.kind in ("int", "ident") and cur.text == "(":
            raise ExprSyntaxError("implicit multiplication is not allowed", cur.offset, text)
        if prev.text == ")" and cur.kind in ("int", "ident"):
            raise ExprSyntaxError("implicit multiplication is not allowed", cur.offset, text)
    return tokens


class _Parser:

    def __init__(self, text: str, context: ParseContext):
        self.text = text
        self.context = context
        self.tokens = tokenize(text)
        self.pos = 0
        self.nvars = len(context.variables)
        self.params = tuple(context.free_parameters)

    # ---------- Helpers ----------
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ExprSyntaxError:
        token = token or self.peek()
        if token.kind == "end":
            return ExprSyntaxError("unexpected end of input", token.offset, self.text)
        return ExprSyntaxError(message, token.offset, self.text)

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token.text != text or token.kind != "op":
            raise self.error(f"expected {text!r}, found {token.text!r}")
        return self.advance()

    def constant(self, value) -> Poly:
        return Poly.constant(self.nvars, value, self.params)

    # ---------- Grammar ----------
    def parse(self) -> Poly:
        result = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected token {self.peek().text!r}")
        return result

    def expr(self) -> Poly:
        result = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance()
            rhs = self.term()
            result = result + rhs if op.text == "+" else result - rhs
        return result

    def term(self) -> Poly:
        result = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance()
            divisor_token = self.peek()
            rhs = self.unary()
            if op.text == "*":
                result = result * rhs
            else:
                if not rhs.is_constant() or rhs.uses_parameters():
                    raise ExprSyntaxError("division by a non-constant expression",
                                          divisor_token.offset, self.text)
                value = rhs.constant_term()
                if value == 0:
                    raise ExprSyntaxError("division by zero", divisor_token.offset, self.text)
                result = result * (1 / value)
        return result

    def unary(self) -> Poly:
        token = self.peek()
        if token.kind == "op" and token.text in "+-":
            self.advance()
            operand = self.unary()
            return -operand if token.text == "-" else operand
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return base ** self.exponent()
        return base

    def exponent(self) -> int:
        token = self.peek()
        if token.kind == "int":
            self.advance()
            return int(token.text)
        if token.kind == "ident":
            if token.text in self.context.parameters:
                value = self.context.parameters[token.text]
                if value is None:
                    raise UninstantiatedParameterError(
                        f"parameter {token.text} requires a value (used as exponent at offset {token.offset})")
                if value < 0:
                    raise ExprSyntaxError("exponent must be a nonnegative integer", token.offset, self.text)
                self.advance()
                return int(value)
            if token.text in self.context.variables:
                raise ExprSyntaxError("exponent must be a nonnegative integer", token.offset, self.text)
            raise UnknownIdentifierError(f"unknown identifier {token.text!r}", token.offset, self.text)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.peek()
            if inner.kind != "int":
                raise self.error("exponent must be a nonnegative integer", inner)
            self.advance()
            self.expect(")")
            return int(inner.text)
        raise self.error("exponent must be a nonnegative integer", token)

    def atom(self) -> Poly:
        token = self.peek()
        if token.kind == "int":
            self.advance()
            return self.constant(Fraction(int(token.text)))
        if token.kind == "ident":
            self.advance()
            if token.text in self.context.variables:
                return Poly.variable(self.nvars, list(self.context.variables).index(token.text), self.params)
            if token.text in self.context.parameters:
                value = self.context.parameters[token.text]
                if value is None:
                    return Poly.variable(self.nvars, self.nvars + self.params.index(token.text), self.params)
                return self.constant(value)
            raise UnknownIdentifierError(f"unknown identifier {token.text!r}", token.offset, self.text)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error(f"unexpected token {token.text!r}")


def parse_poly(text: str, context: ParseContext) -> Poly:
    """Parse one polynomial expression into canonical form."""
    return _Parser(text, context).parse()


def format_poly(poly: Poly, context: Optional[ParseContext] = None) -> str:
    """Pretty-print in the same syntax parse_poly reads."""
    names = list(context.variables) if context is not None else None
    return poly.format(names)
