"""Expression grammar: tokenizer, recursive-descent parser, and ParamTable.

Grammar (UTF-8 text):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' exponent)?          # right side must fold to an integer
    exponent:= '-' exponent | primary
    primary := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Numbers are decimal integers (rationals arise from '/').  Identifiers match
[a-zA-Z][a-zA-Z0-9']* and resolve to x, t, the jet symbols u, p1..p20 (with
aliases p = p1, q = p2), a function name (exp, log, sin, cos, sinh, cosh),
or a declared parameter.  Anything else is an unknown identifier, reported
with its byte offset.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Union

from .expr import (Expr, ExprError, RESERVED_NAMES, as_rational,
                   _INPUT_FUNCTIONS, _JET_NAMES, RatLike)

_ALIASES = {"p": "p1", "q": "p2"}


def _coerce_rational(value):
    """Exact rational from int/Fraction or a string like '2/3'."""
    if isinstance(value, str):
        from fractions import Fraction
        value = Fraction(value)
    return as_rational(value)


class ParseError(ExprError):
    """Syntax or resolution error, carrying the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class ParamTable:
    """Registered parameter symbols, each free or bound to an exact rational."""

    def __init__(self, bindings: Optional[Mapping[str, Optional[RatLike]]] = None):
        self._entries: dict = {}
        if bindings:
            for name, value in bindings.items():
                self.register(name, value)

    def register(self, name: str, value: Optional[RatLike] = None) -> None:
        if name in RESERVED_NAMES:
            raise ExprError(f"{name!r} is a reserved symbol, not a parameter")
        if (not name or not name[0].isalpha()
                or not all(c.isalnum() or c == "'" for c in name)):
            raise ExprError(f"invalid parameter name {name!r}")
        self._entries[name] = None if value is None else _coerce_rational(value)

    def bind(self, name: str, value: RatLike) -> None:
        if name not in self._entries:
            raise ExprError(f"parameter {name!r} is not registered")
        self._entries[name] = _coerce_rational(value)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> list:
        return sorted(self._entries)

    def binding(self, name: str):
        return self._entries[name]

    def bound_items(self) -> dict:
        return {k: v for k, v in self._entries.items() if v is not None}

    def apply(self, expression: Expr) -> Expr:
        """Substitute every bound parameter; idempotent by construction."""
        bound = self.bound_items()
        if not bound:
            return expression
        return expression.substitute(bound)

    def copy(self) -> "ParamTable":
        table = ParamTable()
        table._entries = dict(self._entries)
        return table

    def as_dict(self) -> dict:
        return {k: (None if v is None else str(v)) for k, v in sorted(self._entries.items())}

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"ParamTable({self.as_dict()})"


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind
        self.text = text
        self.offset = offset


def _tokenize(text: str) -> list:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("number", text[i:j], i))
            i = j
            continue
        if ch.isalpha():
            # Underscores are consumed here but rejected at resolution, so
            # something like u_t reads as one unknown identifier.
            j = i
            while j < n and (text[j].isalnum() or text[j] in "'_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, params):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.params = params

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                             tok.offset)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.offset)
        return e

    def expr(self) -> Expr:
        out = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> Expr:
        out = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.advance()
            rhs = self.unary()
            if op.kind == "*":
                out = out * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", op.offset)
                try:
                    out = out / rhs
                except ExprError:
                    raise ParseError(
                        "division is only supported by a single monomial", op.offset)
        return out

    def unary(self) -> Expr:
        if self.peek().kind == "-":
            self.advance()
            return -self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek().kind != "^":
            return base
        op = self.advance()
        exponent = self.exponent()
        if not exponent.is_rational() or exponent.as_rational().denominator != 1:
            raise ParseError("exponent must be an integer constant", op.offset)
        n = int(exponent.as_rational())
        try:
            return base ** n
        except ExprError:
            raise ParseError(
                "negative powers require a single-monomial base", op.offset)

    def exponent(self) -> Expr:
        if self.peek().kind == "-":
            self.advance()
            return -self.exponent()
        return self.primary()

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Expr.rational(int(tok.text))
        if tok.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in _INPUT_FUNCTIONS:
                if self.peek().kind != "(":
                    raise ParseError(f"function {name!r} requires parentheses",
                                     self.peek().offset)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Expr.apply(name, arg)
            name = _ALIASES.get(name, name)
            if name in ("t", "x") or name in _JET_NAMES:
                return Expr.symbol(name)
            if self.params is not None and name in self.params:
                return Expr.symbol(name)
            raise UnknownIdentifierError(tok.text, tok.offset)
        raise ParseError(f"expected expression, found {tok.text or 'end of input'!r}",
                         tok.offset)


def parse(text: str, params: Union[ParamTable, Iterable[str], None] = None) -> Expr:
    """Parse an expression string into canonical form.

    `params` declares the allowed parameter names (a ParamTable or any
    iterable of names); undeclared identifiers raise UnknownIdentifierError.
    """
    if params is not None and not isinstance(params, ParamTable):
        table = ParamTable()
        for name in params:
            table.register(name)
        params = table
    return _Parser(text, params).parse()
