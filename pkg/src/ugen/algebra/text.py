"""Text form of polynomials.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | IDENT | 'i' | '(' expr ')'

``i`` is the imaginary unit.  The printer emits every coefficient as
``(re+im*i)`` using the shortest round-tripping float repr, so
``parse_poly(format_poly(p), p.ring) == p`` holds bit for bit.
"""

from __future__ import annotations

import re

from ugen.algebra.poly import MPoly, Ring

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*^()]))"
)


class ParseError(ValueError):
    pass


def _fmt_float(x: float) -> str:
    return repr(float(x))


def format_coefficient(c: complex) -> str:
    re_, im = c.real, c.imag
    sign = "-" if (im < 0 or (im == 0 and str(im).startswith("-"))) else "+"
    return f"({_fmt_float(re_)}{sign}{_fmt_float(abs(im))}*i)"


def format_poly(p: MPoly) -> str:
    if p.is_zero():
        return "(0.0+0.0*i)"
    names = p.ring.variables
    parts = []
    for e, c in p.terms.items():
        factors = [format_coefficient(c)]
        for name, k in zip(names, e):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        parts.append("*".join(factors))
    return " + ".join(parts)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
    return tokens


class _Parser:
    def __init__(self, text: str, ring: Ring):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.ring = ring

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ParseError(f"expected {value or 'token'}, got {tok[1]!r}")
        self.pos += 1
        return tok

    def parse(self) -> MPoly:
        p = self.expr()
        if self.pos != len(self.tokens):
            raise ParseError(f"trailing input at token {self.peek()[1]!r}")
        return p

    def expr(self) -> MPoly:
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> MPoly:
        p = self.unary()
        while self.peek()[1] == "*":
            self.take()
            p = p * self.unary()
        return p

    def unary(self) -> MPoly:
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> MPoly:
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            kind, value = self.take()
            if kind != "num" or not value.isdigit():
                raise ParseError(f"exponent must be a non-negative integer, got {value!r}")
            base = base ** int(value)
        return base

    def atom(self) -> MPoly:
        kind, value = self.take()
        if kind == "num":
            return MPoly.constant(self.ring, float(value))
        if kind == "id":
            if value == "i":
                return MPoly.constant(self.ring, 1j)
            try:
                return MPoly.variable(self.ring, value)
            except KeyError:
                raise ParseError(f"unknown variable {value!r}") from None
        if value == "(":
            p = self.expr()
            self.take(")")
            return p
        raise ParseError(f"unexpected token {value!r}")


def parse_poly(text: str, ring: Ring) -> MPoly:
    return _Parser(text, ring).parse()
