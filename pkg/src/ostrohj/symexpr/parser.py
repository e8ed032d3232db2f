"""Recursive-descent parser for the expression DSL.

Grammar (whitespace insignificant)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := base ("^" INTEGER)?
    base   := RATIONAL | IDENT | "(" expr ")" | "-" base
    RATIONAL := INTEGER ("/" INTEGER)?
    IDENT  := letter (letter|digit|"_")* "'"{0,2}

Note that unary minus binds tighter than ``^`` here, so ``-x^2`` is
``(-x)^2``; the renderer never emits that ambiguity.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from ..errors import (DivisionBySymbol, ExprSyntaxError, NonIntegerExponent,
                      UnknownIdentifier)
from .expr import Const, Expr, IntPow, Product, Sum, Sym
from .symbols import Kind, Symbol

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?)|(?P<id>[A-Za-z][A-Za-z0-9_]*'*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:]
            if rest.strip():
                raise ExprSyntaxError(f"unexpected character {rest.strip()[0]!r}",
                                      position=pos + len(rest) - len(rest.lstrip()))
            break
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, symtab, allow_symbolic_division, max_primes):
        self.tokens = _tokenize(text)
        self.i = 0
        self.symtab = symtab
        self.allow_div = allow_symbolic_division
        self.max_primes = max_primes

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", pos, [repr(op)])

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos, ["operator", "end of input"])
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                terms.append(t if val == "+" else _negate(t))
            else:
                break
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        factors = [self.factor()]
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                f = self.factor()
                if val == "/":
                    f = self._reciprocal(f, pos)
                factors.append(f)
            else:
                break
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def _reciprocal(self, f: Expr, pos) -> Expr:
        syms = f.symbols()
        if f.is_zero():
            raise ExprSyntaxError("division by zero", pos)
        if isinstance(f, Const):
            return Const(1 / f.value)
        if not self.allow_div and any(s.kind != Kind.PARAM for s in syms):
            raise DivisionBySymbol(f"division by a dynamical expression at position {pos}")
        return IntPow(f, -1)

    def factor(self) -> Expr:
        b = self.base()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or "." in val:
                raise NonIntegerExponent(f"exponent must be an integer literal at position {pos}")
            n = int(val)
            if n == 0:
                return Const(Fraction(1))
            return b if n == 1 else IntPow(b, n)
        return b

    def base(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            if "." in val:
                raise ExprSyntaxError("decimal literals are not allowed in expressions", pos,
                                      ["INTEGER", "RATIONAL"])
            value = Fraction(int(val))
            k2, v2, _ = self.peek()
            k3 = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else ("end", "", 0)
            if k2 == "op" and v2 == "/" and k3[0] == "num" and "." not in k3[1]:
                self.take()
                _, den, dpos = self.take()
                if int(den) == 0:
                    raise ExprSyntaxError("zero denominator", dpos)
                value = value / int(den)
            return Const(value)
        if kind == "id":
            primes = len(val) - len(val.rstrip("'"))
            if primes > self.max_primes:
                raise ExprSyntaxError(f"too many primes in {val!r}", pos, ["at most two \"'\""])
            sym = self.symtab.get(val)
            if sym is None:
                raise UnknownIdentifier(val)
            return Sym(sym)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "op" and val == "-":
            return _negate(self.base())
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", pos,
                              ["INTEGER", "RATIONAL", "IDENT", "'('", "'-'"])


def _negate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    return Product((Const(Fraction(-1)), e))


def parse(text: str, symtab: Mapping[str, Symbol], *, allow_symbolic_division: bool = False,
          max_primes: int = 2) -> Expr:
    """Parse ``text`` against ``symtab`` (identifier text -> Symbol)."""
    return _Parser(text, symtab, allow_symbolic_division, max_primes).parse()


def parse_rational(text: str) -> Fraction:
    """``3``, ``-1/2`` or a decimal such as ``0.5`` as an exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ExprSyntaxError(f"not a rational number: {text!r}") from None
