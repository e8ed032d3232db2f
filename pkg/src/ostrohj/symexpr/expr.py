"""Expression trees, canonical form, and the elementary operations on them.

Trees are immutable.  Every node lazily caches its value as a
:class:`~ostrohj.symexpr.poly.RatFunc`; ``normalize`` rebuilds the tree from
that value in a fixed canonical layout, so two expressions are equal as
functions exactly when their normal forms compare equal (up to the limits of
the denominator GCD pass, which only matters for rational functions).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Tuple

from ..errors import (CyclicSubstitution, DivisionByZero, MissingBinding,
                      UnsupportedSymbol)
from .poly import Poly, RatFunc, as_ratfunc, mono_key
from .symbols import Kind, Symbol, TIME, promote


class Expr:
    """Base class of the tree nodes; supports the usual arithmetic operators."""

    @property
    def ratfunc(self) -> RatFunc:
        rf = self.__dict__.get("_rf")
        if rf is None:
            rf = self._to_ratfunc()
            object.__setattr__(self, "_rf", rf)
        return rf

    def _to_ratfunc(self) -> RatFunc:  # pragma: no cover - abstract
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, as_expr(other)))

    def __radd__(self, other):
        return Sum((as_expr(other), self))

    def __sub__(self, other):
        return Sum((self, -as_expr(other)))

    def __rsub__(self, other):
        return Sum((as_expr(other), -self))

    def __neg__(self):
        return Product((Const(Fraction(-1)), self))

    def __mul__(self, other):
        return Product((self, as_expr(other)))

    def __rmul__(self, other):
        return Product((as_expr(other), self))

    def __truediv__(self, other):
        other = as_expr(other)
        if isinstance(other, Const):
            return Product((self, Const(1 / other.value)))
        return Product((self, IntPow(other, -1)))

    def __rtruediv__(self, other):
        return as_expr(other) / self

    def __pow__(self, n: int):
        if n == 1:
            return self
        if n == 0:
            return Const(Fraction(1))
        return IntPow(self, int(n))

    def __str__(self):
        return render(self)

    def is_zero(self) -> bool:
        return self.ratfunc.is_zero()

    def symbols(self) -> set:
        return self.ratfunc.symbols()


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    def _to_ratfunc(self):
        return RatFunc.const(self.value)


@dataclass(frozen=True, eq=True)
class Sym(Expr):
    symbol: Symbol

    def _to_ratfunc(self):
        return RatFunc.symbol(self.symbol)


@dataclass(frozen=True, eq=True)
class Sum(Expr):
    children: Tuple[Expr, ...]

    def _to_ratfunc(self):
        total = RatFunc.const(0)
        for c in self.children:
            total = total + c.ratfunc
        return total


@dataclass(frozen=True, eq=True)
class Product(Expr):
    children: Tuple[Expr, ...]

    def _to_ratfunc(self):
        total = RatFunc.const(1)
        for c in self.children:
            total = total * c.ratfunc
        return total


@dataclass(frozen=True, eq=True)
class IntPow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if self.exponent == 0:
            raise ValueError("IntPow exponent must be nonzero")

    def _to_ratfunc(self):
        try:
            return self.base.ratfunc ** self.exponent
        except ZeroDivisionError as exc:
            raise DivisionByZero(str(exc)) from None


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Symbol):
        return Sym(x)
    if isinstance(x, (int, Fraction)):
        return Const(Fraction(x))
    if isinstance(x, (Poly, RatFunc)):
        return from_ratfunc(as_ratfunc(x))
    raise TypeError(f"cannot use {type(x).__name__} as an expression")


# ---------------------------------------------------------------- canonical


def _poly_to_expr(p: Poly) -> Expr:
    if p.is_zero():
        return ZERO
    terms = []
    for mono, c in p.sorted_terms():
        factors = [Sym(s) if e == 1 else IntPow(Sym(s), e) for s, e in mono]
        if not factors:
            terms.append(Const(c))
        elif c == 1:
            terms.append(factors[0] if len(factors) == 1 else Product(tuple(factors)))
        else:
            terms.append(Product((Const(c), *factors)))
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def from_ratfunc(rf: RatFunc) -> Expr:
    num = _poly_to_expr(rf.num)
    if rf.den.is_constant():
        out = num
    else:
        out = Product((num, IntPow(_poly_to_expr(rf.den), -1)))
    object.__setattr__(out, "_rf", rf)
    return out


def normalize(e) -> Expr:
    """Canonical tree of ``e``.  Idempotent."""
    return from_ratfunc(as_ratfunc(e))


def equal(a, b) -> bool:
    """Equality as rational functions (zero test of the difference)."""
    return (as_ratfunc(a) - as_ratfunc(b)).is_zero()


# ------------------------------------------------------------------- ops


def diff(e, s: Symbol) -> Expr:
    """Exact partial derivative, every other symbol held independent."""
    return from_ratfunc(as_ratfunc(e).diff(s))


def total_time_derivative(e) -> Expr:
    """d/dt along jets: q -> q' -> q'' -> q''' ...; parameters are constant."""
    rf = as_ratfunc(e)
    out = RatFunc.const(0)
    for s in sorted(rf.symbols()):
        if s.kind == Kind.PARAM:
            continue
        if s.kind == Kind.TIME:
            out = out + rf.diff(s)
            continue
        if s.derivative_order < 0:
            raise UnsupportedSymbol(f"{s} has no time-derivative promotion")
        out = out + rf.diff(s) * RatFunc.symbol(promote(s))
    return from_ratfunc(out)


def _subs_poly(p: Poly, table: Mapping[Symbol, RatFunc]) -> RatFunc:
    power_cache = {}

    def power(s, e):
        key = (s, e)
        v = power_cache.get(key)
        if v is None:
            v = table[s] ** e
            power_cache[key] = v
        return v

    poly_part = {}
    rat_parts = []
    for mono, c in p.terms.items():
        kept = []
        repl = None
        for s, e in mono:
            if s in table:
                f = power(s, e)
                repl = f if repl is None else repl * f
            else:
                kept.append((s, e))
        base = Poly._raw({tuple(kept): c})
        if repl is None:
            poly_part[tuple(kept)] = poly_part.get(tuple(kept), 0) + c
        elif repl.den.is_constant():
            rat_parts.append(RatFunc(base * repl.num))
        else:
            rat_parts.append(RatFunc(base * repl.num, repl.den))
    out = RatFunc(Poly(poly_part))
    # sum polynomial pieces first, then the (rarer) rational ones
    acc = Poly()
    for r in rat_parts:
        if r.den.is_constant():
            acc = acc + r.num
    out = out + RatFunc(acc)
    for r in rat_parts:
        if not r.den.is_constant():
            out = out + r
    return out


def substitute_rf(rf: RatFunc, table: Mapping[Symbol, RatFunc]) -> RatFunc:
    if not table or not (rf.symbols() & table.keys()):
        return rf
    num = _subs_poly(rf.num, table)
    if rf.den.is_constant():
        return num * RatFunc.const(1 / rf.den.constant_value())
    den = _subs_poly(rf.den, table)
    if den.is_zero():
        raise DivisionByZero("substitution makes a denominator vanish")
    return num / den


def substitute(e, bindings: Mapping[Symbol, object], repeat: bool = False) -> Expr:
    """Simultaneous substitution followed by normalization.

    With ``repeat=True`` the substitution is applied until no bound symbol
    remains; a binding chain that feeds back into itself raises
    :class:`CyclicSubstitution`.
    """
    table = {s: as_ratfunc(v) for s, v in bindings.items()}
    rf = as_ratfunc(e)
    if not repeat:
        return from_ratfunc(substitute_rf(rf, table))
    _check_acyclic(table)
    for _ in range(len(table) + 1):
        if not (rf.symbols() & table.keys()):
            break
        rf = substitute_rf(rf, table)
    return from_ratfunc(rf)


def _check_acyclic(table: Mapping[Symbol, RatFunc]):
    deps = {s: v.symbols() & table.keys() for s, v in table.items()}
    state = {}

    def visit(s, stack):
        st = state.get(s)
        if st == 1:
            raise CyclicSubstitution(" -> ".join(str(x) for x in stack + [s]))
        if st == 2:
            return
        state[s] = 1
        for d in deps[s]:
            visit(d, stack + [s])
        state[s] = 2

    for s in table:
        visit(s, [])


def eval_numeric(e, values: Mapping[Symbol, float]) -> float:
    rf = as_ratfunc(e)
    for s in rf.symbols():
        if s not in values:
            raise MissingBinding(s)
    try:
        return float(rf.evaluate(values))
    except ZeroDivisionError as exc:
        raise DivisionByZero(str(exc)) from None


def eval_exact(e, values: Mapping[Symbol, Fraction]) -> Fraction:
    rf = as_ratfunc(e)
    for s in rf.symbols():
        if s not in values:
            raise MissingBinding(s)
    try:
        return rf.evaluate_exact(values)
    except ZeroDivisionError as exc:
        raise DivisionByZero(str(exc)) from None


def linear_coefficient(e, s: Symbol):
    """``(c, rest)`` with ``e == c*s + rest`` if ``e`` is affine in ``s``."""
    rf = as_ratfunc(e)
    if rf.den.symbols() and s in rf.den.symbols():
        return None
    if rf.num.degree(s) > 1:
        return None
    c = RatFunc(rf.num.coefficient_of(s, 1), rf.den)
    rest = RatFunc(rf.num.coefficient_of(s, 0), rf.den)
    return c, rest


# ----------------------------------------------------------------- render


def _fmt_const(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _precedence(e: Expr) -> int:
    if isinstance(e, Sum):
        return 1
    if isinstance(e, Product):
        return 2
    if isinstance(e, Const) and (e.value < 0 or e.value.denominator != 1):
        return 2
    return 3


def _render_factor_text(e: Expr) -> str:
    s = render(e)
    return f"({s})" if _precedence(e) < 3 else s


def render(e: Expr) -> str:
    """Text form accepted back by :func:`parse`."""
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Sym):
        return e.symbol.text
    if isinstance(e, IntPow):
        base = render(e.base)
        if _precedence(e.base) < 3:
            base = f"({base})"
        if e.exponent > 0:
            return f"{base}^{e.exponent}"
        k = -e.exponent
        return f"1/{base}" if k == 1 else f"1/{base}^{k}"
    if isinstance(e, Sum):
        out = []
        for i, child in enumerate(e.children):
            text = _render_term_text(child)
            if i == 0:
                out.append(text)
            elif text.startswith("-"):
                out.append(" - " + _strip_minus(child, text))
            else:
                out.append(" + " + text)
        return "".join(out)
    if isinstance(e, Product):
        return _render_term_text(e)
    raise TypeError(type(e))


def _strip_minus(child: Expr, text: str) -> str:
    if text.startswith("-1*"):
        return text[3:]
    return text[1:]


def _render_term_text(e: Expr) -> str:
    if not isinstance(e, Product):
        if isinstance(e, Sum):
            return f"({render(e)})"
        return render(e)
    parts = []
    for k, f in enumerate(e.children):
        if isinstance(f, IntPow) and f.exponent < 0:
            b = render(f.base)
            b = f"({b})" if _precedence(f.base) < 3 else b
            if f.exponent != -1:
                b = f"{b}^{-f.exponent}"
            if not parts:
                parts.append("1")
            parts.append("/" + b)
            continue
        if k == 0 and isinstance(f, Const):
            c = f.value
            rest = len(e.children) > 1
            if c == -1 and rest:
                nxt = e.children[1]
                parts.append("-1" if isinstance(nxt, IntPow) else "-")
                continue
            parts.append(_fmt_const(c))
            continue
        text = render(f)
        if isinstance(f, Sum) or (isinstance(f, Const) and k > 0 and _precedence(f) < 3):
            text = f"({text})"
        elif isinstance(f, Product):
            text = f"({text})"
        parts.append(text)
    out = ""
    for p in parts:
        if not out or out == "-":
            out += p
        elif p.startswith("/"):
            out += p
        else:
            out += "*" + p
    return out


def render_latex(e: Expr) -> str:
    if isinstance(e, Const):
        c = e.value
        if c.denominator == 1:
            return str(c.numerator)
        sign = "-" if c < 0 else ""
        return r"%s\frac{%d}{%d}" % (sign, abs(c.numerator), c.denominator)
    if isinstance(e, Sym):
        return e.symbol.latex
    if isinstance(e, IntPow):
        base = render_latex(e.base)
        if _precedence(e.base) < 3 or isinstance(e.base, Sym) and e.base.symbol.kind == Kind.JET:
            base = r"\left(%s\right)" % base
        if e.exponent > 0:
            return f"{base}^{{{e.exponent}}}"
        inner = base if e.exponent == -1 else f"{base}^{{{-e.exponent}}}"
        return r"\frac{1}{%s}" % inner
    if isinstance(e, Sum):
        out = []
        for i, child in enumerate(e.children):
            text = _latex_term(child)
            if i == 0:
                out.append(text)
            elif text.startswith("-"):
                out.append(" - " + text[1:])
            else:
                out.append(" + " + text)
        return "".join(out)
    return _latex_term(e)


def _latex_term(e: Expr) -> str:
    if not isinstance(e, Product):
        if isinstance(e, Sum):
            return r"\left(%s\right)" % render_latex(e)
        return render_latex(e)
    num, den = [], []
    sign = ""
    for k, f in enumerate(e.children):
        if isinstance(f, IntPow) and f.exponent < 0:
            den.append(render_latex(f.base if f.exponent == -1 else IntPow(f.base, -f.exponent)))
            continue
        if k == 0 and isinstance(f, Const):
            c = f.value
            if c < 0:
                sign = "-"
                c = -c
            if c != 1 or len(e.children) == 1:
                num.append(render_latex(Const(c)))
            continue
        t = render_latex(f)
        if isinstance(f, (Sum, Product)):
            t = r"\left(%s\right)" % t
        num.append(t)
    body = r"\,".join(num) if num else "1"
    if den:
        return r"%s\frac{%s}{%s}" % (sign, body, r"\,".join(den))
    return sign + body


def sort_exprs(exprs):
    """Deterministic ordering of normalized expressions (by leading monomial)."""
    def key(e):
        rf = as_ratfunc(e)
        if rf.num.is_zero():
            return ((1,), "")
        return (mono_key(rf.num.leading()[0]), render(normalize(e)))
    return sorted(exprs, key=key)


def time_symbol():
    return TIME
