"""Canonical multivariate polynomials and rational functions over Q.

A monomial is a tuple of ``(Symbol, exponent)`` pairs sorted by the symbol
order, with exponents >= 1.  :class:`Poly` maps monomials to nonzero
``Fraction`` coefficients.  :class:`RatFunc` is ``num/den`` with a monic
denominator; it only appears as the output of linear solves and of division
by parameters.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Tuple

from .symbols import Symbol

Monomial = Tuple[Tuple[Symbol, int], ...]
ONE_MONO: Monomial = ()


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        sa, ea = a[i]
        sb, eb = b[j]
        if sa == sb:
            out.append((sa, ea + eb))
            i += 1
            j += 1
        elif sa < sb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_div(a: Monomial, b: Monomial):
    """a / b if b divides a, else None."""
    da = dict(a)
    for s, e in b:
        have = da.get(s, 0)
        if have < e:
            return None
        if have == e:
            del da[s]
        else:
            da[s] = have - e
    return tuple(sorted(da.items(), key=lambda se: se[0].sort_key))


def mono_gcd(a: Monomial, b: Monomial) -> Monomial:
    db = dict(b)
    return tuple((s, min(e, db[s])) for s, e in a if s in db)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_key(m: Monomial):
    """Ascending sort under this key lists monomials in descending grlex."""
    return (-mono_degree(m), tuple((s.sort_key, -e) for s, e in m))


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class Poly:
    __slots__ = ("terms", "_hash", "_sorted")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        t = {}
        if terms:
            for m, c in terms.items():
                if c:
                    t[m] = _frac(c)
        self.terms: Dict[Monomial, Fraction] = t
        self._hash = None
        self._sorted = None

    # construction helpers
    @classmethod
    def const(cls, c) -> Poly:
        return cls({ONE_MONO: _frac(c)} if c else None)

    @classmethod
    def symbol(cls, s: Symbol) -> Poly:
        return cls({((s, 1),): Fraction(1)})

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> Poly:
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        p._sorted = None
        return p

    # inspection
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ONE_MONO in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def sorted_terms(self):
        if self._sorted is None:
            self._sorted = sorted(self.terms.items(), key=lambda mc: mono_key(mc[0]))
        return self._sorted

    def leading(self):
        return self.sorted_terms()[0]

    def symbols(self) -> set:
        out = set()
        for m in self.terms:
            for s, _ in m:
                out.add(s)
        return out

    def degree(self, s: Symbol | None = None) -> int:
        if not self.terms:
            return -1
        if s is None:
            return max(mono_degree(m) for m in self.terms)
        return max(dict(m).get(s, 0) for m in self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Poly.const(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # arithmetic
    def __neg__(self) -> Poly:
        return Poly._raw({m: -c for m, c in self.terms.items()})

    def __add__(self, other) -> Poly:
        if not isinstance(other, Poly):
            other = Poly.const(other)
        if len(other.terms) > len(self.terms):
            self, other = other, self
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, 0) + c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        return Poly._raw(t)

    __radd__ = __add__

    def __sub__(self, other) -> Poly:
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> Poly:
        return (-self) + other

    def scale(self, c) -> Poly:
        c = _frac(c)
        if not c:
            return Poly()
        return Poly._raw({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return self.scale(other)
        if len(self.terms) == 1 and ONE_MONO in self.terms:
            return other.scale(self.terms[ONE_MONO])
        t: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                v = t.get(m, 0) + c1 * c2
                if v:
                    t[m] = v
                else:
                    t.pop(m, None)
        return Poly._raw(t)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Poly:
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def diff(self, s: Symbol) -> Poly:
        t = {}
        for m, c in self.terms.items():
            for k, (sym, e) in enumerate(m):
                if sym == s:
                    nm = m[:k] + ((sym, e - 1),) + m[k + 1:] if e > 1 else m[:k] + m[k + 1:]
                    t[nm] = t.get(nm, 0) + c * e
                    break
        return Poly(t)

    def coefficient_of(self, s: Symbol, power: int = 1) -> Poly:
        """Coefficient polynomial of ``s**power`` (other symbols kept)."""
        t = {}
        for m, c in self.terms.items():
            d = dict(m)
            if d.get(s, 0) == power:
                d.pop(s, None)
                nm = tuple(sorted(d.items(), key=lambda se: se[0].sort_key))
                t[nm] = c
        return Poly(t)

    def content(self) -> Fraction:
        """Positive rational content (gcd of numerators / lcm of denominators)."""
        from math import gcd
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den) if num else Fraction(0)

    def monomial_content(self) -> Monomial:
        it = iter(self.terms)
        g = next(it)
        for m in it:
            g = mono_gcd(g, m)
            if not g:
                break
        return g

    def div_monomial(self, m: Monomial) -> Poly:
        return Poly._raw({mono_div(k, m): c for k, c in self.terms.items()})

    def exact_div(self, d: Poly):
        """Quotient ``self / d`` if ``d`` divides exactly, else ``None``."""
        if d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if d.is_constant():
            return self.scale(1 / d.constant_value())
        lm, lc = d.leading()
        rem = self
        q: Dict[Monomial, Fraction] = {}
        guard = 0
        while rem:
            rm, rc = rem.leading()
            qm = mono_div(rm, lm)
            if qm is None:
                return None
            qc = rc / lc
            q[qm] = q.get(qm, 0) + qc
            rem = rem - Poly._raw({qm: qc}) * d
            guard += 1
            if guard > 100000:
                return None
        return Poly(q)

    def monic(self):
        """(lc, self/lc) with lc the leading coefficient."""
        _, lc = self.leading()
        return lc, self.scale(1 / lc)

    def evaluate(self, values: Mapping[Symbol, float]) -> float:
        total = 0.0
        for m, c in self.terms.items():
            v = float(c)
            for s, e in m:
                v *= values[s] ** e
            total += v
        return total

    def evaluate_exact(self, values: Mapping[Symbol, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for s, e in m:
                v *= values[s] ** e
            total += v
        return total

    def __repr__(self):
        return f"Poly({dict(self.sorted_terms())!r})"


def _lcm_monomial(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for s, e in b:
        d[s] = max(d.get(s, 0), e)
    return tuple(sorted(d.items(), key=lambda se: se[0].sort_key))


class RatFunc:
    """Reduced ``num/den`` with monic denominator."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None, _reduced: bool = False):
        if den is None or _reduced:
            self.num = num
            self.den = den if den is not None else Poly.const(1)
        else:
            self.num, self.den = _reduce(num, den)
        self._hash = None

    @classmethod
    def const(cls, c) -> RatFunc:
        return cls(Poly.const(c))

    @classmethod
    def symbol(cls, s: Symbol) -> RatFunc:
        return cls(Poly.symbol(s))

    @property
    def is_poly(self) -> bool:
        return self.den.is_constant()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def symbols(self) -> set:
        return self.num.symbols() | self.den.symbols()

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction, Poly)):
            return self == as_ratfunc(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __add__(self, other):
        other = as_ratfunc(other)
        if self.den == other.den:
            if self.den.is_constant():
                return RatFunc(self.num + other.num)
            return RatFunc(self.num + other.num, self.den)
        if self.den.is_monomial() and other.den.is_monomial():
            (m1, _), = self.den.terms.items()
            (m2, _), = other.den.terms.items()
            lcm = _lcm_monomial(m1, m2)
            f1 = Poly._raw({mono_div(lcm, m1): Fraction(1)})
            f2 = Poly._raw({mono_div(lcm, m2): Fraction(1)})
            return RatFunc(self.num * f1 + other.num * f2, Poly._raw({lcm: Fraction(1)}))
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-as_ratfunc(other))

    def __rsub__(self, other):
        return as_ratfunc(other) - self

    def __mul__(self, other):
        other = as_ratfunc(other)
        if self.den.is_constant() and other.den.is_constant():
            return RatFunc(self.num * other.num)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_ratfunc(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero expression")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return as_ratfunc(other) / self

    def __pow__(self, n: int):
        if n >= 0:
            return RatFunc(self.num ** n, self.den ** n, _reduced=True) if n else RatFunc.const(1)
        return RatFunc.const(1) / (self ** (-n))

    def diff(self, s: Symbol) -> RatFunc:
        dn = self.num.diff(s)
        if self.den.is_constant():
            return RatFunc(dn)
        dd = self.den.diff(s)
        if dd.is_zero():
            return RatFunc(dn, self.den)
        return RatFunc(dn * self.den - self.num * dd, self.den * self.den)

    def evaluate(self, values):
        n = self.num.evaluate(values)
        if self.den.is_constant():
            return n
        d = self.den.evaluate(values)
        if d == 0:
            raise ZeroDivisionError("rational-function denominator vanishes")
        return n / d

    def evaluate_exact(self, values) -> Fraction:
        d = self.den.evaluate_exact(values)
        if d == 0:
            raise ZeroDivisionError("rational-function denominator vanishes")
        return self.num.evaluate_exact(values) / d

    def __repr__(self):
        return f"RatFunc({self.num!r}, {self.den!r})"


def as_ratfunc(x) -> RatFunc:
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Poly):
        return RatFunc(x)
    if isinstance(x, Symbol):
        return RatFunc.symbol(x)
    if isinstance(x, (int, Fraction)):
        return RatFunc.const(x)
    from .expr import Expr
    if isinstance(x, Expr):
        return x.ratfunc
    raise TypeError(f"cannot convert {type(x).__name__} to a rational function")


def _reduce(num: Poly, den: Poly):
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if num.is_zero():
        return Poly(), Poly.const(1)
    if den.is_constant():
        return num.scale(1 / den.constant_value()), Poly.const(1)
    g = mono_gcd(num.monomial_content(), den.monomial_content())
    if g:
        num = num.div_monomial(g)
        den = den.div_monomial(g)
    if den.is_constant():
        return num.scale(1 / den.constant_value()), Poly.const(1)
    q = num.exact_div(den)
    if q is not None:
        return q, Poly.const(1)
    if not num.is_constant():
        q = den.exact_div(num)
        if q is not None:
            lc, q = q.monic()
            return Poly.const(1 / lc), q
    lc, den = den.monic()
    return num.scale(1 / lc), den
