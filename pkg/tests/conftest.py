import functools
import random
from fractions import Fraction

import pytest

from ostrohj.builtins import BUILTINS
from ostrohj.hjpde import build_hj_system, integrability_closure
from ostrohj.model import ostrogradski
from ostrohj.symexpr import SymbolTable, parse
from ostrohj.symexpr.expr import Const, IntPow, Product, Sum, Sym


@functools.lru_cache(maxsize=None)
def closed_systems():
    """name -> (model, closed HJ system, closure report) for every builtin."""
    out = {}
    for name, b in BUILTINS.items():
        m = b.model()
        sys0 = build_hj_system(m, ostrogradski(m))
        sys, rep = integrability_closure(sys0)
        out[name] = (m, sys, rep)
    return out


@pytest.fixture(scope="session")
def closed():
    return closed_systems()


def toy_table(coords=("q1", "q2"), params=()):
    return SymbolTable.for_coordinates(list(coords), list(params), max_order=4)


def P(text, coords=("q1", "q2"), params=()):
    return parse(text, toy_table(coords, params))


# ----------------------------------------------------- random expression trees


def random_tree(rng: random.Random, symbols, depth=3):
    """Random polynomial expression tree over ``symbols``."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.4:
            return Const(Fraction(rng.randint(-5, 5), rng.choice([1, 1, 2, 3])))
        return Sym(rng.choice(symbols))
    kind = rng.choice(["sum", "prod", "pow"])
    if kind == "sum":
        return Sum(tuple(random_tree(rng, symbols, depth - 1) for _ in range(rng.randint(2, 3))))
    if kind == "prod":
        return Product(tuple(random_tree(rng, symbols, depth - 1) for _ in range(2)))
    return IntPow(random_tree(rng, symbols, depth - 1), rng.randint(2, 3))


def rewrite(e, rng: random.Random):
    """Apply random value-preserving algebraic rewrites throughout ``e``."""
    if isinstance(e, Const):
        if rng.random() < 0.3:
            return Sum((Const(e.value - 1), Const(Fraction(1))))
        return e
    if isinstance(e, Sym):
        if rng.random() < 0.2:
            return Product((Const(Fraction(2)), e, Const(Fraction(1, 2))))
        return e
    if isinstance(e, Sum):
        kids = [rewrite(c, rng) for c in e.children]
        rng.shuffle(kids)
        if rng.random() < 0.3:
            x = kids[0]
            kids += [x, Product((Const(Fraction(-1)), x))]
        if len(kids) > 2 and rng.random() < 0.5:
            return Sum((kids[0], Sum(tuple(kids[1:]))))
        return Sum(tuple(kids))
    if isinstance(e, Product):
        kids = [rewrite(c, rng) for c in e.children]
        rng.shuffle(kids)
        sums = [i for i, k in enumerate(kids) if isinstance(k, Sum)]
        if sums and rng.random() < 0.5:
            i = sums[0]
            rest = kids[:i] + kids[i + 1:]
            return Sum(tuple(Product((t, *rest)) for t in kids[i].children))
        return Product(tuple(kids))
    if isinstance(e, IntPow):
        base = rewrite(e.base, rng)
        if e.exponent >= 2 and rng.random() < 0.6:
            rest = base if e.exponent == 2 else IntPow(base, e.exponent - 1)
            return Product((base, rest))
        return IntPow(base, e.exponent)
    raise TypeError(type(e))


# ------------------------------------------------------- acceptance verdicts

ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
