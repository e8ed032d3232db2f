"""Exact symbolic expression algebra over Q."""
from .symbols import (ENERGY, TIME, Kind, Symbol, SymbolTable, acceleration, coordinate, jet,
                      momentum_p, momentum_pi, parameter, promote, velocity)
from .poly import Poly, RatFunc, as_ratfunc
from .expr import (ONE, ZERO, Const, Expr, IntPow, Product, Sum, Sym, as_expr, diff, equal,
                   eval_exact, eval_numeric, from_ratfunc, linear_coefficient, normalize,
                   render, render_latex, sort_exprs, substitute, total_time_derivative)
from .parser import parse, parse_rational
from .linalg import (DEFAULT_SAMPLES, DEFAULT_SEED, RankResult, bareiss_rank, exact_rank,
                     independent_rows, left_nullspace, linear_solve, matrix_rank, nullspace, rref)
from .numeric import lambdify

__all__ = [
    "ENERGY", "TIME", "Kind", "Symbol", "SymbolTable", "acceleration", "coordinate", "jet",
    "momentum_p", "momentum_pi", "parameter", "promote", "velocity", "Poly", "RatFunc",
    "as_ratfunc", "ONE", "ZERO", "Const", "Expr", "IntPow", "Product", "Sum", "Sym", "as_expr",
    "diff", "equal", "eval_exact", "eval_numeric", "from_ratfunc", "linear_coefficient",
    "normalize", "render", "render_latex", "sort_exprs", "substitute", "total_time_derivative",
    "parse", "parse_rational", "DEFAULT_SAMPLES", "DEFAULT_SEED", "RankResult", "bareiss_rank",
    "exact_rank", "independent_rows", "left_nullspace", "linear_solve", "matrix_rank",
    "nullspace", "rref", "lambdify",
]
