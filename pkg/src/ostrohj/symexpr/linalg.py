"""Linear algebra over polynomial / rational-function entries."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence

from ..errors import RankUnstable, SingularBlock
from .expr import Expr, from_ratfunc
from .poly import Poly, RatFunc, as_ratfunc
from .symbols import Symbol

DEFAULT_SEED = 20260515
DEFAULT_SAMPLES = 5
SYMBOLIC_DEGREE_LIMIT = 4


def _rf_matrix(M) -> List[List[RatFunc]]:
    return [[as_ratfunc(x) for x in row] for row in M]


def exact_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank of a matrix of Fractions by Gaussian elimination."""
    A = [list(r) for r in rows]
    if not A:
        return 0
    nrows, ncols = len(A), len(A[0])
    rank = 0
    for c in range(ncols):
        piv = next((r for r in range(rank, nrows) if A[r][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][c]
        for r in range(rank + 1, nrows):
            if A[r][c] != 0:
                f = A[r][c] / p
                A[r] = [a - f * b for a, b in zip(A[r], A[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def _clear_row_denominators(row: List[RatFunc]) -> List[Poly]:
    dens = [x.den for x in row if not x.den.is_constant()]
    if not dens:
        return [x.num.scale(1 / x.den.constant_value()) for x in row]
    common = Poly.const(1)
    for d in dens:
        if common.exact_div(d) is None:
            common = common * d
    out = []
    for x in row:
        q = common.exact_div(x.den)
        out.append(x.num * q)
    return out


def bareiss_rank(M) -> int:
    """Rank by fraction-free elimination with complete pivoting."""
    A = [_clear_row_denominators(r) for r in _rf_matrix(M)]
    if not A or not A[0]:
        return 0
    n, m = len(A), len(A[0])
    prev = Poly.const(1)
    k = 0
    while k < min(n, m):
        piv = None
        for c in range(k, m):
            for r in range(k, n):
                if not A[r][c].is_zero():
                    piv = (r, c)
                    break
            if piv:
                break
        if piv is None:
            break
        r, c = piv
        A[k], A[r] = A[r], A[k]
        for row in A:
            row[k], row[c] = row[c], row[k]
        pk = A[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, m):
                v = pk * A[i][j] - A[i][k] * A[k][j]
                q = v.exact_div(prev)
                if q is None:  # pragma: no cover - Bareiss division is exact
                    raise ArithmeticError("inexact Bareiss division")
                A[i][j] = q
            A[i][k] = Poly()
        prev = pk
        k += 1
    return k


@dataclass
class RankResult:
    rank: int
    certificate: dict
    sampled_ranks: List[int] = field(default_factory=list)
    symbolic_rank: int | None = None

    def __iter__(self):
        yield self.rank
        yield self.certificate


def _entry_degree(x: RatFunc) -> int:
    return max(x.num.degree(), x.den.degree())


def random_point(symbols, rng: random.Random, lo: int = -10, hi: int = 10):
    return {s: Fraction(rng.randint(lo, hi)) for s in sorted(symbols)}


def matrix_rank(M, samples: int = DEFAULT_SAMPLES, rng: random.Random | None = None) -> RankResult:
    """Generic rank over the rational-function field.

    Exact rank at ``samples`` random integer points (coordinates in
    [-10, 10]); the maximum is the generic rank.  When every entry has total
    degree <= 4 the answer is cross-checked by fraction-free symbolic
    elimination.
    """
    rng = rng or random.Random(DEFAULT_SEED)
    R = _rf_matrix(M)
    syms = set()
    for row in R:
        for x in row:
            syms |= x.symbols()
    ranks = []
    best, cert = -1, {}
    for _ in range(samples):
        for _attempt in range(200):
            pt = random_point(syms, rng)
            try:
                vals = [[x.evaluate_exact(pt) for x in row] for row in R]
                break
            except ZeroDivisionError:
                continue
        else:
            raise RankUnstable("could not find a sample point avoiding singular denominators")
        r = exact_rank(vals)
        ranks.append(r)
        if r > best:
            best, cert = r, {str(s): v for s, v in pt.items()}
    symbolic = None
    if all(_entry_degree(x) <= SYMBOLIC_DEGREE_LIMIT for row in R for x in row):
        symbolic = bareiss_rank(R)
        if symbolic != best:
            raise RankUnstable(f"sampled rank {best} disagrees with symbolic rank {symbolic}")
    elif len(set(ranks)) > 1:
        raise RankUnstable(f"sampled ranks disagree: {ranks}")
    return RankResult(max(best, 0), cert, ranks, symbolic)


def linear_solve(A, b) -> List[Expr]:
    """Solve the square system ``A x = b`` exactly.

    Fraction-free elimination keeps intermediate entries polynomial; the
    solution is ``x_k = y_k / det`` with ``y`` from fraction-free back
    substitution.  The result is checked by back-substitution.
    """
    R = _rf_matrix(A)
    B = [as_ratfunc(x) for x in b]
    n = len(R)
    if any(len(r) != n for r in R) or len(B) != n:
        raise SingularBlock("linear_solve needs a square system")
    if n == 0:
        return []
    aug = [_clear_row_denominators(R[i] + [B[i]]) for i in range(n)]
    prev = Poly.const(1)
    for k in range(n):
        piv = min((r for r in range(k, n) if not aug[r][k].is_zero()),
                  key=lambda r: (not aug[r][k].is_constant(), len(aug[r][k].terms)), default=None)
        if piv is None:
            raise SingularBlock(f"no invertible pivot in column {k + 1}")
        aug[k], aug[piv] = aug[piv], aug[k]
        pk = aug[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n + 1):
                v = pk * aug[i][j] - aug[i][k] * aug[k][j]
                aug[i][j] = v.exact_div(prev)
            aug[i][k] = Poly()
        prev = pk
    det = aug[n - 1][n - 1]
    y = [Poly()] * n
    for k in range(n - 1, -1, -1):
        acc = det * aug[k][n]
        for j in range(k + 1, n):
            acc = acc - aug[k][j] * y[j]
        q = acc.exact_div(aug[k][k])
        if q is None:  # pragma: no cover
            raise ArithmeticError("inexact fraction-free back substitution")
        y[k] = q
    x = [RatFunc(yk, det) for yk in y]
    for i in range(n):
        resid = sum((R[i][j] * x[j] for j in range(n)), RatFunc.const(0)) - B[i]
        if not resid.is_zero():  # pragma: no cover
            raise ArithmeticError("linear_solve back-substitution check failed")
    return [from_ratfunc(v) for v in x]


def _pivot_choice(col: List[RatFunc], rows):
    best = None
    for r in rows:
        v = col[r]
        if v.is_zero():
            continue
        key = (not v.is_constant(), not v.is_poly, len(v.num.terms) + len(v.den.terms))
        if best is None or key < best[0]:
            best = (key, r)
    return None if best is None else best[1]


def rref(M):
    """Reduced row echelon form over the rational-function field.

    Returns ``(rows, pivot_columns)``.  Pivots prefer constant entries so
    constant-coefficient systems stay in Q.
    """
    A = _rf_matrix(M)
    if not A:
        return [], []
    n, m = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(m):
        if r >= n:
            break
        col = [A[i][c] for i in range(n)]
        p = _pivot_choice(col, range(r, n))
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = RatFunc.const(1) / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(n):
            if i != r and not A[i][c].is_zero():
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def nullspace(M, ncols: int | None = None) -> List[List[RatFunc]]:
    """Basis of the right kernel, one vector per free column."""
    A = _rf_matrix(M)
    m = len(A[0]) if A else (ncols or 0)
    R, pivots = rref(A) if A else ([], [])
    basis = []
    for f in range(m):
        if f in pivots:
            continue
        v = [RatFunc.const(0)] * m
        v[f] = RatFunc.const(1)
        for row, pc in zip(R, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def left_nullspace(M, nrows: int | None = None) -> List[List[RatFunc]]:
    A = _rf_matrix(M)
    if not A or not A[0]:
        n = len(A) if A else (nrows or 0)
        return [[RatFunc.const(int(i == j)) for j in range(n)] for i in range(n)]
    T = [list(col) for col in zip(*A)]
    return nullspace(T)


def matmul_vec(A, x) -> List[RatFunc]:
    R = _rf_matrix(A)
    X = [as_ratfunc(v) for v in x]
    return [sum((a * b for a, b in zip(row, X)), RatFunc.const(0)) for row in R]


def independent_rows(M, samples: int = DEFAULT_SAMPLES, rng: random.Random | None = None) -> List[int]:
    """Greedy maximal set of linearly independent rows (generic rank test)."""
    chosen: List[int] = []
    rank = 0
    for i in range(len(M)):
        trial = [M[j] for j in chosen + [i]]
        r = matrix_rank(trial, samples=samples, rng=rng).rank
        if r > rank:
            chosen.append(i)
            rank = r
    return chosen


def symbols_of(M) -> set:
    out = set()
    for row in M:
        for x in row:
            out |= as_ratfunc(x).symbols()
    return out


__all__ = ["matrix_rank", "linear_solve", "rref", "nullspace", "left_nullspace", "bareiss_rank",
           "exact_rank", "RankResult", "independent_rows", "matmul_vec", "DEFAULT_SEED",
           "DEFAULT_SAMPLES", "Symbol"]
