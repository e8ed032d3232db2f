"""Ostrogradski kinematics of a second-order Lagrangian.

Phase space per coordinate ``q`` is ``(q, q', p_q, pi_q)`` where ``q'`` is the
velocity promoted to an independent coordinate.  Everything here is exact
and symbolic.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from .errors import ModelError, NonlinearAccelerations, NotProjectable
from .symexpr import (ENERGY, TIME, Expr, Kind, Symbol, SymbolTable, as_ratfunc, diff,
                      from_ratfunc, jet, left_nullspace, linear_solve, matrix_rank, momentum_p,
                      momentum_pi, normalize, parameter, parse, parse_rational, rref, substitute,
                      total_time_derivative)
from .symexpr.linalg import DEFAULT_SAMPLES, DEFAULT_SEED, independent_rows
from .symexpr.poly import RatFunc

_IDENT = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
RESERVED = {"t", "P0"}


@dataclass
class LagrangianModel:
    name: str
    coords: List[str]
    params: Dict[str, Fraction]
    L: Expr
    source: str = ""

    def __post_init__(self):
        if not self.coords:
            raise ModelError("a model needs at least one coordinate")
        if len(set(self.coords)) != len(self.coords):
            raise ModelError("coordinate names must be unique")
        for c in self.coords:
            if not _IDENT.match(c) or c in RESERVED or c.startswith(("p_", "pi_")):
                raise ModelError(f"invalid coordinate name {c!r}")
            if c in self.params:
                raise ModelError(f"{c!r} is both a coordinate and a parameter")
        self.L = normalize(self.L)
        for s in self.L.symbols():
            if s.kind == Kind.JET or s.is_momentum or s.kind == Kind.ENERGY:
                raise ModelError(f"Lagrangian may not contain {s}")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def symtab(self) -> SymbolTable:
        return SymbolTable.for_coordinates(self.coords, self.params)

    def jet_symtab(self, max_order: int = 4) -> SymbolTable:
        return SymbolTable.for_coordinates(self.coords, self.params, max_order=max_order)

    def q(self, i):
        return jet(self.coords[i], i + 1, 0)

    def qbar(self, i):
        return jet(self.coords[i], i + 1, 1)

    def qddot(self, i):
        return jet(self.coords[i], i + 1, 2)

    def p(self, i):
        return momentum_p(self.coords[i], i + 1)

    def pi(self, i):
        return momentum_pi(self.coords[i], i + 1)

    @property
    def phase_symbols(self) -> List[Symbol]:
        """Ordered phase-space symbols: q..., q'..., p..., pi..."""
        n = range(self.n)
        return [self.q(i) for i in n] + [self.qbar(i) for i in n] + \
            [self.p(i) for i in n] + [self.pi(i) for i in n]

    @property
    def param_symbols(self) -> Dict[Symbol, Fraction]:
        return {parameter(k): v for k, v in self.params.items()}

    def with_params(self, overrides: Dict[str, Fraction]) -> LagrangianModel:
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise ModelError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        params = dict(self.params)
        params.update(overrides)
        return LagrangianModel(self.name, list(self.coords), params, self.L, self.source)

    def to_text(self) -> str:
        from .symexpr import render
        lines = [f"name {self.name}"]
        lines += [f"param {k} = {v}" for k, v in self.params.items()]
        lines.append("coords " + " ".join(self.coords))
        lines.append(f"L = {render(self.L)}")
        return "\n".join(lines) + "\n"


def parse_model(text: str, origin: str = "<model>") -> LagrangianModel:
    """Read the line-oriented model format (``name``/``param``/``coords``/``L``)."""
    name = None
    params: Dict[str, Fraction] = {}
    coords: Optional[List[str]] = None
    L_text = None
    L_line = 0
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if L_text is not None:
            raise ModelError(f"{origin}:{lineno}: 'L = ...' must be the last line")
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "name":
                if not _IDENT.match(rest.replace("-", "_")):
                    raise ModelError(f"bad model name {rest!r}")
                name = rest
            elif head == "param":
                pname, eq, value = rest.partition("=")
                pname = pname.strip()
                if not eq or not _IDENT.match(pname):
                    raise ModelError("expected 'param <ident> = <rational>'")
                params[pname] = parse_rational(value)
            elif head == "coords":
                coords = rest.split()
            elif line.startswith("L") and line[1:].lstrip().startswith("="):
                L_text = line[1:].lstrip()[1:]
                L_line = lineno
            else:
                raise ModelError(f"unrecognized directive {head!r}")
        except ModelError as exc:
            if str(exc).startswith(origin):
                raise
            raise ModelError(f"{origin}:{lineno}: {exc}") from None
        except Exception as exc:  # rational parse problems etc.
            raise ModelError(f"{origin}:{lineno}: {exc}") from None
    if name is None or coords is None or L_text is None:
        raise ModelError(f"{origin}: model needs 'name', 'coords' and a final 'L = ...' line")
    symtab = SymbolTable.for_coordinates(coords, params)
    for s in list(symtab):
        if symtab[s].is_momentum or symtab[s].kind == Kind.ENERGY:
            del symtab[s]
    try:
        L = parse(L_text, symtab)
    except Exception as exc:
        raise ModelError(f"{origin}:{L_line}: {exc}") from None
    return LagrangianModel(name, coords, params, L, source=text)


# --------------------------------------------------------------------- ops


def conjugate_momenta(m: LagrangianModel):
    """``(p_defs, pi_defs)``: p_i = dL/dq'_i - d/dt dL/dq''_i, pi_i = dL/dq''_i."""
    pi_defs = [diff(m.L, m.qddot(i)) for i in range(m.n)]
    p_defs = [normalize(diff(m.L, m.qbar(i)).ratfunc - total_time_derivative(pi_defs[i]).ratfunc)
              for i in range(m.n)]
    return p_defs, pi_defs


def _hessian(L: Expr, syms: List[Symbol]):
    first = [diff(L, s) for s in syms]
    return [[diff(f, s) for s in syms] for f in first]


@dataclass
class HessianInfo:
    W_pi: list
    rank_pi: int
    W_p: list
    rank_p: int
    certificate_pi: dict = field(default_factory=dict)
    certificate_p: dict = field(default_factory=dict)


def hessians(m: LagrangianModel, samples: int = DEFAULT_SAMPLES, rng=None) -> HessianInfo:
    rng = rng or random.Random(DEFAULT_SEED)
    W_pi = _hessian(m.L, [m.qddot(i) for i in range(m.n)])
    W_p = _hessian(m.L, [m.qbar(i) for i in range(m.n)])
    r_pi = matrix_rank(W_pi, samples, rng)
    r_p = matrix_rank(W_p, samples, rng)
    return HessianInfo(W_pi, r_pi.rank, W_p, r_p.rank, r_pi.certificate, r_p.certificate)


def _acc_degree(e: Expr) -> int:
    rf = e.ratfunc
    if any(s.kind == Kind.ACC for s in rf.den.symbols()):
        return 99
    best = 0
    for mono in rf.num.terms:
        best = max(best, sum(k for s, k in mono if s.kind == Kind.ACC))
    return best


def solve_accelerations(m: LagrangianModel, hess: HessianInfo | None = None,
                        samples: int = DEFAULT_SAMPLES, rng=None):
    """Split accelerations into solvable ``a`` and unsolvable ``alpha`` and solve q''_a = w_a.

    Returns ``(a_idx, alpha_idx, w)`` with ``w`` mapping the acceleration
    symbol of each ``a`` to its expression in (q, q', pi_a, q''_alpha).
    """
    rng = rng or random.Random(DEFAULT_SEED)
    if _acc_degree(m.L) > 2:
        raise NonlinearAccelerations("the Lagrangian must be at most quadratic in the accelerations")
    hess = hess or hessians(m, samples, rng)
    W = hess.W_pi
    a_idx = independent_rows(W, samples, rng) if hess.rank_pi else []
    alpha_idx = [i for i in range(m.n) if i not in a_idx]
    acc = [m.qddot(i) for i in range(m.n)]
    zero_acc = {s: 0 for s in acc}
    A, rhs = [], []
    for a in a_idx:
        dL = diff(m.L, acc[a])
        c_a = substitute(dL, zero_acc)
        r = as_ratfunc(m.pi(a)) - c_a.ratfunc
        for al in alpha_idx:
            r = r - W[a][al].ratfunc * as_ratfunc(acc[al])
        A.append([W[a][b] for b in a_idx])
        rhs.append(from_ratfunc(r))
    sol = linear_solve(A, rhs)
    w = {acc[a]: v for a, v in zip(a_idx, sol)}
    # the pi_a definitions must hold identically
    for a in a_idx:
        check = substitute(diff(m.L, acc[a]), w).ratfunc - as_ratfunc(m.pi(a))
        if not check.is_zero():  # pragma: no cover - linear_solve verifies already
            raise ModelError(f"acceleration solve failed for {acc[a]}")
    return a_idx, alpha_idx, w


def euler_lagrange(m: LagrangianModel) -> List[Expr]:
    out = []
    for i in range(m.n):
        e = diff(m.L, m.q(i)).ratfunc \
            - total_time_derivative(diff(m.L, m.qbar(i))).ratfunc \
            + total_time_derivative(total_time_derivative(diff(m.L, m.qddot(i)))).ratfunc
        out.append(from_ratfunc(e))
    return out


@dataclass
class OstrogradskiData:
    p_defs: List[Expr]
    pi_defs: List[Expr]
    W_pi: list
    rank_pi: int
    W_p: list
    rank_p: int
    a_idx: List[int]
    alpha_idx: List[int]
    w: Dict[Symbol, Expr]
    gamma_idx: List[int] = field(default_factory=list)
    H_pi: Dict[int, Expr] = field(default_factory=dict)
    H_p: Dict[int, Expr] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def R(self) -> int:
        return len(self.alpha_idx)

    @property
    def r(self) -> int:
        return len(self.gamma_idx)

    @property
    def r_hessian(self) -> int:
        return len(self.W_p) - self.rank_p


def ostrogradski(m: LagrangianModel, samples: int = DEFAULT_SAMPLES, rng=None) -> OstrogradskiData:
    """Momenta, Hessians, acceleration split and both kinds of primary constraints."""
    rng = rng or random.Random(DEFAULT_SEED)
    p_defs, pi_defs = conjugate_momenta(m)
    hess = hessians(m, samples, rng)
    a_idx, alpha_idx, w = solve_accelerations(m, hess, samples, rng)
    data = OstrogradskiData(p_defs, pi_defs, hess.W_pi, hess.rank_pi, hess.W_p, hess.rank_p,
                            a_idx, alpha_idx, w)
    primary_constraints(m, data)
    return data


def _is_phase_function(e: Expr) -> bool:
    return all(s.kind in (Kind.COORD, Kind.VEL, Kind.P, Kind.PI, Kind.PARAM, Kind.TIME)
               for s in e.symbols())


def primary_constraints(m: LagrangianModel, ostro: OstrogradskiData):
    """Fill ``H_pi`` / ``H_p`` and return the constraint lists ``(H'^pi, H'^p)``.

    pi-type: ``pi_alpha + H^pi_alpha`` with H^pi_alpha = -dL/dq''_alpha at q''_a = w_a.
    p-type: combinations of the p-definitions which, after q''_a = w_a, are
    free of third-order jets and of q''_alpha; a combination monic in p_gamma
    qualifies only if it does not involve the paired coordinate q'_gamma
    (otherwise it merely defines that velocity).
    """
    H_pi = {}
    for al in ostro.alpha_idx:
        h = -substitute(ostro.pi_defs[al], ostro.w).ratfunc
        h = from_ratfunc(h)
        if not _is_phase_function(h):
            raise NotProjectable(f"H^pi for {m.qddot(al)} still depends on {sorted(map(str, h.symbols()))}")
        H_pi[al] = h
    ostro.H_pi = H_pi

    g = [substitute(pd, ostro.w) for pd in ostro.p_defs]
    jets = sorted({s for e in g for s in e.symbols()
                   if s.kind == Kind.JET or (s.kind == Kind.ACC)})
    if jets:
        C = [[diff(e, s) for s in jets] for e in g]
        combos = left_nullspace(C)
    else:
        combos = [[RatFunc.const(int(i == j)) for j in range(m.n)] for i in range(m.n)]
    H_p = {}
    if combos:
        rows, pivots = rref(combos)
        for row, piv in zip(rows, pivots):
            expr = RatFunc.const(0)
            for i, lam in enumerate(row):
                if not lam.is_zero():
                    expr = expr + lam * (as_ratfunc(m.p(i)) - g[i].ratfunc)
            e = from_ratfunc(expr)
            if not _is_phase_function(e):
                ostro.notes.append(f"combination pivoting on {m.p(piv)} is not jet-free; skipped")
                continue
            if m.qbar(piv) in e.symbols():
                continue
            H_p[piv] = from_ratfunc(expr - as_ratfunc(m.p(piv)))
    ostro.gamma_idx = sorted(H_p)
    ostro.H_p = H_p
    if ostro.r != ostro.r_hessian:
        ostro.notes.append(
            f"p-type constraint count {ostro.r} differs from the velocity-Hessian corank "
            f"{ostro.r_hessian}; constraints were taken from jet-free combinations")
    hpi = [normalize(as_ratfunc(m.pi(al)) + H_pi[al].ratfunc) for al in ostro.alpha_idx]
    hp = [normalize(as_ratfunc(m.p(gm)) + H_p[gm].ratfunc) for gm in ostro.gamma_idx]
    return hpi, hp


def canonical_H0(m: LagrangianModel, ostro: OstrogradskiData) -> Expr:
    """H0 = sum p q' + sum_a pi_a w_a - sum_alpha H^pi_alpha q''_alpha - L|w."""
    H = RatFunc.const(0)
    for i in range(m.n):
        H = H + as_ratfunc(m.p(i)) * as_ratfunc(m.qbar(i))
    for acc, wa in ostro.w.items():
        H = H + as_ratfunc(m.pi(acc.index - 1)) * wa.ratfunc
    for al in ostro.alpha_idx:
        H = H - ostro.H_pi[al].ratfunc * as_ratfunc(m.qddot(al))
    H = H - substitute(m.L, ostro.w).ratfunc
    H0 = from_ratfunc(H)
    for al in ostro.alpha_idx:
        if not diff(H0, m.qddot(al)).is_zero():
            raise NotProjectable(f"H0 depends on the unsolvable acceleration {m.qddot(al)}")
    if not _is_phase_function(H0):
        raise NotProjectable("H0 is not a phase-space function")
    return H0


def phase_symbols_with_energy(m: LagrangianModel):
    return m.phase_symbols + [TIME, ENERGY]
