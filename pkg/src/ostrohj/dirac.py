"""Dirac's consistency-condition algorithm, used to cross-check the HJ closure."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import ClosureDiverged, InconsistentSystem, MismatchReport
from .model import LagrangianModel, OstrogradskiData, canonical_H0, ostrogradski, primary_constraints
from .symexpr import (Expr, Kind, Symbol, as_ratfunc, diff, from_ratfunc, lambdify, linear_coefficient,
                      left_nullspace, parameter, render, rref)
from .symexpr.expr import substitute_rf
from .symexpr.linalg import DEFAULT_SAMPLES, DEFAULT_SEED
from .symexpr.poly import RatFunc

ZERO_TOL = 1e-10
SURFACE_TOL = 1e-9


def bracket(F, G, m: LagrangianModel) -> RatFunc:
    """Canonical bracket over (q, p) and (q', pi)."""
    Fr, Gr = as_ratfunc(F), as_ratfunc(G)
    out = RatFunc.const(0)
    for i in range(m.n):
        for x, px in ((m.q(i), m.p(i)), (m.qbar(i), m.pi(i))):
            out = out + Fr.diff(x) * Gr.diff(px) - Fr.diff(px) * Gr.diff(x)
    return out


class Surface:
    """A constraint surface described by momentum-solved substitutions."""

    def __init__(self, m: LagrangianModel):
        self.m = m
        self.subs: Dict[Symbol, RatFunc] = {}
        self.residuals: List[RatFunc] = []

    def reduce(self, e) -> RatFunc:
        return substitute_rf(as_ratfunc(e), self.subs)

    def add(self, e) -> bool:
        """Add a constraint; returns False if it is not momentum-solvable."""
        rf = self.reduce(e)
        for s in sorted(rf.symbols()):
            if not s.is_momentum:
                continue
            lc = linear_coefficient(rf, s)
            if lc is None or lc[0].is_zero() or any(x.kind != Kind.PARAM for x in lc[0].symbols()):
                continue
            value = -lc[1] / lc[0]
            for k in self.subs:
                self.subs[k] = substitute_rf(self.subs[k], {s: value})
            self.subs[s] = value
            return True
        self.residuals.append(rf)
        return False

    def sample(self, count: int, rng: np.random.Generator) -> List[Dict[Symbol, float]]:
        m = self.m
        pvals = {s: float(v) for s, v in m.param_symbols.items()}
        solved = sorted(self.subs)
        fn = lambdify([from_ratfunc(self.subs[s]) for s in solved], m.phase_symbols, pvals)
        out = []
        for _ in range(count):
            x = rng.uniform(-1.0, 1.0, len(m.phase_symbols))
            vals = dict(zip(m.phase_symbols, x))
            for s, v in zip(solved, fn(x) if solved else []):
                vals[s] = float(v)
            vals.update(pvals)
            out.append(vals)
        return out


@dataclass
class Multiplier:
    name: Symbol
    primary: Expr
    determined: Optional[Expr] = None

    @property
    def free(self) -> bool:
        return self.determined is None


@dataclass
class Step:
    constraint: str
    outcome: str  # vanishes | multiplier | secondary
    mode: str  # symbolic | numeric


@dataclass
class DiracReport:
    primaries: List[Expr]
    secondaries: List[Expr]
    multipliers: List[Multiplier]
    classification: List[str]
    total_hamiltonian: Expr
    H_c: Expr
    steps: List[Step] = field(default_factory=list)
    bracket_ranks: List[int] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    surface: Optional[Surface] = None

    @property
    def constraints(self) -> List[Expr]:
        return self.primaries + self.secondaries

    @property
    def first_class(self) -> int:
        return self.classification.count("FirstClass")

    @property
    def second_class(self) -> int:
        return self.classification.count("SecondClass")

    @property
    def free_multipliers(self) -> List[Multiplier]:
        return [mu for mu in self.multipliers if mu.free]


def _primitive(rf: RatFunc) -> RatFunc:
    """Strip rational content; orient by the first momentum with a constant coefficient."""
    sign = 1 if rf.num.leading()[1] > 0 else -1
    for s in sorted(rf.symbols()):
        lc = linear_coefficient(rf, s) if s.is_momentum else None
        if lc is not None and lc[0].is_constant() and not lc[0].is_zero():
            sign = 1 if lc[0].constant_value() > 0 else -1
            break
    return rf * RatFunc.const(sign / rf.num.content())


def dirac_analyze(m: LagrangianModel, ostro: OstrogradskiData | None = None,
                  primaries: Sequence[Expr] | None = None, samples: int = 20,
                  rng=None, max_iterations: int | None = None) -> DiracReport:
    """Primary constraints -> consistency conditions -> secondaries, multipliers and classes."""
    ostro = ostro or ostrogradski(m, DEFAULT_SAMPLES, random.Random(DEFAULT_SEED))
    H_c = canonical_H0(m, ostro)
    if primaries is None:
        hpi, hp = primary_constraints(m, ostro)
        primaries = hpi + hp
    prim = [from_ratfunc(as_ratfunc(p)) for p in primaries]
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(
        DEFAULT_SEED if rng is None else rng)
    nus = [parameter(f"nu{j + 1}") for j in range(len(prim))]
    surf = Surface(m)
    for p in prim:
        surf.add(p)
    constraints = list(prim)
    secondaries: List[Expr] = []
    steps: List[Step] = []
    bound = max_iterations if max_iterations is not None else 2 * m.n + 2
    pts = surf.sample(samples, gen)

    def vanishes(rf: RatFunc):
        red = surf.reduce(rf)
        if red.is_zero():
            return True, "symbolic"
        f = lambdify([from_ratfunc(red)], sorted(red.symbols() - set(m.param_symbols)),
                     {s: float(v) for s, v in m.param_symbols.items()})
        syms = sorted(red.symbols() - set(m.param_symbols))
        vals = [abs(f(np.array([pt[s] for s in syms]))[0]) for pt in pts]
        return max(vals, default=0.0) < ZERO_TOL, "numeric"

    rows, pivots = [], []
    for it in range(bound + 1):
        M, h = [], []
        for phi in constraints:
            M.append([surf.reduce(bracket(phi, pb, m)) for pb in prim])
            h.append(surf.reduce(bracket(phi, H_c, m)))
        aug = [r + [hh] for r, hh in zip(M, h)]
        rows, pivots = rref(aug) if aug else ([], [])
        # combinations free of every multiplier must vanish on their own
        new = []
        for lam in left_nullspace(M, len(M)):
            val = RatFunc.const(0)
            for l, hh in zip(lam, h):
                if not l.is_zero():
                    val = val + l * hh
            if not val.is_zero():
                new.append(val)
        added = False
        for cand in new:
            ok, mode = vanishes(cand)
            if ok:
                steps.append(Step(render(from_ratfunc(cand)), "vanishes", mode))
                continue
            red = surf.reduce(cand)
            if red.is_zero():
                continue
            if red.is_constant():
                raise InconsistentSystem(f"consistency requires {render(from_ratfunc(red))} = 0")
            expr = from_ratfunc(_primitive(red))
            steps.append(Step(render(expr), "secondary", "symbolic"))
            secondaries.append(expr)
            constraints.append(expr)
            surf.add(expr)
            pts = surf.sample(samples, gen)
            added = True
        if not added:
            break
    else:
        raise ClosureDiverged(f"Dirac iteration did not terminate within {bound} rounds")

    # multipliers from the final reduced system
    multipliers = [Multiplier(nu, p) for nu, p in zip(nus, prim)]
    pivot_cols = [pc for pc in pivots if pc < len(prim)]
    free_cols = [j for j in range(len(prim)) if j not in pivot_cols]
    for r, pc in zip(rows, pivots):
        if pc >= len(prim):
            continue
        val = -r[-1]
        for f in free_cols:
            val = val - r[f] * as_ratfunc(nus[f])
        multipliers[pc].determined = from_ratfunc(surf.reduce(val))
        steps.append(Step(str(nus[pc]), "multiplier", "symbolic"))

    HT = as_ratfunc(H_c)
    for mu in multipliers:
        coef = as_ratfunc(mu.name) if mu.free else mu.determined.ratfunc
        HT = HT + coef * mu.primary.ratfunc
    classification, ranks = _classify(constraints, m, pts)
    notes = []
    if len(prim) >= 2 * (m.n - 1) and m.n > 1:
        notes.append(f"{len(prim)} primaries is not below 2(n-1) = {2 * (m.n - 1)}")
    if surf.residuals:
        notes.append(f"{len(surf.residuals)} constraint(s) are not momentum-solvable")
    return DiracReport(prim, secondaries, multipliers, classification, from_ratfunc(HT), H_c,
                       steps, ranks, notes, surf)


def _classify(constraints: List[Expr], m: LagrangianModel, pts) -> tuple:
    k = len(constraints)
    if k == 0:
        return [], [0] * len(pts)
    entries = [[from_ratfunc(bracket(a, b, m)) for b in constraints] for a in constraints]
    flat = [e for row in entries for e in row]
    pvals = {s: float(v) for s, v in m.param_symbols.items()}
    fn = lambdify(flat, m.phase_symbols, pvals)
    first = [True] * k
    ranks = []
    for pt in pts:
        B = fn(np.array([pt[s] for s in m.phase_symbols])).reshape(k, k)
        ranks.append(int(np.linalg.matrix_rank(B, tol=SURFACE_TOL)) if B.any() else 0)
        for j in range(k):
            if np.max(np.abs(B[j])) > SURFACE_TOL:
                first[j] = False
    return ["FirstClass" if f else "SecondClass" for f in first], ranks


# -------------------------------------------------------------- comparison


@dataclass
class CheckResult:
    passed: bool
    detail: str


@dataclass
class EquivalenceReport:
    checks: Dict[str, CheckResult]
    max_cross_residual: float = 0.0

    @property
    def equivalent(self) -> bool:
        return all(c.passed for c in self.checks.values())

    @property
    def failures(self) -> List[str]:
        return [f"{k}: {c.detail}" for k, c in self.checks.items() if not c.passed]

    def raise_on_failure(self):
        if not self.equivalent:
            raise MismatchReport(self.failures)
        return self


def _max_abs(exprs: List[Expr], pts, m: LagrangianModel) -> float:
    if not exprs or not pts:
        return 0.0
    pvals = {s: float(v) for s, v in m.param_symbols.items()}
    fn = lambdify(exprs, m.phase_symbols, pvals)
    return max(float(np.max(np.abs(fn(np.array([pt[s] for s in m.phase_symbols]))))) for pt in pts)


def compare_with_hj(d: DiracReport, hj, samples: int = 100, rng=None) -> EquivalenceReport:
    """Cross-validate a Dirac report against a closed HJ system (``HJSystem``)."""
    from .hjpde import GenKind
    m = hj.model
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(
        DEFAULT_SEED + 1 if rng is None else rng)
    checks: Dict[str, CheckResult] = {}
    nd, nh = len(d.constraints), len(hj.constraints)
    checks["counts"] = CheckResult(nd == nh, f"Dirac {nd} constraints, HJ {nh}")

    hj_surface = Surface(m)
    for c in hj.constraints:
        hj_surface.add(c)
    pts_h = hj_surface.sample(samples, gen)
    pts_d = d.surface.sample(samples, gen) if d.surface else []
    r1 = _max_abs(d.constraints, pts_h, m)
    r2 = _max_abs(hj.constraints, pts_d, m)
    worst = max(r1, r2)
    checks["surfaces"] = CheckResult(worst < SURFACE_TOL,
                                     f"max |Dirac on HJ| = {r1:.3g}, max |HJ on Dirac| = {r2:.3g}")

    free_nu = len(d.free_multipliers)
    first_prim = sum(1 for p in d.primaries
                     if d.classification[d.constraints.index(p)] == "FirstClass")
    nfree = len(hj.free_parameters)
    checks["free_parameters"] = CheckResult(
        nfree == free_nu == first_prim,
        f"HJ free parameters {nfree}, free multipliers {free_nu}, first-class primaries {first_prim}")

    # map HJ parameters to Dirac multipliers through the shared primary constraint.
    # H_T is built on the canonical H0, which differs from the HJ H0 by a combination
    # of the p-type constraints, so dt_Y/dt = nu_Y + shift_Y.
    param_of, shift_of = {}, {}
    gap = from_ratfunc(canonical_H0(m, hj.ostro).ratfunc - hj.H0.ratfunc)
    for g in hj.generators:
        if g.kind in (GenKind.PGAMMA, GenKind.PIALPHA):
            for mu in d.multipliers:
                if (mu.primary.ratfunc - g.expr.ratfunc).is_zero():
                    param_of[g.parameter] = mu
                    shift_of[g.parameter] = diff(gap, g.momentum).ratfunc
    ok, details = True, []
    if len(param_of) != len(hj.gauge_parameters):
        ok = False
        details.append("primary constraints differ between the two analyses")
    nu_of = {p: mu.name for p, mu in param_of.items()}
    from .symexpr import TIME
    for rel in hj.relations:
        mu = param_of.get(rel.param)
        if mu is None or mu.free:
            ok = False
            details.append(f"d{rel.param.text} is determined in HJ but its multiplier is free")
            continue
        # HJ: dt_Y = c0 dt + sum c_Z dt_Z  <->  Dirac: nu_Y + s_Y = c0 + sum c_Z (nu_Z + s_Z)
        hj_expr = as_ratfunc(0)
        for y, c in rel.coeffs.items():
            rate = RatFunc.const(1) if y == TIME else as_ratfunc(nu_of[y]) + shift_of[y]
            hj_expr = hj_expr + c.ratfunc * rate
        gap_y = from_ratfunc(mu.determined.ratfunc + shift_of[rel.param] - hj_expr)
        pts = []
        for pt in pts_h[:10]:
            pt = dict(pt)
            pt.update(zip(nu_of.values(), gen.uniform(-1, 1, len(nu_of))))
            pts.append(pt)
        syms = sorted(gap_y.ratfunc.symbols() - set(m.param_symbols))
        if syms:
            fn = lambdify([gap_y], syms, {s: float(v) for s, v in m.param_symbols.items()})
            err = max(abs(fn(np.array([pt[s] for s in syms]))[0]) for pt in pts)
        else:
            err = abs(float(gap_y.ratfunc.evaluate({s: float(v) for s, v in m.param_symbols.items()})))
        if err > SURFACE_TOL:
            ok = False
            details.append(f"relation for d{rel.param.text} disagrees with {mu.name} by {err:.3g}")
        else:
            details.append(f"d{rel.param.text} <-> {mu.name} = {render(mu.determined)}")
    determined = [mu for mu in d.multipliers if not mu.free]
    if len(determined) != len(hj.relations):
        ok = False
        details.append(f"{len(determined)} determined multipliers vs {len(hj.relations)} relations")
    checks["relations"] = CheckResult(ok, "; ".join(details) or "no determined parameters")
    return EquivalenceReport(checks, worst)


# ------------------------------------------------------------- H_T flow


def total_hamiltonian_flow(d: DiracReport, m: LagrangianModel, z0: np.ndarray,
                           nu: Dict[Symbol, Callable[[float], float]], t_end: float = 1.0,
                           steps: int = 10_000) -> np.ndarray:
    """Integrate dz/dt = {z, H_T} with free multipliers prescribed as functions of time.

    Returns the sampled states, shape (steps + 1, 4n).
    """
    from .dynamics import rk4
    phase = m.phase_symbols
    HT = d.total_hamiltonian.ratfunc
    free = [mu.name for mu in d.free_multipliers]
    rhs_exprs = []
    for i in range(m.n):
        rhs_exprs.append(from_ratfunc(HT.diff(m.p(i))))
    for i in range(m.n):
        rhs_exprs.append(from_ratfunc(HT.diff(m.pi(i))))
    for i in range(m.n):
        rhs_exprs.append(from_ratfunc(-HT.diff(m.q(i))))
    for i in range(m.n):
        rhs_exprs.append(from_ratfunc(-HT.diff(m.qbar(i))))
    pvals = {s: float(v) for s, v in m.param_symbols.items()}
    fn = lambdify(rhs_exprs, phase + free, pvals)

    def f(t, z):
        return fn(np.concatenate([z, [nu[s](t) for s in free]]))

    return rk4(f, np.asarray(z0, dtype=float), 0.0, t_end, steps)
