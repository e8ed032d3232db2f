"""Hamilton-Jacobi generators, total differential equations and integrability closure."""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .errors import ClosureDiverged, InconsistentSystem
from .model import LagrangianModel, OstrogradskiData, canonical_H0, ostrogradski
from .symexpr import (ENERGY, TIME, Expr, Kind, Symbol, as_ratfunc, diff, from_ratfunc,
                      linear_coefficient, normalize, render)
from .symexpr.expr import substitute_rf
from .symexpr.linalg import DEFAULT_SAMPLES, DEFAULT_SEED
from .symexpr.poly import RatFunc


class GenKind(enum.Enum):
    H0 = "H0prime"
    PGAMMA = "Pgamma"
    PIALPHA = "PiAlpha"
    SECONDARY = "Secondary"


@dataclass(frozen=True)
class HJGenerator:
    kind: GenKind
    expr: Expr
    parameter: Optional[Symbol] = None
    momentum: Optional[Symbol] = None  # the unit-coefficient momentum (P0, p_gamma, pi_alpha)
    index: int = 0

    @property
    def label(self) -> str:
        if self.kind == GenKind.H0:
            return "H0'"
        if self.kind == GenKind.SECONDARY:
            return f"S{self.index}"
        return f"{self.kind.value}[{self.parameter.text}]"

    @property
    def hamiltonian_part(self) -> Expr:
        """H_X: the generator with its own momentum removed."""
        if self.momentum is None:
            return self.expr
        return from_ratfunc(self.expr.ratfunc - as_ratfunc(self.momentum))


@dataclass
class Relation:
    """``d(param) = sum_Y coeffs[Y] d(Y)`` with Y ranging over independent parameters."""
    param: Symbol
    coeffs: Dict[Symbol, Expr]

    def render(self) -> str:
        rhs = " + ".join(f"({render(c)})*d{y.text}" for y, c in self.coeffs.items()) or "0"
        return f"d{self.param.text} = {rhs}"


@dataclass
class HJSystem:
    model: LagrangianModel
    ostro: OstrogradskiData
    H0: Expr
    generators: List[HJGenerator]
    subs: Dict[Symbol, RatFunc] = field(default_factory=dict)
    relations: List[Relation] = field(default_factory=list)
    residual_constraints: List[Expr] = field(default_factory=list)

    @property
    def h0_generator(self) -> HJGenerator:
        return self.generators[0]

    @property
    def parametrized(self) -> List[HJGenerator]:
        return [g for g in self.generators if g.parameter is not None]

    @property
    def parameters(self) -> List[Symbol]:
        return [g.parameter for g in self.parametrized]

    @property
    def gauge_parameters(self) -> List[Symbol]:
        return [g.parameter for g in self.parametrized if g.kind != GenKind.H0]

    @property
    def determined_parameters(self) -> List[Symbol]:
        return [r.param for r in self.relations]

    @property
    def free_parameters(self) -> List[Symbol]:
        det = set(self.determined_parameters)
        return [p for p in self.gauge_parameters if p not in det]

    @property
    def constraints(self) -> List[Expr]:
        """Every phase-space constraint (all generators except H0')."""
        return [g.expr for g in self.generators if g.kind != GenKind.H0] + list(self.residual_constraints)

    @property
    def primaries(self) -> List[Expr]:
        return [g.expr for g in self.generators if g.kind in (GenKind.PGAMMA, GenKind.PIALPHA)]

    @property
    def secondaries(self) -> List[Expr]:
        return [g.expr for g in self.generators if g.kind == GenKind.SECONDARY] + list(self.residual_constraints)

    def reduce(self, e) -> RatFunc:
        """Reduce modulo the momentum-solved constraints."""
        return substitute_rf(as_ratfunc(e), self.subs)

    def copy(self) -> HJSystem:
        return HJSystem(self.model, self.ostro, self.H0, list(self.generators), dict(self.subs),
                        list(self.relations), list(self.residual_constraints))


# ------------------------------------------------------------------ building


def _add_solved(subs: Dict[Symbol, RatFunc], mom: Symbol, value: RatFunc):
    value = substitute_rf(value, subs)
    for k in list(subs):
        if mom in subs[k].symbols():
            subs[k] = substitute_rf(subs[k], {mom: value})
    subs[mom] = value


def solvable_momentum(e) -> Optional[tuple]:
    """``(momentum, coeff, rest)`` with e = coeff*momentum + rest, coeff free of phase symbols."""
    rf = as_ratfunc(e)
    for s in sorted(rf.symbols()):
        if not s.is_momentum:
            continue
        lc = linear_coefficient(rf, s)
        if lc is None:
            continue
        c, rest = lc
        if c.is_zero() or any(x.kind != Kind.PARAM for x in c.symbols()):
            continue
        return s, c, rest
    return None


def build_hj_system(m: LagrangianModel, ostro: OstrogradskiData | None = None,
                    samples: int = DEFAULT_SAMPLES, rng=None) -> HJSystem:
    """H0' = P0 + H0 and one generator per primary constraint."""
    rng = rng or random.Random(DEFAULT_SEED)
    ostro = ostro or ostrogradski(m, samples, rng)
    # p_gamma is eliminated from H0 so that H'0 generates no motion along the t_gamma directions
    H0 = from_ratfunc(substitute_rf(canonical_H0(m, ostro).ratfunc,
                                    {m.p(g): -ostro.H_p[g].ratfunc for g in ostro.gamma_idx}))
    gens = [HJGenerator(GenKind.H0, normalize(as_ratfunc(ENERGY) + H0.ratfunc), TIME, ENERGY)]
    subs: Dict[Symbol, RatFunc] = {}
    for gm in ostro.gamma_idx:
        mom = m.p(gm)
        expr = normalize(as_ratfunc(mom) + ostro.H_p[gm].ratfunc)
        gens.append(HJGenerator(GenKind.PGAMMA, expr, m.q(gm), mom, gm + 1))
        _add_solved(subs, mom, -ostro.H_p[gm].ratfunc)
    for al in ostro.alpha_idx:
        mom = m.pi(al)
        expr = normalize(as_ratfunc(mom) + ostro.H_pi[al].ratfunc)
        gens.append(HJGenerator(GenKind.PIALPHA, expr, m.qbar(al), mom, al + 1))
        _add_solved(subs, mom, -ostro.H_pi[al].ratfunc)
    return HJSystem(m, ostro, H0, gens, subs)


# --------------------------------------------------------------- equations


def conjugate_of(m: LagrangianModel, z: Symbol) -> tuple:
    """``(partner, sign)`` so that dz = sign * dH'/d(partner) dt."""
    i = z.index - 1
    if z.kind == Kind.COORD:
        return m.p(i), 1
    if z.kind == Kind.VEL:
        return m.pi(i), 1
    if z.kind == Kind.P:
        return m.q(i), -1
    if z.kind == Kind.PI:
        return m.qbar(i), -1
    if z.kind == Kind.ENERGY:
        return TIME, -1
    raise ValueError(f"{z} is not a phase variable")


@dataclass
class TotalDiffSystem:
    variables: List[Symbol]
    parameters: List[Symbol]
    coefficients: Dict[Symbol, Dict[Symbol, Expr]]

    def column(self, param: Symbol) -> Dict[Symbol, Expr]:
        return {z: self.coefficients[z][param] for z in self.variables}


def total_diff_equations(sys: HJSystem) -> TotalDiffSystem:
    m = sys.model
    variables = m.phase_symbols + [ENERGY]
    params = sys.parameters
    table: Dict[Symbol, Dict[Symbol, Expr]] = {}
    for z in variables:
        partner, sign = conjugate_of(m, z)
        row = {}
        for g in sys.parametrized:
            d = diff(g.expr, partner)
            row[g.parameter] = d if sign > 0 else normalize(-d.ratfunc)
        table[z] = row
    return TotalDiffSystem(variables, params, table)


def poisson(F, G, m: LagrangianModel, extended: bool = False) -> Expr:
    """{F, G} over the pairs (q, p) and (q', pi); ``extended`` adds (t, P0)."""
    Fr, Gr = as_ratfunc(F), as_ratfunc(G)
    fs, gs = Fr.symbols(), Gr.symbols()
    out = RatFunc.const(0)
    pairs = [(m.q(i), m.p(i)) for i in range(m.n)] + [(m.qbar(i), m.pi(i)) for i in range(m.n)]
    if extended:
        pairs.append((TIME, ENERGY))
    for x, px in pairs:
        if x in fs and px in gs:
            out = out + Fr.diff(x) * Gr.diff(px)
        if px in fs and x in gs:
            out = out - Fr.diff(px) * Gr.diff(x)
    return from_ratfunc(out)


@dataclass
class Variation:
    raw: Dict[Symbol, Expr]
    reduced: Dict[Symbol, Expr]

    @property
    def vanishes(self) -> bool:
        return all(v.is_zero() for v in self.reduced.values())

    @property
    def identically_zero(self) -> bool:
        return all(v.is_zero() for v in self.raw.values())


def _apply_relations(coeffs: Dict[Symbol, RatFunc], relations: List[Relation]) -> Dict[Symbol, RatFunc]:
    out = dict(coeffs)
    for rel in relations:
        c = out.pop(rel.param, None)
        if c is None or c.is_zero():
            continue
        for y, r in rel.coeffs.items():
            out[y] = out.get(y, RatFunc.const(0)) + c * r.ratfunc
    return out


def variation(g: HJGenerator, sys: HJSystem) -> Variation:
    """dH'_g = sum_X {g, H'_X} dt_X, raw and reduced modulo constraints and relations."""
    m = sys.model
    raw = {}
    for h in sys.parametrized:
        raw[h.parameter] = poisson(g.expr, h.expr, m, extended=True).ratfunc
    reduced = _apply_relations(raw, sys.relations)
    reduced = {k: from_ratfunc(sys.reduce(v)) for k, v in reduced.items()}
    return Variation({k: from_ratfunc(v) for k, v in raw.items()}, reduced)


# ----------------------------------------------------------------- closure


class Status(enum.Enum):
    CLOSED = "Closed"
    CLOSED_DETERMINED = "ClosedWithDeterminedParameters"
    FAILED = "Failed"


@dataclass
class ClosureReport:
    iterations: int
    added_secondaries: List[Expr]
    parameter_relations: List[Relation]
    final_status: Status
    variation_table: Dict[str, Variation]
    residual_constraints: List[Expr] = field(default_factory=list)
    secondaries_identically_zero: bool = True
    reason: str = ""
    notes: List[str] = field(default_factory=list)


def _monic_secondary(expr: RatFunc):
    hit = solvable_momentum(expr)
    if hit is None:
        content = expr.num.content()
        lead = expr.num.leading()[1]
        scale = 1 / content if lead > 0 else -1 / content
        return expr * RatFunc.const(scale), None
    mom, c, rest = hit
    # keep parameter factors (k*p rather than p) but strip rational content and sign
    scale = c.num.leading()[1] / c.den.leading()[1]
    return expr / RatFunc.const(scale), (mom, from_ratfunc(-rest / c))


def integrability_closure(sys: HJSystem, max_iterations: int | None = None):
    """Iterate the integrability conditions until every variation vanishes on the surface.

    Returns ``(augmented system, ClosureReport)``.
    """
    work = sys.copy()
    m = work.model
    bound = max_iterations if max_iterations is not None else 2 * m.n + 2
    added: List[Expr] = []
    notes: List[str] = []
    iterations = 0
    while True:
        pending_secondaries = []
        pending_relations = []
        for g in work.generators:
            if g.kind == GenKind.H0:
                continue
            var = variation(g, work)
            if var.vanishes:
                continue
            c0 = var.reduced.get(TIME)
            others = {k: v for k, v in var.reduced.items() if k != TIME and not v.is_zero()}
            if not others:
                pending_secondaries.append(c0.ratfunc)
            else:
                pending_relations.append(var.reduced)
        for g_res in work.residual_constraints:
            var = variation(HJGenerator(GenKind.SECONDARY, g_res), work)
            if not var.vanishes:
                others = {k: v for k, v in var.reduced.items() if k != TIME and not v.is_zero()}
                if others:
                    pending_relations.append(var.reduced)
                else:
                    pending_secondaries.append(var.reduced[TIME].ratfunc)
        if not pending_secondaries and not pending_relations:
            break
        iterations += 1
        if iterations > bound:
            raise ClosureDiverged(f"closure did not converge within {bound} iterations")
        progressed = False
        for cand in pending_secondaries:
            red = work.reduce(cand)
            if red.is_zero():
                continue
            if red.is_constant() or not (red.symbols() - {s for s in red.symbols() if s.kind == Kind.PARAM}):
                raise InconsistentSystem(f"integrability condition reduces to {render(from_ratfunc(red))} != 0")
            monic, solved = _monic_secondary(red)
            expr = from_ratfunc(monic)
            if solved is None:
                work.residual_constraints.append(expr)
                notes.append(f"secondary {render(expr)} is not momentum-solvable; kept as residual")
            else:
                k = sum(1 for g in work.generators if g.kind == GenKind.SECONDARY) + 1
                work.generators.append(HJGenerator(GenKind.SECONDARY, expr, None, None, k))
                _add_solved(work.subs, solved[0], solved[1].ratfunc)
            added.append(expr)
            progressed = True
        if progressed:
            continue
        for eq in pending_relations:
            coeffs = _apply_relations({k: v.ratfunc for k, v in eq.items()}, work.relations)
            coeffs = {k: work.reduce(v) for k, v in coeffs.items()}
            cands = [k for k, v in coeffs.items() if k != TIME and not v.is_zero()]
            if not cands:
                c0 = coeffs.get(TIME)
                if c0 is not None and not c0.is_zero():
                    pending_secondaries.append(c0)
                continue
            piv = min(cands, key=lambda k: (not coeffs[k].is_constant(), k.sort_key))
            cp = coeffs[piv]
            rel = Relation(piv, {y: from_ratfunc(-v / cp) for y, v in coeffs.items() if y != piv})
            for old in work.relations:
                if piv in old.coeffs:
                    c = old.coeffs.pop(piv).ratfunc
                    for y, v in rel.coeffs.items():
                        old.coeffs[y] = from_ratfunc(old.coeffs.get(y, RatFunc.const(0)).ratfunc
                                                     + c * v.ratfunc) if y in old.coeffs else \
                            from_ratfunc(c * v.ratfunc)
            work.relations.append(rel)
            progressed = True
            break
        if not progressed:
            for cand in pending_secondaries:
                red = work.reduce(cand)
                if not red.is_zero():
                    raise InconsistentSystem(f"condition {render(from_ratfunc(red))} cannot be satisfied")
            break
    table = {g.label: variation(g, work) for g in work.generators}
    for k, r in enumerate(work.residual_constraints, start=1):
        table[f"R{k}"] = variation(HJGenerator(GenKind.SECONDARY, r, index=k), work)
    bad = [lbl for lbl, v in table.items() if not v.vanishes]
    if bad:  # pragma: no cover - loop exits only when all vanish
        raise ClosureDiverged(f"variations of {', '.join(bad)} do not vanish")
    ident = all(table[g.label].identically_zero for g in work.generators if g.kind == GenKind.SECONDARY)
    status = Status.CLOSED_DETERMINED if work.relations else Status.CLOSED
    report = ClosureReport(iterations, added, list(work.relations), status, table,
                           list(work.residual_constraints), ident, notes=notes)
    return work, report


def unparametrized_gauge_variables(sys: HJSystem) -> List[Symbol]:
    """Phase variables moved by first-class secondaries.

    Secondaries carry no parameter, so motion they generate is not fixed by
    the endpoint parameter values; such components are gauge-dependent in a
    way no path can control.
    """
    m = sys.model
    out = []
    secs = [g.expr for g in sys.generators if g.kind == GenKind.SECONDARY]
    cons = sys.constraints
    first = [phi for phi in secs
             if all(sys.reduce(poisson(phi, c, m)).is_zero() for c in cons)]
    for z in m.phase_symbols:
        partner, _ = conjugate_of(m, z)
        if any(not sys.reduce(diff(phi, partner)).is_zero() for phi in first):
            out.append(z)
    return out


# ------------------------------------------------------------------ action


def emit_action_integrand(sys: HJSystem, reduced: bool = False) -> Dict[Symbol, Expr]:
    """Coefficient of each parameter differential in dZ.

    For generator X with Hamiltonian part H_X the integrand is
    ``-H_X + sum_z z * dH'_X/dz`` over the momenta p, pi other than X's own
    unit momentum; for H0' this is the Legendre combination
    ``-H0 + p dH0/dp + pi dH0/dpi``.
    """
    m = sys.model
    moms = [m.p(i) for i in range(m.n)] + [m.pi(i) for i in range(m.n)]
    out = {}
    for g in sys.parametrized:
        HX = g.hamiltonian_part.ratfunc
        acc = -HX
        for z in moms:
            if z == g.momentum or z not in HX.symbols():
                continue
            acc = acc + as_ratfunc(z) * HX.diff(z)
        if reduced:
            acc = sys.reduce(acc)
        out[g.parameter] = from_ratfunc(acc)
    return out


def analyze(m: LagrangianModel, samples: int = DEFAULT_SAMPLES, rng=None):
    """Convenience: model -> (closed system, closure report)."""
    rng = rng or random.Random(DEFAULT_SEED)
    sys = build_hj_system(m, samples=samples, rng=rng)
    return integrability_closure(sys)
