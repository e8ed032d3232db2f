"""Analysis pipeline and report rendering (JSON, text, LaTeX)."""
from __future__ import annotations

import dataclasses
import json
import math
import random
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .dirac import DiracReport, EquivalenceReport, compare_with_hj, dirac_analyze
from .hjpde import (ClosureReport, GenKind, HJSystem, TotalDiffSystem, build_hj_system,
                    emit_action_integrand, integrability_closure, total_diff_equations)
from .model import LagrangianModel, OstrogradskiData, canonical_H0, euler_lagrange, ostrogradski
from .symexpr import DEFAULT_SAMPLES, DEFAULT_SEED, Expr, render, render_latex

SCHEMA = 1


@dataclass
class Analysis:
    """Every intermediate object of one model analysis."""
    model: LagrangianModel
    ostro: OstrogradskiData
    H0_canonical: Expr
    EL: List[Expr]
    hj_primary: HJSystem
    hj: HJSystem
    closure: ClosureReport
    tds: TotalDiffSystem
    integrands: Dict
    dirac: DiracReport
    equivalence: EquivalenceReport
    seed: int
    samples: int


def run_analysis(m: LagrangianModel, seed: int = DEFAULT_SEED, samples: int = DEFAULT_SAMPLES,
                 dirac_samples: int = 20, compare_samples: int = 100) -> Analysis:
    """model -> Ostrogradski data -> HJ system -> closure -> Dirac cross-check -> action."""
    rng = random.Random(seed)
    ostro = ostrogradski(m, samples, rng)
    H0c = canonical_H0(m, ostro)
    sys0 = build_hj_system(m, ostro)
    sys, closure = integrability_closure(sys0)
    tds = total_diff_equations(sys)
    integrands = emit_action_integrand(sys, reduced=True)
    nprng = np.random.default_rng(seed)
    dr = dirac_analyze(m, ostro, sys0.primaries, samples=dirac_samples, rng=nprng)
    eq = compare_with_hj(dr, sys, samples=compare_samples, rng=nprng)
    return Analysis(m, ostro, H0c, euler_lagrange(m), sys0, sys, closure, tds, integrands, dr, eq,
                    seed, samples)


# ------------------------------------------------------------------ report


def _fx(e) -> str:
    return "0" if e is None else render(e)


@dataclass
class AnalysisReport:
    schema: int
    tool_version: str
    seed: int
    samples: int
    model: Dict[str, Any]
    hessians: Dict[str, Any]
    momenta: Dict[str, Any]
    accelerations: Dict[str, Any]
    euler_lagrange: List[str]
    primary_constraints: Dict[str, List[str]]
    H0_canonical: str
    H0: str
    generators: List[Dict[str, Any]]
    total_differential: Dict[str, Any]
    closure: Dict[str, Any]
    dirac: Dict[str, Any]
    equivalence: Dict[str, Any]
    action_integrands: Dict[str, str]
    summary: Dict[str, Any]
    notes: List[str] = field(default_factory=list)

    # -- construction
    @classmethod
    def from_analysis(cls, a: Analysis) -> AnalysisReport:
        m, o, sys, cl, d = a.model, a.ostro, a.hj, a.closure, a.dirac
        matrix = lambda W: [[_fx(x) for x in row] for row in W]  # noqa: E731
        hj_prims = [g for g in sys.generators if g.kind in (GenKind.PGAMMA, GenKind.PIALPHA)]
        return cls(
            schema=SCHEMA,
            tool_version=__version__,
            seed=a.seed,
            samples=a.samples,
            model={"name": m.name, "coords": list(m.coords),
                   "params": {k: str(v) for k, v in m.params.items()}, "L": _fx(m.L)},
            hessians={"W_pi": matrix(o.W_pi), "rank_pi": o.rank_pi, "W_p": matrix(o.W_p),
                      "rank_p": o.rank_p, "R": o.R, "r": o.r, "r_hessian": o.r_hessian},
            momenta={"p": [_fx(x) for x in o.p_defs], "pi": [_fx(x) for x in o.pi_defs]},
            accelerations={"solvable": [m.coords[i] for i in o.a_idx],
                           "unsolvable": [m.coords[i] for i in o.alpha_idx],
                           "w": {s.text: _fx(v) for s, v in o.w.items()}},
            euler_lagrange=[_fx(e) for e in a.EL],
            primary_constraints={
                "pi_type": [_fx(g.expr) for g in hj_prims if g.kind == GenKind.PIALPHA],
                "p_type": [_fx(g.expr) for g in hj_prims if g.kind == GenKind.PGAMMA]},
            H0_canonical=_fx(a.H0_canonical),
            H0=_fx(sys.H0),
            generators=[{"label": g.label, "kind": g.kind.value, "expr": _fx(g.expr),
                         "parameter": g.parameter.text if g.parameter else None}
                        for g in sys.generators],
            total_differential={
                "variables": [z.text for z in a.tds.variables],
                "parameters": [p.text for p in a.tds.parameters],
                "coefficients": {z.text: {p.text: _fx(c) for p, c in row.items()}
                                 for z, row in a.tds.coefficients.items()}},
            closure={
                "status": cl.final_status.value,
                "iterations": cl.iterations,
                "secondaries": [_fx(e) for e in cl.added_secondaries],
                "relations": [{"parameter": r.param.text,
                               "coefficients": {y.text: _fx(c) for y, c in r.coeffs.items()}}
                              for r in cl.parameter_relations],
                "residual_constraints": [_fx(e) for e in cl.residual_constraints],
                "identically_zero": cl.secondaries_identically_zero,
                "free_parameters": [p.text for p in sys.free_parameters],
                "variations": {lbl: {p.text: {"raw": _fx(v.raw[p]), "reduced": _fx(v.reduced.get(p))}
                                     for p in v.raw}
                               for lbl, v in cl.variation_table.items()},
                "notes": list(cl.notes)},
            dirac={
                "primaries": [_fx(e) for e in d.primaries],
                "secondaries": [_fx(e) for e in d.secondaries],
                "multipliers": [{"name": mu.name.text, "primary": _fx(mu.primary),
                                 "determined": None if mu.free else _fx(mu.determined)}
                                for mu in d.multipliers],
                "classification": list(d.classification),
                "total_hamiltonian": _fx(d.total_hamiltonian),
                "steps": [dataclasses.asdict(s) for s in d.steps],
                "bracket_ranks": list(d.bracket_ranks),
                "notes": list(d.notes)},
            equivalence={"equivalent": a.equivalence.equivalent,
                         "max_cross_residual": float(a.equivalence.max_cross_residual),
                         "checks": {k: {"passed": c.passed, "detail": c.detail}
                                    for k, c in a.equivalence.checks.items()}},
            action_integrands={p.text: _fx(v) for p, v in a.integrands.items()},
            summary={"primaries": len(sys.primaries), "secondaries": len(sys.secondaries),
                     "first_class": d.first_class, "second_class": d.second_class,
                     "free_parameters": len(sys.free_parameters),
                     "relations": len(sys.relations)},
            notes=list(o.notes),
        )

    # -- JSON
    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> AnalysisReport:
        names = {f.name for f in dataclasses.fields(cls)}
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(**{k: v for k, v in data.items() if k in names})

    @classmethod
    def from_json(cls, text: str) -> AnalysisReport:
        return cls.from_dict(json.loads(text))

    # -- text
    def to_text(self) -> str:
        out: List[str] = []
        add = out.append
        mdl = self.model
        add(f"model {mdl['name']}   coords: {' '.join(mdl['coords'])}")
        if mdl["params"]:
            add("params: " + ", ".join(f"{k} = {v}" for k, v in mdl["params"].items()))
        add(f"L = {mdl['L']}")
        h = self.hessians
        add("")
        add(f"acceleration Hessian rank {h['rank_pi']} (R = {h['R']}), "
            f"velocity Hessian rank {h['rank_p']}; p-type constraints r = {h['r']}")
        add("momenta:")
        for c, p, pi in zip(mdl["coords"], self.momenta["p"], self.momenta["pi"]):
            add(f"  p_{c} = {p}")
            add(f"  pi_{c} = {pi}")
        for k, v in self.accelerations["w"].items():
            add(f"  {k} = {v}")
        add("Euler-Lagrange:")
        for e in self.euler_lagrange:
            add(f"  {e} = 0")
        add(f"H0 (canonical) = {self.H0_canonical}")
        add(f"H0 (generator) = {self.H0}")
        add("")
        add("HJ generators:")
        for g in self.generators:
            par = f"   [d{g['parameter']}]" if g["parameter"] else ""
            add(f"  {g['label']}: {g['expr']} = 0{par}")
        cl = self.closure
        add(f"closure: {cl['status']} after {cl['iterations']} iteration(s)")
        for s in cl["secondaries"]:
            add(f"  secondary: {s} = 0")
        for r in cl["relations"]:
            rhs = " + ".join(f"({c}) d{y}" for y, c in r["coefficients"].items())
            add(f"  relation: d{r['parameter']} = {rhs}")
        if cl["secondaries"]:
            add(f"  secondaries identically conserved: {'yes' if cl['identically_zero'] else 'no'}")
        add(f"  free gauge parameters: {', '.join(cl['free_parameters']) or 'none'}")
        add("")
        td = self.total_differential
        add("total differential equations:")
        for z in td["variables"]:
            terms = [f"({c}) d{p}" for p, c in td["coefficients"][z].items() if c != "0"]
            add(f"  d{z} = {' + '.join(terms) or '0'}")
        add("action integrand dZ:")
        for p, v in self.action_integrands.items():
            add(f"  d{p}: {v}")
        d = self.dirac
        add("")
        add("Dirac cross-check:")
        for c, cls_ in zip(d["primaries"] + d["secondaries"], d["classification"]):
            add(f"  {c} = 0   {cls_}")
        for mu in d["multipliers"]:
            add(f"  {mu['name']} ({mu['primary']}): {mu['determined'] if mu['determined'] is not None else 'free'}")
        eq = self.equivalence
        add(f"equivalence: {'yes' if eq['equivalent'] else 'NO'} "
            f"(max cross residual {eq['max_cross_residual']:.3g})")
        for k, c in eq["checks"].items():
            add(f"  [{'ok' if c['passed'] else 'FAIL'}] {k}: {c['detail']}")
        s = self.summary
        add("")
        add("summary: " + ", ".join(f"{k} {v}" for k, v in s.items()))
        for n in self.notes + cl["notes"] + d["notes"]:
            add(f"note: {n}")
        return "\n".join(out) + "\n"


# ------------------------------------------------------------------ JSON


_FLOAT_TAG = "\x00f17:"
_FLOAT_RE = re.compile(r'"\\u0000f17:([^"]*)"')


def _tag_floats(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _FLOAT_TAG + (format(x, ".17g") if math.isfinite(x) else "null")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON with every float written to 17 significant digits."""
    text = json.dumps(_tag_floats(obj), indent=2, ensure_ascii=False)
    return _FLOAT_RE.sub(lambda mt: mt.group(1), text) + "\n"


# ------------------------------------------------------------------ LaTeX


def to_latex(a: Analysis) -> str:
    """Standalone LaTeX document: constraints, HJ system and the total differential table."""
    sys, cl = a.hj, a.closure
    L = [r"\documentclass{article}", r"\usepackage{amsmath}", r"\begin{document}",
         r"\section*{Model \texttt{%s}}" % a.model.name.replace("-", "{-}"),
         r"\[ L = %s \]" % render_latex(a.model.L)]
    prims = [g for g in sys.generators if g.kind in (GenKind.PGAMMA, GenKind.PIALPHA)]
    secs = [g for g in sys.generators if g.kind == GenKind.SECONDARY]
    L.append(r"\subsection*{Constraints (%d primary, %d secondary)}" % (len(prims), len(secs)))
    if prims or secs:
        L.append(r"\begin{align*}")
        rows = [r"H'_{%s} &= %s = 0 && \text{%s}" % (g.label.replace("[", "(").replace("]", ")")
                                                       .replace("'", r"'"), render_latex(g.expr),
                                                       "primary" if g in prims else "secondary")
                for g in prims + secs]
        L.append(" \\\\\n".join(rows))
        L.append(r"\end{align*}")
    L.append(r"\subsection*{Hamilton--Jacobi system (%d equations)}" % len(sys.parametrized))
    L.append(r"\begin{align*}")
    L.append(" \\\\\n".join(r"%s &= 0 && d%s" % (render_latex(g.expr), g.parameter.latex)
                            for g in sys.parametrized))
    L.append(r"\end{align*}")
    params = a.tds.parameters
    L.append(r"\subsection*{Total differential equations (%d equations)}" % len(a.tds.variables))
    L.append(r"\begin{align*}")
    rows = []
    for z in a.tds.variables:
        terms = []
        for p in params:
            c = a.tds.coefficients[z][p]
            if not c.is_zero():
                terms.append(r"\left(%s\right) d%s" % (render_latex(c), p.latex))
        rows.append(r"d%s &= %s" % (z.latex, " + ".join(terms) or "0"))
    terms = [r"\left(%s\right) d%s" % (render_latex(v), p.latex) for p, v in a.integrands.items()
             if not v.is_zero()]
    rows.append(r"dZ &= %s" % (" + ".join(terms) or "0"))
    L.append(" \\\\\n".join(rows))
    L.append(r"\end{align*}")
    L.append(r"\noindent Closure: %s after %d iteration(s)." % (cl.final_status.value, cl.iterations))
    L.append(r"\end{document}")
    return "\n".join(L) + "\n"


def summarize_counts(a: Analysis) -> Dict[str, int]:
    d = a.dirac
    return {"primaries": len(a.hj.primaries), "secondaries": len(a.hj.secondaries),
            "first_class": d.first_class, "second_class": d.second_class,
            "free_parameters": len(a.hj.free_parameters), "relations": len(a.hj.relations)}


def json_ready(x: Optional[float]):
    return None if x is None or not math.isfinite(x) else float(x)
