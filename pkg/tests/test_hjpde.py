import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ostrohj.builtins import BUILTINS, T1, T2, T3
from ostrohj.errors import ClosureDiverged, InconsistentSystem
from ostrohj.hjpde import (GenKind, Status, build_hj_system, emit_action_integrand,
                           integrability_closure, poisson, total_diff_equations,
                           unparametrized_gauge_variables, variation)
from ostrohj.model import canonical_H0, ostrogradski, parse_model
from ostrohj.symexpr import TIME, Const, Sym, ZERO, diff, equal, parse

t1, t2, t3 = (parse_model(x) for x in (T1, T2, T3))


def E(m, text):
    return parse(text, m.symtab)


def gens(sys):
    return {g.label: g for g in sys.generators}


# ------------------------------------------------------------- generators


def test_regular_model_has_only_H0_generator():
    sys = build_hj_system(t1)
    assert [g.kind for g in sys.generators] == [GenKind.H0]
    assert equal(sys.generators[0].expr, E(t1, "P0 + p_q*q' + 1/2*pi_q^2"))


def test_t3_generators_and_parameters():
    sys = build_hj_system(t3)
    g = gens(sys)
    assert set(g) == {"H0'", "Pgamma[q2]", "PiAlpha[q2']"}
    assert equal(g["Pgamma[q2]"].expr, E(t3, "p_q2 - pi_q1"))
    assert g["Pgamma[q2]"].parameter == t3.q(1)
    assert equal(g["PiAlpha[q2']"].expr, E(t3, "pi_q2"))
    assert g["PiAlpha[q2']"].parameter == t3.qbar(1)
    assert g["H0'"].parameter == TIME


def test_generators_have_unit_momentum_coefficient():
    for b in BUILTINS.values():
        for g in build_hj_system(b.model()).generators:
            assert diff(g.expr, g.momentum) == Const(1)


def test_podolsky_generator_kinds():
    sys = build_hj_system(BUILTINS["podolsky-mode"].model())
    kinds = [g.kind for g in sys.generators]
    assert kinds.count(GenKind.H0) == 1
    assert kinds.count(GenKind.PGAMMA) == 2 and kinds.count(GenKind.PIALPHA) == 2


# ------------------------------------------------------- total differentials


def test_t3_total_differential_entries():
    tds = total_diff_equations(build_hj_system(t3))
    dq1 = tds.coefficients[t3.q(0)]
    assert equal(dq1[TIME], E(t3, "q1'")) and all(v.is_zero() for k, v in dq1.items() if k != TIME)
    dqb2 = tds.coefficients[t3.qbar(1)]
    assert dqb2[t3.qbar(1)] == Const(1)
    assert all(v.is_zero() for k, v in dqb2.items() if k != t3.qbar(1))
    assert all(v.is_zero() for v in tds.coefficients[t3.p(0)].values())


def test_regular_time_column_reproduces_hamilton_equations():
    o = ostrogradski(t1)
    H0 = canonical_H0(t1, o)
    col = total_diff_equations(build_hj_system(t1)).column(TIME)
    assert equal(col[t1.q(0)], diff(H0, t1.p(0)))
    assert equal(col[t1.qbar(0)], diff(H0, t1.pi(0)))
    assert equal(col[t1.p(0)], -diff(H0, t1.q(0)))
    assert equal(col[t1.pi(0)], -diff(H0, t1.qbar(0)))


# ------------------------------------------------------------ Poisson bracket


def test_canonical_pairs():
    assert poisson(Sym(t3.q(0)), Sym(t3.p(0)), t3) == Const(1)
    assert poisson(Sym(t3.qbar(0)), Sym(t3.pi(0)), t3) == Const(1)


def test_t3_primary_bracket_with_H0_generates_secondary():
    H0 = canonical_H0(t3, ostrogradski(t3))
    assert equal(poisson(E(t3, "p_q2 - pi_q1"), H0, t3), E(t3, "p_q1"))


def _random_quadratic(rng, syms):
    e = ZERO
    for _ in range(rng.randint(2, 5)):
        a, b = rng.choice(syms), rng.choice(syms)
        e = e + Const(Fraction(rng.randint(-4, 4), rng.choice([1, 2]))) * Sym(a) * Sym(b)
    return e + Const(rng.randint(-2, 2)) * Sym(rng.choice(syms))


BRACKET_CASES = 200


def test_bracket_laws_on_random_quadratics():
    rng = random.Random(7)
    syms = t3.phase_symbols
    for _ in range(BRACKET_CASES):
        F, G, H = (_random_quadratic(rng, syms) for _ in range(3))
        assert equal(poisson(F, G, t3), -poisson(G, F, t3))
        assert equal(poisson(F, G * H, t3), poisson(F, G, t3) * H + G * poisson(F, H, t3))
        jac = (poisson(F, poisson(G, H, t3), t3) + poisson(G, poisson(H, F, t3), t3)
               + poisson(H, poisson(F, G, t3), t3))
        assert jac.is_zero()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 9), st.fractions(-3, 3), st.fractions(-3, 3))
def test_bracket_is_bilinear(seed, a, b):
    rng = random.Random(seed)
    syms = t3.phase_symbols
    F, G, H = (_random_quadratic(rng, syms) for _ in range(3))
    lhs = poisson(Const(a) * F + Const(b) * G, H, t3)
    assert equal(lhs, Const(a) * poisson(F, H, t3) + Const(b) * poisson(G, H, t3))


# ------------------------------------------------------------------ variation


def test_t1_H0_variation_vanishes():
    sys = build_hj_system(t1)
    v = variation(sys.generators[0], sys)
    assert v.identically_zero


def test_t3_p_constraint_variation_is_secondary():
    sys = build_hj_system(t3)
    v = variation(gens(sys)["Pgamma[q2]"], sys)
    assert equal(v.reduced[TIME], E(t3, "p_q1"))
    assert all(c.is_zero() for k, c in v.reduced.items() if k != TIME)


def test_t3_secondary_variation_is_identically_zero(closed):
    _, sys, rep = closed["t3"]
    assert rep.variation_table["S1"].identically_zero
    assert rep.secondaries_identically_zero


# -------------------------------------------------------------------- closure


def test_t1_closure_trivial(closed):
    _, sys, rep = closed["t1"]
    assert rep.iterations == 0 and rep.final_status == Status.CLOSED and rep.added_secondaries == []


def test_t2_closure_determines_parameter(closed):
    m, sys, rep = closed["t2"]
    assert [str(e) for e in rep.added_secondaries] == ["-q' + p_q"]
    assert rep.final_status == Status.CLOSED_DETERMINED
    (rel,) = rep.parameter_relations
    assert rel.param == m.qbar(0)
    assert all(c.is_zero() for c in rel.coeffs.values())
    assert sys.free_parameters == []


def test_t3_closure_single_secondary(closed):
    m, sys, rep = closed["t3"]
    assert [str(e) for e in rep.added_secondaries] == ["p_q1"]
    assert rep.final_status == Status.CLOSED
    assert sys.free_parameters == [m.q(1), m.qbar(1)]


def test_podolsky_closure_gauss_secondaries(closed):
    m, sys, rep = closed["podolsky-mode"]
    assert {str(e) for e in rep.added_secondaries} == {"p_s1*k", "p_c1*k"}
    assert rep.final_status == Status.CLOSED and rep.secondaries_identically_zero
    assert len(sys.free_parameters) == 4


def test_every_reduced_variation_vanishes_after_closure(closed):
    for _, sys, rep in closed.values():
        assert all(v.vanishes for v in rep.variation_table.values())


def test_inconsistent_model():
    m = parse_model("name lin\ncoords q\nL = q\n")
    with pytest.raises(InconsistentSystem):
        integrability_closure(build_hj_system(m))


def test_iteration_bound():
    with pytest.raises(ClosureDiverged):
        integrability_closure(build_hj_system(t3), max_iterations=0)


def test_closure_leaves_input_untouched():
    sys = build_hj_system(t3)
    before = len(sys.generators)
    integrability_closure(sys)
    assert len(sys.generators) == before


def test_gauge_variables_moved_by_secondaries(closed):
    _, sys, _ = closed["t3"]
    assert [z.text for z in unparametrized_gauge_variables(sys)] == ["q1"]
    _, sys, _ = closed["podolsky-mode"]
    assert [z.text for z in unparametrized_gauge_variables(sys)] == ["c1", "s1"]
    _, sys, _ = closed["t2"]
    assert unparametrized_gauge_variables(sys) == []


# --------------------------------------------------------------------- action


def test_t1_action_integrand():
    (v,) = emit_action_integrand(build_hj_system(t1)).values()
    assert equal(v, E(t1, "1/2*pi_q^2"))


def test_t3_action_integrands(closed):
    m, sys, _ = closed["t3"]
    ints = emit_action_integrand(sys, reduced=True)
    assert equal(ints[TIME], E(m, "1/2*pi_q1^2"))
    assert ints[m.q(1)].is_zero() and ints[m.qbar(1)].is_zero()
