import math

import pytest

from ostrohj.builtins import BUILTINS, T1, T2, T3
from ostrohj.errors import ModelError, NonlinearAccelerations
from ostrohj.model import (canonical_H0, conjugate_momenta, euler_lagrange, hessians, ostrogradski,
                           parse_model, primary_constraints, solve_accelerations)
from ostrohj.symexpr import Kind, equal, eval_numeric, jet, parameter, parse, substitute

t1, t2, t3 = (parse_model(x) for x in (T1, T2, T3))


def E(m, text):
    return parse(text, m.jet_symtab(), max_primes=4)


# ------------------------------------------------------------------ parsing


def test_model_file_round_trip():
    m = parse_model(t3.to_text())
    assert m.coords == ["q1", "q2"] and equal(m.L, t3.L)


def test_params_are_read_as_rationals():
    m = BUILTINS["podolsky-mode"].model()
    assert str(m.params["a2"]) == "1/2" and m.params["k"] == 1


@pytest.mark.parametrize("text, fragment", [
    ("name x\ncoords q\n", "needs"),
    ("name x\ncoords q q\nL = q'^2\n", "unique"),
    ("name x\ncoords q\nL = q'^2\nparam a = 1\n", "last line"),
    ("name x\ncoords q\nL = q'''\n", "too many primes"),
    ("name x\ncoords q\nL = q' +\n", ":3:"),
    ("name x\nbogus 1\n", ":2:"),
])
def test_model_errors_carry_context(text, fragment):
    with pytest.raises(ModelError) as info:
        parse_model(text, "m.txt")
    assert fragment in str(info.value)


def test_unknown_param_override_rejected():
    with pytest.raises(ModelError):
        t3.with_params({"zz": 1})


# ------------------------------------------------------------------ momenta


def test_t1_momenta():
    p, pi = conjugate_momenta(t1)
    assert equal(pi[0], E(t1, "q''")) and equal(p[0], E(t1, "-q'''"))


def test_t2_momenta():
    p, pi = conjugate_momenta(t2)
    assert pi[0].is_zero() and equal(p[0], E(t2, "q'"))


def test_t3_momenta():
    p, pi = conjugate_momenta(t3)
    assert equal(pi[0], E(t3, "q1'' + q2'"))
    assert pi[1].is_zero()
    assert equal(p[1], E(t3, "q1'' + q2'"))
    assert equal(p[0], E(t3, "-q1''' - q2''"))


# ----------------------------------------------------------------- hessians


def test_hessian_ranks():
    h1, h2, h3 = hessians(t1), hessians(t2), hessians(t3)
    assert h1.rank_pi == 1
    assert (h2.rank_pi, h2.rank_p) == (0, 1)
    assert h3.rank_pi == 1
    o = ostrogradski(t3)
    assert o.R == 1 and o.alpha_idx == [1]


# ------------------------------------------------------------ accelerations


def test_t1_acceleration_solution():
    _, _, w = solve_accelerations(t1)
    assert equal(w[t1.qddot(0)], E(t1, "pi_q"))


def test_t3_acceleration_solution():
    a, alpha, w = solve_accelerations(t3)
    assert (a, alpha) == ([0], [1])
    assert equal(w[t3.qddot(0)], E(t3, "pi_q1 - q2'"))


def test_podolsky_accelerations_carry_inverse_coupling():
    m = BUILTINS["podolsky-mode"].model()
    _, _, w = solve_accelerations(m)
    a2 = parameter("a2")
    for e in w.values():
        assert a2 in e.ratfunc.den.symbols()


def test_solved_accelerations_satisfy_pi_definitions():
    for b in BUILTINS.values():
        m = b.model()
        o = ostrogradski(m)
        for acc, wa in o.w.items():
            i = acc.index - 1
            assert equal(substitute(o.pi_defs[i], o.w), m.pi(i))
            assert all(s.kind != Kind.ACC or s not in o.w for s in wa.symbols())


def test_cubic_acceleration_rejected():
    m = parse_model("name c\ncoords q\nL = q''^3\n")
    with pytest.raises(NonlinearAccelerations):
        solve_accelerations(m)


# ----------------------------------------------------------- Euler-Lagrange


def test_euler_lagrange_examples():
    assert equal(euler_lagrange(t1)[0], E(t1, "q''''"))
    assert equal(euler_lagrange(t2)[0], E(t2, "-q''"))
    m = parse_model("name h\ncoords q\nL = 1/2*q''^2 - 1/2*q^2\n")
    assert equal(euler_lagrange(m)[0], E(m, "-q + q''''"))


# ------------------------------------------------------------- constraints


def test_primary_constraint_examples():
    assert primary_constraints(t1, ostrogradski(t1)) == ([], [])
    hpi, hp = primary_constraints(t2, ostrogradski(t2))
    assert len(hpi) == 1 and equal(hpi[0], E(t2, "pi_q")) and hp == []
    hpi, hp = primary_constraints(t3, ostrogradski(t3))
    assert equal(hpi[0], E(t3, "pi_q2"))
    assert equal(hp[0], E(t3, "p_q2 - pi_q1"))


def test_podolsky_primaries_couple_p0_to_k_pi():
    m = BUILTINS["podolsky-mode"].model()
    hpi, hp = primary_constraints(m, ostrogradski(m))
    assert {str(e) for e in hpi} == {"pi_c0", "pi_s0"}
    assert {str(e) for e in hp} == {"-pi_s1*k + p_c0", "pi_c1*k + p_s0"}


# ---------------------------------------------------------------- H0


def test_canonical_H0_examples():
    assert equal(canonical_H0(t1, ostrogradski(t1)), E(t1, "p_q*q' + 1/2*pi_q^2"))
    assert equal(canonical_H0(t2, ostrogradski(t2)), E(t2, "p_q*q' - 1/2*q'^2"))
    o3 = ostrogradski(t3)
    H3 = canonical_H0(t3, o3)
    assert equal(H3, E(t3, "p_q1*q1' + p_q2*q2' + 1/2*pi_q1^2 - pi_q1*q2'"))
    on_surface = substitute(H3, {t3.p(1): E(t3, "pi_q1")})
    assert equal(on_surface, E(t3, "p_q1*q1' + 1/2*pi_q1^2"))


def _jets_exp_cos(t):
    """q(t) = e^t + cos t and its derivatives up to order 4 (solves q'''' = q)."""
    return [math.exp(t) + math.cos(t), math.exp(t) - math.sin(t), math.exp(t) - math.cos(t),
            math.exp(t) + math.sin(t), math.exp(t) + math.cos(t)]


def test_energy_conserved_along_euler_lagrange_solution():
    m = parse_model("name h\ncoords q\nL = 1/2*q''^2 - 1/2*q^2\n")
    o = ostrogradski(m)
    H0 = canonical_H0(m, o)
    syms = [jet("q", 1, k) for k in range(5)]

    def energy(t):
        vals = dict(zip(syms, _jets_exp_cos(t)))
        vals[m.p(0)] = eval_numeric(o.p_defs[0], vals)
        vals[m.pi(0)] = eval_numeric(o.pi_defs[0], vals)
        return eval_numeric(H0, vals)

    h = 1e-4
    for t in (0.0, 0.4, 0.9):
        assert abs((energy(t + h) - energy(t - h)) / (2 * h)) < 1e-6
