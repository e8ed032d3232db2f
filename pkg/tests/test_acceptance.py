"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line; the lines are printed as they are
decided and again in the pytest terminal summary.  Running this file directly
(``python tests/test_acceptance.py``) prints only the verdict lines.
"""
import io
import json
import math
import random
import time

import numpy as np

from ostrohj.builtins import BUILTINS, podolsky_config_values, podolsky_density_average
from ostrohj.cli import EXIT_CHECK_FAIL, EXIT_OK, main
from ostrohj.dirac import compare_with_hj, dirac_analyze
from ostrohj.dynamics import (ParameterPath, diagnostics, integrate,
                              parse_init, path_independence_check, project_initial)
from ostrohj.hjpde import Status, build_hj_system, poisson
from ostrohj.model import euler_lagrange
from ostrohj.symexpr import Const, Sym, ZERO, diff, equal, eval_numeric, normalize, parse

from conftest import ACCEPTANCE, closed_systems, random_tree, rewrite

TOL_CHECK = 1e-8
STEPS = 10_000
CURVED_T = "path t : 0 0 ; 0.4 0.3 ; 1 1\n"
T3_CURVED = (CURVED_T + "path q2 : 0 0.2 ; 0.3 0.9 ; 0.6 0.5 ; 1 0.2\n"
             "path q2' : 0 0.4 ; 0.25 -0.3 ; 0.7 0.8 ; 1 0.4\n")


def verdict(cid, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] C{cid} {title}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def cli(*argv):
    buf = io.StringIO()
    return main(list(argv), out=buf), buf.getvalue()


def start(name, init_text=None):
    m, sys_, _ = closed_systems()[name]
    init, _ = project_initial(sys_, parse_init(init_text or BUILTINS[name].init, m))
    return m, sys_, init


# --------------------------------------------------------------------------- 1


def test_c1_podolsky_structure():
    t0 = time.perf_counter()
    code, out = cli("analyze", "builtin:podolsky-mode", "--format", "json")
    elapsed = time.perf_counter() - t0
    d = json.loads(out)
    m = BUILTINS["podolsky-mode"].model()
    E = lambda s: parse(s, m.symtab)  # noqa: E731
    pc = d["primary_constraints"]
    pi_ok = sorted(pc["pi_type"]) == ["pi_c0", "pi_s0"]
    # p-type primaries tie the momentum of the time component to k times a pi momentum
    want_p = [E("p_c0 - k*pi_s1"), E("p_s0 + k*pi_c1")]
    got_p = [E(x) for x in pc["p_type"]]
    p_ok = len(got_p) == 2 and all(any(equal(g, w) for g in got_p) for w in want_p)
    cl = d["closure"]
    want_s = [E("k*p_c1"), E("k*p_s1")]
    got_s = [E(x) for x in cl["secondaries"]]
    s_ok = len(got_s) == 2 and all(any(equal(g, w) for g in got_s) for w in want_s)
    sec_rows = [v for lbl, v in cl["variations"].items() if lbl.startswith("S")]
    zero_ok = cl["identically_zero"] and all(c["raw"] == "0" for row in sec_rows for c in row.values())
    ok = (code == EXIT_OK and pi_ok and p_ok and s_ok and zero_ok and cl["status"] == Status.CLOSED.value
          and elapsed < 5.0)
    verdict(1, "Podolsky constraint chain", ok,
            f"pi-type {pc['pi_type']}, p-type {pc['p_type']}, Gauss {cl['secondaries']}, "
            f"secondary variations identically zero = {cl['identically_zero']}, {elapsed:.2f} s (< 5 s)")


# --------------------------------------------------------------------------- 2


def test_c2_mode_reduction_oracle():
    m = BUILTINS["podolsky-mode"].model()
    a2, k = (float(m.params[n]) for n in ("a2", "k"))
    pvals = {s: float(v) for s, v in m.param_symbols.items()}
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        c, s = rng.uniform(-1, 1, (3, 4)), rng.uniform(-1, 1, (3, 4))
        vals = podolsky_config_values(m, c, s)
        vals.update(pvals)
        reduced = eval_numeric(m.L, vals)
        sampled = podolsky_density_average(c, s, a2, k, npts=64)
        worst = max(worst, abs(reduced - sampled) / max(1.0, abs(sampled)))
    verdict(2, "mode-reduction oracle", worst < 1e-10,
            f"max relative error {worst:.2e} over 20 configurations on a 64-point grid (< 1e-10)")


# --------------------------------------------------------------------------- 3


def test_c3_gauge_fixing_free_integration():
    parts, ok = [], True
    for name in ("podolsky-mode", "t3"):
        code, out = cli("check", f"builtin:{name}", "--tol", str(TOL_CHECK), "--steps", str(STEPS))
        ok &= code == EXIT_OK and out.startswith("PASS")
        parts.append(f"{name} {out.split(':', 1)[0]} ({out.split('=', 1)[1].split()[0]})")
    for name in ("podolsky-mode", "t3"):
        b = BUILTINS[name]
        m = b.model()
        sab = build_hj_system(m)
        init, _ = project_initial(sab, parse_init(b.init, m))
        rep = path_independence_check(sab, init, ParameterPath.parse(b.path_a),
                                      ParameterPath.parse(b.path_b), STEPS, TOL_CHECK)
        code, _ = cli("check", f"builtin:{name}", "--steps", str(STEPS), "--omit-secondaries")
        ok &= (not rep.passed) and rep.max_diff > 1e-3 and code == EXIT_CHECK_FAIL
        parts.append(f"{name} sabotage diff {rep.max_diff:.3g} (> 1e-3)")
    verdict(3, "path independence", ok, "; ".join(parts))


# --------------------------------------------------------------------------- 4


def test_c4_dirac_hj_equivalence():
    worst, ok, names = 0.0, True, []
    for name, (m, sys_, _) in closed_systems().items():
        eq = compare_with_hj(dirac_analyze(m), sys_, samples=100)
        ok &= eq.equivalent and eq.max_cross_residual < 1e-9
        worst = max(worst, eq.max_cross_residual)
        names.append(name)
    verdict(4, "Dirac/HJ equivalence", ok,
            f"equivalent on {', '.join(names)}; max cross residual {worst:.2e} (< 1e-9, 100 samples)")


# --------------------------------------------------------------------------- 5


def test_c5_regular_system():
    m, sys_, _ = closed_systems()["t1"]
    empty = sys_.primaries == [] and sys_.secondaries == []
    (el,) = euler_lagrange(m)
    el_ok = equal(el, parse("q''''", m.jet_symtab(), max_primes=4))
    _, _, init = start("t1", "var q = 0\nvar q' = 0\nvar p_q = -1\nvar pi_q = 0\n")
    q1 = integrate(sys_, init, ParameterPath.constant_time(), STEPS).phase[-1, 0]
    err = abs(q1 - 1 / 6)
    verdict(5, "regular system", empty and el_ok and err < 1e-10,
            f"constraints empty = {empty}, EL = {el}, |q(1) - 1/6| = {err:.2e} (< 1e-10)")


# --------------------------------------------------------------------------- 6


def test_c6_second_class():
    m, sys_, rep = closed_systems()["t2"]
    E = lambda s: parse(s, m.symtab)  # noqa: E731
    sec_ok = len(rep.added_secondaries) == 1 and equal(rep.added_secondaries[0], E("p_q - q'"))
    (rel,) = rep.parameter_relations
    rel_ok = rel.param == m.qbar(0) and all(c.is_zero() for c in rel.coeffs.values())
    (mu,) = dirac_analyze(m).multipliers
    nu_ok = not mu.free and mu.determined.is_zero()
    _, _, init = start("t2")
    traj = integrate(sys_, init, ParameterPath.parse(BUILTINS["t2"].path_b), STEPS)
    err = float(np.max(np.abs(traj.phase[:, 0] - (init.q[0] + init.qbar[0] * traj.t))))
    verdict(6, "second-class handling", sec_ok and rel_ok and nu_ok and err < 1e-10,
            f"secondary {rep.added_secondaries[0]}, d{rel.param.text} = 0: {rel_ok}, "
            f"nu determined 0: {nu_ok}, free-particle error {err:.2e} (< 1e-10)")


# --------------------------------------------------------------------------- 7


def test_c7_action_consistency():
    parts, ok = [], True
    for name in BUILTINS:
        _, sys_, init = start(name)
        d = diagnostics(integrate(sys_, init, ParameterPath.parse(BUILTINS[name].path_b), STEPS))
        rel = abs(d.Z - d.action_integral) / max(1.0, abs(d.Z))
        ok &= rel < 1e-6
        parts.append(f"{name} {rel:.1e}")
    verdict(7, "action consistency", ok, "relative |Z - int L dt|: " + ", ".join(parts) + " (< 1e-6)")


# --------------------------------------------------------------------------- 8


def _normalize_cases(n, rng):
    table = BUILTINS["t3"].model().symtab
    syms = [table.get(x) for x in ("q1", "q2", "q1'", "pi_q1")]
    bad = 0
    for _ in range(n):
        a = random_tree(rng, syms, 3)
        b = rewrite(a, rng)
        if normalize(a) != normalize(b):
            bad += 1
            continue
        vals = {s: rng.uniform(-2, 2) for s in syms}
        x, y = eval_numeric(a, vals), eval_numeric(b, vals)
        bad += abs(x - y) > 1e-9 * max(1.0, abs(x))
    return bad


def _derivative_cases(n, rng):
    table = BUILTINS["t3"].model().symtab
    syms = [table.get(x) for x in ("q1", "q2", "q1'")]
    h, bad = 1e-5, 0
    for _ in range(n):
        e = random_tree(rng, syms, 3)
        s = rng.choice(syms)
        d = diff(e, s)
        vals = {x: rng.uniform(-1, 1) for x in syms}
        up, dn = dict(vals), dict(vals)
        up[s] += h
        dn[s] -= h
        fd = (eval_numeric(e, up) - eval_numeric(e, dn)) / (2 * h)
        exact = eval_numeric(d, vals)
        bad += abs(fd - exact) > 1e-5 * max(1.0, abs(exact))
    return bad


def _bracket_cases(n, rng):
    m = BUILTINS["t3"].model()
    syms = m.phase_symbols

    def quad():
        e = ZERO
        for _ in range(rng.randint(2, 5)):
            e = e + Const(rng.randint(-4, 4)) * Sym(rng.choice(syms)) * Sym(rng.choice(syms))
        return e + Const(rng.randint(-2, 2)) * Sym(rng.choice(syms))

    bad = 0
    for _ in range(n):
        F, G, H = quad(), quad(), quad()
        anti = equal(poisson(F, G, m), -poisson(G, F, m))
        leib = equal(poisson(F, G * H, m), poisson(F, G, m) * H + G * poisson(F, H, m))
        jac = (poisson(F, poisson(G, H, m), m) + poisson(G, poisson(H, F, m), m)
               + poisson(H, poisson(F, G, m), m)).is_zero()
        bad += not (anti and leib and jac)
    return bad


def test_c8_symbolic_engine_oracles():
    rng = random.Random(8)
    n_bad = _normalize_cases(1000, rng)
    d_bad = _derivative_cases(300, rng)
    b_bad = _bracket_cases(200, rng)
    ok = n_bad == d_bad == b_bad == 0
    verdict(8, "symbolic engine oracles", ok,
            f"normalize 1000 cases ({n_bad} failed), derivative vs central difference 300 cases "
            f"({d_bad} failed, tol 1e-5), "
            f"bracket laws 200 cases ({b_bad} failed)")


# --------------------------------------------------------------------------- 9


def test_c9_rk4_order():
    parts, ok = [], True
    for name, text in (("t1", CURVED_T), ("t3", T3_CURVED)):
        _, sys_, init = start(name)
        p = ParameterPath.parse(text)
        final = lambda n: integrate(sys_, init, p, n).state[-1]  # noqa: E731
        ref = final(4000)
        e1 = np.max(np.abs(final(50) - ref))
        e2 = np.max(np.abs(final(100) - ref))
        order = math.log2(e1 / e2)
        ok &= order >= 3.5
        parts.append(f"{name} {order:.2f}")
    verdict(9, "RK4 convergence order", ok, "log2 error ratio under halving: " + ", ".join(parts) + " (>= 3.5)")


if __name__ == "__main__":
    for fn in [v for k, v in sorted(globals().items()) if k.startswith("test_c")]:
        try:
            fn()
        except AssertionError:
            pass
