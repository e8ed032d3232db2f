"""Analysing a model written by hand, with a rational parameter and LaTeX output.

The Pais-Uhlenbeck oscillator is regular; adding a velocity-only coupling to a
second coordinate makes it singular.
"""
# %%
from fractions import Fraction

from ostrohj.dynamics import ParameterPath, diagnostics, integrate, parse_init, project_initial
from ostrohj.model import parse_model
from ostrohj.report import AnalysisReport, run_analysis, to_latex

PU = """\
name pais-uhlenbeck
param w1 = 1
param w2 = 2
coords q
L = 1/2*q''^2 - 1/2*(w1^2 + w2^2)*q'^2 + 1/2*w1^2*w2^2*q^2
"""

m = parse_model(PU).with_params({"w2": Fraction(3, 2)})
a = run_analysis(m)
print(AnalysisReport.from_analysis(a).to_text())

init, _ = project_initial(a.hj, parse_init("var q = 0.1\nvar q' = 0\nvar p_q = 0.2\nvar pi_q = 0\n", m))
d = diagnostics(integrate(a.hj, init, ParameterPath.constant_time(0, 4), 8000))
print(f"energy residual {d.energy_residual:.1e}, "
      f"action mismatch {d.action_relative_error:.1e}, EL residual {d.el_residual:.1e}")

# %% [markdown]
# A coupled variant: `q2` enters only through its velocity, which produces a
# momentum constraint.

# %%
COUPLED = """\
name coupled
coords q1 q2
L = 1/2*q1''^2 + q1'*q2' - 1/2*q1^2
"""
c = run_analysis(parse_model(COUPLED))
print(AnalysisReport.from_analysis(c).to_text())
print(to_latex(c))
