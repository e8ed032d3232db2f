"""Two small models side by side: one with no constraints at all, one with a
second-class pair.

Run with ``python demos/01_regular_and_second_class.py``.
"""
# %% [markdown]
# ## A regular higher-order model
# `L = q''^2 / 2` has an invertible acceleration Hessian, so the Hamilton-Jacobi
# system is the single energy equation and nothing needs closing.

# %%
import numpy as np

from ostrohj.builtins import BUILTINS
from ostrohj.dynamics import ParameterPath, diagnostics, integrate, parse_init, project_initial
from ostrohj.report import AnalysisReport, run_analysis

t1 = BUILTINS["t1"].model()
a = run_analysis(t1)
print(AnalysisReport.from_analysis(a).to_text())

# %% [markdown]
# Starting from rest with `p_q = -1` the exact motion is `q(t) = t^3 / 6`.

# %%
init, _ = project_initial(a.hj, parse_init("var p_q = -1\n", t1))
traj = integrate(a.hj, init, ParameterPath.constant_time(), 10_000)
print(f"q(1) = {traj.phase[-1, 0]:.15f}   (exact {1 / 6:.15f})")
d = diagnostics(traj)
print(f"Z = {d.Z:.12f}, integral of L dt = {d.action_integral:.12f}")

# %% [markdown]
# ## A first-order Lagrangian read as second order
# Treating `L = q'^2 / 2` with the second-order machinery produces the
# primary `pi_q = 0` and, after closure, the secondary `p_q - q' = 0`.
# The pair is second class, so the parameter attached to `pi_q` is fixed
# rather than free.

# %%
t2 = BUILTINS["t2"].model()
a2 = run_analysis(t2)
rep = AnalysisReport.from_analysis(a2)
print("secondaries:", rep.closure["secondaries"])
print("relations:  ", rep.closure["relations"])
print("Dirac multipliers:", rep.dirac["multipliers"])
print("classes:", rep.dirac["classification"])

# %%
init, changes = project_initial(a2.hj, parse_init("var q = 0.3\nvar q' = 2\n", t2))
print("projection onto the constraint surface:", changes)
curved = ParameterPath.parse("path t : 0 0 ; 0.5 0.7 ; 1 1\n")
traj = integrate(a2.hj, init, curved, 2000)
free = init.q[0] + init.qbar[0] * traj.t
print(f"max deviation from free motion: {np.max(np.abs(traj.phase[:, 0] - free)):.2e}")
