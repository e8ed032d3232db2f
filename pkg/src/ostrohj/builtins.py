"""Builtin models with their default initial data, gauge paths and expected structure."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .model import LagrangianModel, parse_model

T1 = """\
name t1
coords q
L = 1/2*q''^2
"""

T2 = """\
name t2
coords q
L = 1/2*q'^2
"""

T3 = """\
name t3
coords q1 q2
L = 1/2*(q1'' + q2')^2
"""

# Single Fourier mode A_mu = c_mu(t) cos(k x) + s_mu(t) sin(k x) (lower index, metric +---),
# averaged over one spatial period.
PODOLSKY = """\
name podolsky-mode
param a2 = 1/2
param k = 1
coords c0 c1 c2 c3 s0 s1 s2 s3
L = 1/4*((c1' - k*s0)^2 + (s1' + k*c0)^2 + c2'^2 + s2'^2 + c3'^2 + s3'^2) - 1/4*k^2*(c2^2 + s2^2 + c3^2 + s3^2) + a2/2*(k^2*((c1' - k*s0)^2 + (s1' + k*c0)^2) - (c1'' - k*s0')^2 - (s1'' + k*c0')^2 - (c2'' + k^2*c2)^2 - (s2'' + k^2*s2)^2 - (c3'' + k^2*c3)^2 - (s3'' + k^2*s3)^2)
"""


@dataclass(frozen=True)
class Expected:
    primaries: int
    secondaries: int
    first_class: int
    second_class: int
    free_parameters: int
    relations: int


@dataclass
class BuiltinModel:
    name: str
    text: str
    expected: Expected
    description: str
    init: str
    path_a: str
    path_b: str
    extra: Dict[str, str] = field(default_factory=dict)

    def model(self) -> LagrangianModel:
        return parse_model(self.text, f"builtin:{self.name}")


_T3_INIT = """\
var t = 0
var q1 = 0.1
var q2 = 0.2
var q1' = 0.3
var q2' = 0.4
var p_q1 = 0.5
var p_q2 = 0
var pi_q1 = 1
var pi_q2 = 0.6
"""

_POD_INIT = """\
var t = 0
var c0 = 0.1
var c1 = 0.2
var c2 = -0.3
var c3 = 0.15
var s0 = -0.2
var s1 = 0.05
var s2 = 0.25
var s3 = -0.1
var c0' = 0.3
var c1' = -0.1
var c2' = 0.2
var c3' = 0.05
var s0' = 0.1
var s1' = 0.4
var s2' = -0.15
var s3' = 0.2
var p_c0 = 0.3
var p_c1 = 0.6
var p_c2 = -0.2
var p_c3 = 0.1
var p_s0 = 0.2
var p_s1 = -0.5
var p_s2 = 0.3
var p_s3 = -0.25
var pi_c0 = 0.7
var pi_c1 = 0.35
var pi_c2 = -0.4
var pi_c3 = 0.2
var pi_s0 = 0.6
var pi_s1 = -0.3
var pi_s2 = 0.1
var pi_s3 = 0.45
"""

BUILTINS: Dict[str, BuiltinModel] = {
    "t1": BuiltinModel(
        "t1", T1, Expected(0, 0, 0, 0, 0, 0),
        "regular fourth-order free motion, L = q''^2/2",
        init="var t = 0\nvar q = 0\nvar q' = 0\nvar p_q = -1\nvar pi_q = 0\n",
        path_a="path t : 0 0 ; 1 1\n",
        path_b="path t : 0 0 ; 0.4 0.3 ; 1 1\n",
    ),
    "t2": BuiltinModel(
        "t2", T2, Expected(1, 1, 0, 2, 0, 1),
        "first-order free particle read as a second-order system (second class)",
        init="var t = 0\nvar q = 0.3\nvar q' = 2\nvar p_q = 0\nvar pi_q = 0.7\n",
        path_a="path t : 0 0 ; 1 1\n",
        path_b="path t : 0 0 ; 0.5 0.7 ; 1 1\n",
    ),
    "t3": BuiltinModel(
        "t3", T3, Expected(2, 1, 3, 0, 2, 0),
        "two-coordinate gauge toy, L = (q1'' + q2')^2/2 (first class)",
        init=_T3_INIT,
        path_a="path t : 0 0 ; 1 1\n",
        path_b="path t : 0 0 ; 0.5 0.5 ; 1 1\n"
               "path q2 : 0 0.2 ; 0.3 0.9 ; 0.6 0.5 ; 1 0.2\n"
               "path q2' : 0 0.4 ; 0.25 -0.3 ; 0.7 0.8 ; 1 0.4\n",
    ),
    "podolsky-mode": BuiltinModel(
        "podolsky-mode", PODOLSKY, Expected(4, 2, 6, 0, 4, 0),
        "Podolsky electrodynamics reduced to one spatial Fourier mode (first class)",
        init=_POD_INIT,
        path_a="path t : 0 0 ; 1 1\n",
        path_b="path t : 0 0 ; 0.5 0.5 ; 1 1\n"
               "path c0 : 0 0.1 ; 0.3 0.6 ; 0.7 -0.4 ; 1 0.1\n"
               "path s0 : 0 -0.2 ; 0.5 0.5 ; 1 -0.2\n"
               "path c0' : 0 0.3 ; 0.4 -0.5 ; 1 0.3\n"
               "path s0' : 0 0.1 ; 0.2 0.9 ; 0.8 -0.3 ; 1 0.1\n",
    ),
}


def get_builtin(name: str) -> BuiltinModel:
    try:
        return BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}") from None


# ------------------------------------------------------- density oracle

ETA = np.diag([1.0, -1.0, -1.0, -1.0])


def podolsky_density_average(c: np.ndarray, s: np.ndarray, a2: float, k: float,
                             npts: int = 64) -> float:
    """Spatial average of -F^2/4 + a2 * (d_l F^{al})(d^r F_{ar}) for the single-mode field.

    ``c`` and ``s`` have shape (3, 4): rows are the amplitude, its first and
    second time derivative; columns the lower-index components A_0..A_3.
    The field depends on (t, x1) only.
    """
    x = 2 * np.pi / k * np.arange(npts) / npts
    cos, sin = np.cos(k * x), np.sin(k * x)
    # basis[n] = d^n/dx^n of (cos, sin) for n = 0, 1, 2
    basis = [(cos, sin), (-k * sin, k * cos), (-k * k * cos, -k * k * sin)]

    def deriv(nt, nx):
        bc, bs = basis[nx]
        return np.outer(bc, c[nt]) + np.outer(bs, s[nt])  # (npts, 4)

    # dA[x, nu, mu] = d_nu A_mu ; ddA[x, l, nu, mu] = d_l d_nu A_mu
    zero = np.zeros((npts, 4))
    first = {0: deriv(1, 0), 1: deriv(0, 1)}
    dA = np.stack([first[0], first[1], zero, zero], axis=1)
    second = {(0, 0): deriv(2, 0), (0, 1): deriv(1, 1), (1, 0): deriv(1, 1), (1, 1): deriv(0, 2)}
    ddA = np.zeros((npts, 4, 4, 4))
    for (l, nu), v in second.items():
        ddA[:, l, nu, :] = v
    F = dA - np.transpose(dA, (0, 2, 1))  # F_{nu mu}
    dF = ddA - np.transpose(ddA, (0, 1, 3, 2))  # d_l F_{nu mu}
    F_up = np.einsum("ab,cd,xbd->xac", ETA, ETA, F)
    maxwell = -0.25 * np.einsum("xab,xab->x", F_up, F)
    # J^a = d_l F^{a l} ; J_a = eta_{ab} J^b
    J_up = np.einsum("ab,ld,xlbd->xa", ETA, ETA, dF)
    J_low = np.einsum("ab,xb->xa", ETA, J_up)
    current = np.einsum("xa,xa->x", J_up, J_low)
    return float(np.mean(maxwell + a2 * current))


def podolsky_config_values(m: LagrangianModel, c: np.ndarray, s: np.ndarray) -> Dict:
    """Map amplitude arrays onto the model's (q, q', q'') symbols."""
    vals = {}
    for i, name in enumerate(m.coords):
        arr = c if name[0] == "c" else s
        mu = int(name[1])
        vals[m.q(i)] = arr[0, mu]
        vals[m.qbar(i)] = arr[1, mu]
        vals[m.qddot(i)] = arr[2, mu]
    return vals


def list_builtins() -> List[str]:
    return list(BUILTINS)
