"""Compile expressions to plain Python callables for fast float evaluation."""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..errors import MissingBinding
from .poly import Poly, as_ratfunc
from .symbols import Symbol


def _poly_source(p: Poly, names: Mapping[Symbol, str]) -> str:
    if p.is_zero():
        return "0.0"
    parts = []
    for mono, c in p.sorted_terms():
        factors = []
        for s, e in mono:
            factors.extend([names[s]] * e)
        coef = float(c)
        if not factors:
            parts.append(repr(coef))
        elif coef == 1.0:
            parts.append("*".join(factors))
        elif coef == -1.0:
            parts.append("-" + "*".join(factors))
        else:
            parts.append(repr(coef) + "*" + "*".join(factors))
    return "(" + " + ".join(parts) + ")"


def lambdify(exprs: Sequence, variables: Sequence[Symbol], constants: Mapping[Symbol, float] | None = None):
    """Return ``f(x) -> ndarray`` evaluating ``exprs`` with ``x[i]`` bound to ``variables[i]``.

    ``x`` may also be a 2-D array whose rows are the variables; evaluation
    is then vectorized over columns.  Symbols listed in ``constants`` are
    frozen to those float values.
    """
    constants = dict(constants or {})
    names = {s: f"x[{i}]" for i, s in enumerate(variables)}
    for s, v in constants.items():
        if s not in names:
            names[s] = repr(float(v))
    lines = ["def _f(x):"]
    outs = []
    for e in exprs:
        rf = as_ratfunc(e)
        for s in rf.symbols():
            if s not in names:
                raise MissingBinding(s)
        num = _poly_source(rf.num, names)
        if rf.den.is_constant():
            d = float(rf.den.constant_value())
            outs.append(num if d == 1.0 else f"{num}/{d!r}")
        else:
            outs.append(f"{num}/{_poly_source(rf.den, names)}")
    if not outs:
        lines.append("    return _np.zeros(0)")
    else:
        lines.append("    return _np.array([" + ", ".join(outs) + "], dtype=float)")
    src = "\n".join(lines)
    ns = {"_np": np}
    exec(compile(src, "<lambdify>", "exec"), ns)
    fn = ns["_f"]
    fn.source = src
    return fn
