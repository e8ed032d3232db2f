"""Numerical integration of the total differential equations along parameter paths."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.integrate import simpson

from .errors import (EndpointMismatch, NonFiniteState, PathViolatesRelation, TooFewSamples,
                     UnsolvableConstraintResidual, UnwritableOutput)
from .hjpde import HJSystem, emit_action_integrand, total_diff_equations, unparametrized_gauge_variables
from .model import LagrangianModel, euler_lagrange
from .symexpr import TIME, ZERO, Expr, Symbol, jet, lambdify, render

RESIDUAL_TOL = 1e-10


# ------------------------------------------------------------------ points


@dataclass
class PhasePoint:
    t: float
    q: np.ndarray
    qbar: np.ndarray
    p: np.ndarray
    pi: np.ndarray
    P0: Optional[float] = None
    param_vals: Dict[str, float] = field(default_factory=dict)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.qbar, self.p, self.pi]).astype(float)

    def values(self, m: LagrangianModel) -> Dict[Symbol, float]:
        out = dict(zip(m.phase_symbols, self.as_vector()))
        out[TIME] = self.t
        return out

    @classmethod
    def from_vector(cls, n: int, t: float, z, P0=None, param_vals=None) -> PhasePoint:
        z = np.asarray(z, dtype=float)
        return cls(t, z[:n].copy(), z[n:2 * n].copy(), z[2 * n:3 * n].copy(), z[3 * n:4 * n].copy(),
                   P0, dict(param_vals or {}))


def parse_init(text: str, m: LagrangianModel, origin: str = "<init>") -> PhasePoint:
    """``var <ident> = <float>`` lines; unspecified components default to 0."""
    names = {s.text: k for k, s in enumerate(m.phase_symbols)}
    z = np.zeros(4 * m.n)
    t, P0 = 0.0, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        ident, eq, value = rest.partition("=")
        ident = ident.strip()
        if head != "var" or not eq:
            raise ValueError(f"{origin}:{lineno}: expected 'var <ident> = <float>'")
        try:
            v = float(value)
        except ValueError:
            raise ValueError(f"{origin}:{lineno}: {value.strip()!r} is not a number") from None
        if ident == "t":
            t = v
        elif ident == "P0":
            P0 = v
        elif ident in names:
            z[names[ident]] = v
        else:
            raise ValueError(f"{origin}:{lineno}: unknown variable {ident!r}")
    return PhasePoint.from_vector(m.n, t, z, P0, {k: float(v) for k, v in m.params.items()})


def project_initial(sys: HJSystem, raw: PhasePoint):
    """Overwrite constrained momenta with their solved values.

    Returns ``(projected point, changes)`` where ``changes`` maps the
    component name to ``(old, new)``.
    """
    m = sys.model
    vals = raw.values(m)
    pvals = {s: float(v) for s, v in m.param_symbols.items()}
    vals.update(pvals)
    order = sorted(sys.subs)
    changes = {}
    new = dict(vals)
    for s in order:
        v = float(sys.subs[s].evaluate(vals))
        if v != vals[s]:
            changes[s.text] = (vals[s], v)
        new[s] = v
    for r in sys.residual_constraints:
        res = float(r.ratfunc.evaluate(new))
        if abs(res) > RESIDUAL_TOL:
            raise UnsolvableConstraintResidual(
                f"constraint {render(r)} = {res:.3g} at the initial point and cannot be adjusted")
    z = np.array([new[s] for s in m.phase_symbols])
    return PhasePoint.from_vector(m.n, raw.t, z, raw.P0, raw.param_vals), changes


# ------------------------------------------------------------------- paths


@dataclass
class ParameterPath:
    """Breakpoints ``(s_k, v_k)`` per parameter name; natural cubic interpolation."""
    breakpoints: Dict[str, tuple] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str, origin: str = "<path>") -> ParameterPath:
        bp = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(" ")
            name, colon, pts = rest.partition(":")
            name = name.strip()
            if head != "path" or not colon or not name:
                raise ValueError(f"{origin}:{lineno}: expected 'path <param> : s0 v0 ; s1 v1 ; ...'")
            ss, vs = [], []
            for chunk in pts.split(";"):
                parts = chunk.split()
                if len(parts) != 2:
                    raise ValueError(f"{origin}:{lineno}: breakpoint {chunk.strip()!r} needs 's v'")
                ss.append(float(parts[0]))
                vs.append(float(parts[1]))
            if any(b <= a for a, b in zip(ss, ss[1:])):
                raise ValueError(f"{origin}:{lineno}: breakpoints must have increasing s")
            if name in bp:
                raise ValueError(f"{origin}:{lineno}: duplicate path for {name!r}")
            bp[name] = (ss, vs)
        return cls(bp)

    @classmethod
    def constant_time(cls, t0: float = 0.0, t1: float = 1.0) -> ParameterPath:
        return cls({"t": ([0.0, 1.0], [t0, t1])})

    def to_text(self) -> str:
        return "".join(f"path {k} : " + " ; ".join(f"{s!r} {v!r}" for s, v in zip(*bp)) + "\n"
                       for k, bp in self.breakpoints.items())


class _Component:
    def __init__(self, ss, vs, const: float | None = None):
        if const is not None or len(ss) == 1:
            self.const = float(const if const is not None else vs[0])
            self.spline = None
        else:
            self.const = None
            self.spline = CubicSpline(ss, vs, bc_type="natural")

    def value(self, s):
        if self.spline is None:
            return np.full_like(np.asarray(s, dtype=float), self.const)
        return self.spline(s)

    def rate(self, s):
        if self.spline is None:
            return np.zeros_like(np.asarray(s, dtype=float))
        return self.spline(s, 1)

    @property
    def is_constant(self) -> bool:
        return self.spline is None or np.allclose(self.spline.c[:-1], 0.0)


@dataclass
class ResolvedPath:
    params: List[Symbol]
    components: Dict[Symbol, _Component]
    ignored: List[str] = field(default_factory=list)

    def values(self, s) -> np.ndarray:
        return np.array([self.components[p].value(s) for p in self.params])

    def rates(self, s) -> np.ndarray:
        return np.array([self.components[p].rate(s) for p in self.params])

    @property
    def degenerate(self) -> bool:
        return all(c.is_constant for c in self.components.values())


def resolve_path(sys: HJSystem, path: ParameterPath, init: PhasePoint, strict: bool = False) -> ResolvedPath:
    """Bind path components to the system's free parameters, checking the starting values."""
    m = sys.model
    vals = init.values(m)
    known = {p.text: p for p in sys.parameters}
    for name in path.breakpoints:
        if name not in known:
            raise ValueError(f"path names {name!r}, which is not a parameter of this system "
                             f"(parameters: {', '.join(known)})")
    determined = set(sys.determined_parameters)
    comps, ignored = {}, []
    free = [p for p in sys.parameters if p not in determined]
    for p in sys.parameters:
        bp = path.breakpoints.get(p.text)
        if p in determined:
            if bp is not None:
                comp = _Component(*bp)
                if strict and not comp.is_constant:
                    raise PathViolatesRelation(
                        f"{p.text} is determined by a relation; its path may not vary in strict mode")
                ignored.append(p.text)
            continue
        if bp is None:
            comps[p] = _Component([0.0], [vals[p]], const=vals[p])
            continue
        ss, vs = bp
        if abs(ss[0]) > 1e-12 or (len(ss) > 1 and abs(ss[-1] - 1) > 1e-12):
            raise ValueError(f"path for {p.text} must span s = 0 .. 1")
        if abs(vs[0] - vals[p]) > 1e-12:
            raise EndpointMismatch(f"path for {p.text} starts at {vs[0]!r} but the initial value is {vals[p]!r}")
        comps[p] = _Component(ss, vs)
    tc = comps[TIME]
    if tc.spline is not None:
        grid = np.linspace(0.0, 1.0, 2001)
        if np.any(tc.rate(grid) < 0):
            raise ValueError("the time component of the path must be non-decreasing")
    return ResolvedPath(free, comps, ignored)


# ---------------------------------------------------------------- integrate


def rk4(f: Callable, y0: np.ndarray, s0: float, s1: float, steps: int) -> np.ndarray:
    """Classical fixed-step Runge-Kutta; returns all ``steps + 1`` states."""
    h = (s1 - s0) / steps
    out = np.empty((steps + 1, len(y0)))
    out[0] = y = np.asarray(y0, dtype=float)
    for k in range(steps):
        s = s0 + k * h
        k1 = f(s, y)
        k2 = f(s + h / 2, y + h / 2 * k1)
        k3 = f(s + h / 2, y + h / 2 * k2)
        k4 = f(s + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y
    return out


@dataclass
class Trajectory:
    model: LagrangianModel
    s: np.ndarray
    param_names: List[str]
    params: np.ndarray  # (N, P) free parameters then determined ones
    state: np.ndarray  # (N, 4n + 2): phase, P0, Z
    residual_names: List[str]
    residuals: np.ndarray  # (N, C)
    steps: int
    order: int = 4
    notes: List[str] = field(default_factory=list)
    reprojection: Dict[str, float] = field(default_factory=dict)
    H0: Optional[Expr] = None

    @property
    def phase(self) -> np.ndarray:
        return self.state[:, :4 * self.model.n]

    @property
    def P0(self) -> np.ndarray:
        return self.state[:, -2]

    @property
    def Z(self) -> np.ndarray:
        return self.state[:, -1]

    @property
    def t(self) -> np.ndarray:
        return self.params[:, 0]

    @property
    def drift(self) -> Dict[str, float]:
        if not self.residual_names:
            return {}
        peak = np.max(np.abs(self.residuals), axis=0)
        return dict(zip(self.residual_names, map(float, peak)))

    def final(self) -> PhasePoint:
        return PhasePoint.from_vector(self.model.n, float(self.t[-1]), self.phase[-1], float(self.P0[-1]),
                                      {k: float(v) for k, v in self.model.params.items()})

    def column(self, name: str) -> np.ndarray:
        header, data = self.table()
        return data[:, header.index(name)]

    def table(self):
        m = self.model
        header = ["s", "t0"] + [f"t_{n}" for n in self.param_names[1:]] + \
            [s.text for s in m.phase_symbols] + ["P0", "Z"] + [f"res[{r}]" for r in self.residual_names]
        data = np.column_stack([self.s, self.params, self.state, self.residuals])
        return header, data

    def to_csv(self, out=None) -> str:
        header, data = self.table()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in data:
            w.writerow([format(float(x) + 0.0, ".17g") for x in row])
        text = buf.getvalue()
        if out is not None:
            try:
                with open(out, "w", encoding="utf-8") as fh:
                    fh.write(text)
            except OSError as exc:
                raise UnwritableOutput(f"cannot write {out}: {exc}") from None
        return text


def _constraint_labels(sys: HJSystem) -> List[str]:
    from .hjpde import GenKind
    labels = [g.label for g in sys.generators if g.kind != GenKind.H0]
    labels += [f"R{k}" for k in range(1, len(sys.residual_constraints) + 1)]
    return labels


class _Compiled:
    """Vectorized evaluation of coefficient columns, action integrands and relations."""

    def __init__(self, sys: HJSystem):
        m = sys.model
        self.sys = sys
        tds = total_diff_equations(sys)
        self.params = tds.parameters
        det = set(sys.determined_parameters)
        self.free = [p for p in self.params if p not in det]
        self.det = [r.param for r in sys.relations]
        rows = tds.variables  # phase + P0
        integrands = emit_action_integrand(sys)
        exprs = []
        for z in rows:
            exprs += [tds.coefficients[z][p] for p in self.params]
        exprs += [integrands[p] for p in self.params]
        self.nrows = len(rows) + 1
        rel_exprs = []
        for r in sys.relations:
            rel_exprs += [r.coeffs.get(p, ZERO) for p in self.free]
        self.variables = m.phase_symbols + [TIME]
        pvals = {s: float(v) for s, v in m.param_symbols.items()}
        self.coef = lambdify(exprs, self.variables, pvals)
        self.rel = lambdify(rel_exprs, self.variables, pvals) if rel_exprs else None
        self.cons = lambdify(sys.constraints, self.variables, pvals)
        self.H0 = lambdify([sys.H0], self.variables, pvals)

    def rates(self, x, free_rates):
        """Rates for every parameter (in ``self.params`` order) given the free ones."""
        rate = dict(zip(self.free, free_rates))
        if self.rel is not None:
            R = self.rel(x).reshape(len(self.det), len(self.free))
            for k, p in enumerate(self.det):
                rate[p] = float(R[k] @ free_rates)
        return np.array([rate[p] for p in self.params]), [rate[p] for p in self.det]

    def field(self, x, free_rates):
        C = self.coef(x).reshape(self.nrows, len(self.params))
        r, det_rates = self.rates(x, free_rates)
        return C @ r, det_rates


def initial_energy(sys: HJSystem, point: PhasePoint) -> float:
    """P0 chosen so that H0' = P0 + H0 vanishes at the initial point."""
    c = _Compiled(sys)
    return -float(c.H0(np.append(point.as_vector(), point.t))[0])


def integrate(sys: HJSystem, init: PhasePoint, path: ParameterPath, steps: int,
              strict: bool = False, reproject: bool = False) -> Trajectory:
    """RK4 in the path parameter s over [0, 1] with fixed step 1/steps."""
    m = sys.model
    comp = _Compiled(sys)
    rp = resolve_path(sys, path, init, strict)
    nz = 4 * m.n
    with np.errstate(over="ignore", invalid="ignore"):
        P0 = init.P0 if init.P0 is not None else 0.0 - float(comp.H0(np.append(init.as_vector(), init.t))[0])
    notes = []
    if init.P0 is None:
        notes.append("P0 initialised to -H0 at the starting point")
    if rp.ignored:
        notes.append("path components for determined parameters ignored: " + ", ".join(rp.ignored))
    vals0 = init.values(m)
    det0 = [vals0[p] for p in comp.det]
    y0 = np.concatenate([init.as_vector(), [P0, 0.0], det0])
    ndet = len(comp.det)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if steps == 0 or rp.degenerate:
        ys = y0[None, :]
        svals = np.array([0.0])
        if rp.degenerate:
            notes.append("degenerate path: no parameter changes")
    else:
        svals = np.linspace(0.0, 1.0, steps + 1)
        with np.errstate(over="ignore", invalid="ignore"):
            ys = _rk4_along(comp, rp, y0, nz, steps)
    if not np.all(np.isfinite(ys)):
        bad = int(np.argmax(~np.all(np.isfinite(ys), axis=1)))
        raise NonFiniteState(f"state became non-finite at s = {svals[bad]:.6g}")
    free_vals = rp.values(svals).T if len(svals) > 1 else rp.values(svals[0])[None, :]
    params = np.column_stack([free_vals, ys[:, nz + 2:]]) if ndet else free_vals
    names = [p.text for p in comp.free] + [p.text for p in comp.det]
    X = np.vstack([ys[:, :nz].T, free_vals[:, 0][None, :]])
    residuals = comp.cons(X).T if sys.constraints else np.zeros((len(svals), 0))
    traj = Trajectory(m, svals, names, params, ys[:, :nz + 2], _constraint_labels(sys),
                      residuals.reshape(len(svals), -1), steps, notes=notes, H0=sys.H0)
    if reproject:
        end = traj.final()
        proj, changes = project_initial(sys, end)
        traj.reprojection = {k: new - old for k, (old, new) in changes.items()}
    return traj


def _rk4_along(comp: _Compiled, rp: ResolvedPath, y0: np.ndarray, nz: int, steps: int) -> np.ndarray:
    """Classical RK4 in s with path rates sampled once at every stage point."""
    h = 1.0 / steps
    half = np.linspace(0.0, 1.0, 2 * steps + 1)
    rates = rp.rates(half).T
    times = rp.components[TIME].value(half)
    out = np.empty((steps + 1, len(y0)))
    out[0] = y = y0.astype(float)
    x = np.empty(nz + 1)

    def f(j, y):
        x[:nz] = y[:nz]
        x[nz] = times[j]
        dz, det_rates = comp.field(x, rates[j])
        return np.concatenate([dz, det_rates]) if det_rates else dz

    for k in range(steps):
        j = 2 * k
        k1 = f(j, y)
        k2 = f(j + 1, y + h / 2 * k1)
        k3 = f(j + 1, y + h / 2 * k2)
        k4 = f(j + 2, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y
    return out


# ------------------------------------------------------------- check


@dataclass
class PathCheckReport:
    names: List[str]
    diff: np.ndarray
    tol: float
    traj_a: Trajectory
    traj_b: Trajectory
    excluded: List[str] = field(default_factory=list)

    @property
    def compared(self) -> np.ndarray:
        return np.array([n not in self.excluded for n in self.names])

    @property
    def max_diff(self) -> float:
        d = np.abs(self.diff[self.compared])
        return float(d.max()) if d.size else 0.0

    @property
    def passed(self) -> bool:
        return self.max_diff < self.tol

    def table(self) -> List[tuple]:
        return [(n, float(a), float(b), float(d), n not in self.excluded) for n, a, b, d in
                zip(self.names, self.traj_a.state[-1], self.traj_b.state[-1], self.diff)]


def path_independence_check(sys: HJSystem, init: PhasePoint, path_a: ParameterPath,
                            path_b: ParameterPath, steps: int = 10_000, tol: float = 1e-8) -> PathCheckReport:
    """Integrate along both paths and compare the final states.

    Components moved by parameterless first-class secondaries are reported
    but left out of the verdict.
    """
    m = sys.model
    ra = resolve_path(sys, path_a, init)
    rb = resolve_path(sys, path_b, init)
    for s in (0.0, 1.0):
        va, vb = ra.values(s), rb.values(s)
        if np.max(np.abs(va - vb), initial=0.0) > 1e-12:
            raise EndpointMismatch(
                f"paths disagree at s = {s:g}: " + ", ".join(
                    f"{p.text}: {a!r} vs {b!r}" for p, a, b in zip(ra.params, va, vb) if abs(a - b) > 1e-12))
    ta = integrate(sys, init, path_a, steps)
    tb = integrate(sys, init, path_b, steps)
    names = [s.text for s in m.phase_symbols] + ["P0", "Z"]
    excluded = [z.text for z in unparametrized_gauge_variables(sys)]
    return PathCheckReport(names, tb.state[-1] - ta.state[-1], tol, ta, tb, excluded)


# ------------------------------------------------------------- diagnostics


def fornberg_weights(x0: float, x: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..order at x0 on nodes x."""
    n = len(x)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def finite_difference_jets(t: np.ndarray, y: np.ndarray, order: int, width: int = 9) -> np.ndarray:
    """Derivatives 0..order of samples y(t) at every node, using ``width``-point stencils."""
    n = len(t)
    out = np.empty((order + 1, n))
    half = width // 2
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        w = fornberg_weights(t[i], t[lo:lo + width], order)
        # derivative weights sum to zero; centring on y[i] keeps constants exact
        out[0, i] = y[i]
        out[1:, i] = w[:, 1:].T @ (y[lo:lo + width] - y[i])
    return out


@dataclass
class Diagnostics:
    el_residual: Optional[float]
    action_integral: float
    Z: float
    action_relative_error: float
    energy_residual: float
    notes: List[str] = field(default_factory=list)


def _lagrangian_on_samples(m: LagrangianModel, t: np.ndarray, q: np.ndarray, order: int):
    """Jets of every coordinate from its samples; returns the jet arrays per coordinate."""
    return [finite_difference_jets(t, q[:, i], order) for i in range(m.n)]


def diagnostics(traj: Trajectory, m: LagrangianModel | None = None, el_spacing: float = 5e-2) -> Diagnostics:
    """Euler-Lagrange residual, action consistency and the P0 + H0 check.

    Jets are rebuilt from the coordinate samples alone (velocity samples are
    gauge-shifted and do not equal dq/dt in general).
    """
    m = m or traj.model
    N = len(traj.s)
    t = traj.t
    Z = float(traj.Z[-1])
    notes: List[str] = []
    pvals = {s: float(v) for s, v in m.param_symbols.items()}
    Hf = lambdify([traj.H0], m.phase_symbols + [TIME], pvals) if traj.H0 is not None else None
    if N == 1:
        return Diagnostics(0.0, 0.0, Z, 0.0, _energy(traj, Hf), ["single sample"])
    if N < 9:
        raise TooFewSamples(f"diagnostics need at least 9 samples, got {N}")
    energy = _energy(traj, Hf)
    q = traj.phase[:, :m.n]
    if np.ptp(t) == 0:
        return Diagnostics(None, 0.0, Z, abs(Z) / max(1.0, abs(Z)), energy, ["time does not advance"])
    if np.any(np.diff(t) <= 0):
        notes.append("time is not strictly increasing; Euler-Lagrange residual skipped")
    jet_syms = [[m.q(i), m.qbar(i), m.qddot(i)] for i in range(m.n)]
    Lf = lambdify([m.L], [s for trip in jet_syms for s in trip] + [TIME], pvals)
    jets = _lagrangian_on_samples(m, t, q, 2)
    X = np.vstack([j for jj in jets for j in jj] + [t[None, :]])
    Lvals = Lf(X)[0]
    integral = float(simpson(y=Lvals, x=t))
    rel = abs(Z - integral) / max(1.0, abs(Z))
    el = None
    if not notes:
        stride = max(1, int(round(el_spacing / max(np.median(np.diff(t)), 1e-300))))
        idx = np.arange(0, N, stride)
        if len(idx) >= 9:
            ts = t[idx]
            ELs = euler_lagrange(m)
            syms = []
            for i in range(m.n):
                syms += [m.q(i), m.qbar(i), m.qddot(i), jet(m.coords[i], i + 1, 3), jet(m.coords[i], i + 1, 4)]
            ELf = lambdify(ELs, syms + [TIME], pvals)
            J = [finite_difference_jets(ts, q[idx, i], 4) for i in range(m.n)]
            X4 = np.vstack([j for jj in J for j in jj] + [ts[None, :]])
            el = float(np.max(np.abs(ELf(X4))))
        else:
            notes.append("too few subsampled points for the Euler-Lagrange residual")
    return Diagnostics(el, integral, Z, rel, energy, notes)


def _energy(traj: Trajectory, Hf) -> float:
    if Hf is None:
        return float("nan")
    X = np.vstack([traj.phase.T, traj.t[None, :]])
    return float(np.max(np.abs(traj.P0 + Hf(X)[0])))
