"""Geodesics with parallel frames and the matrix Riccati equation along them.

The geodesic and parallel-transport system is integrated with the classical
fourth-order one-step scheme on the combined state (x, x', w1, w2); the
Riccati equation u' + u^2 + J(t) = 0 is integrated on the 2x2 symmetric
matrix u expressed in the parallel frame, with J(t) sampled along the path
and interpolated to stage times by 4-point Lagrange interpolation (also
fourth order, so the scheme keeps its order).

No projection onto trace-free matrices is performed during integration: the
trace-free constraint is a hypothesis about the metric, and the measured
trace defect is part of the scientific output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curvature import curvature_r_only
from .metrics import MetricSpec, gamma_at

BLOWUP_NORM = 1e8


@dataclass
class GeodesicPath:
    spec: MetricSpec
    dt: float
    ts: np.ndarray  # (n,)
    xs: np.ndarray  # (n,3) positions
    vs: np.ndarray  # (n,3) velocities
    w1s: np.ndarray  # (n,3) parallel frame
    w2s: np.ndarray

    def speed_drift(self) -> float:
        worst = 0.0
        for x, v in zip(self.xs, self.vs):
            g, _, _ = gamma_at(self.spec, x)
            worst = max(worst, abs(float(v @ g @ v) - 1.0))
        return worst

    def frame_drift(self) -> float:
        worst = 0.0
        for x, v, w1, w2 in zip(self.xs, self.vs, self.w1s, self.w2s):
            g, _, _ = gamma_at(self.spec, x)
            worst = max(
                worst,
                abs(float(w1 @ g @ w1) - 1.0),
                abs(float(w2 @ g @ w2) - 1.0),
                abs(float(w1 @ g @ w2)),
                abs(float(v @ g @ w1)),
                abs(float(v @ g @ w2)),
            )
        return worst


@dataclass
class RiccatiState:
    t: float
    u: np.ndarray  # 2x2 symmetric
    trace_defect: float


@dataclass
class RiccatiResult:
    states: list
    trace_defect_max: float
    blown_up: bool
    blowup_time: float | None
    blowup_bracket: tuple | None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1].u


def _rhs(spec, y):
    x, v, w1, w2 = y[0:3], y[3:6], y[6:9], y[9:12]
    _, _, gamma = gamma_at(spec, x)
    acc = -np.einsum("kij,i,j->k", gamma, v, v)
    dw1 = -np.einsum("kij,i,j->k", gamma, v, w1)
    dw2 = -np.einsum("kij,i,j->k", gamma, v, w2)
    return np.concatenate([v, acc, dw1, dw2])


def _rk4(spec, y, dt):
    k1 = _rhs(spec, y)
    k2 = _rhs(spec, y + 0.5 * dt * k1)
    k3 = _rhs(spec, y + 0.5 * dt * k2)
    k4 = _rhs(spec, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def geodesic_step(spec: MetricSpec, p, v, dt: float):
    """Single fourth-order step of the geodesic equation; returns (x, v)."""
    y = np.concatenate([np.asarray(p, float), np.asarray(v, float), np.zeros(6)])
    y = _rk4(spec, y, dt)
    return y[0:3], y[3:6]


def _initial_frame(spec, p, v):
    g, _, _ = gamma_at(spec, p)
    n = math.sqrt(float(v @ g @ v))
    v = v / n
    cands = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        c = e - float(e @ g @ v) * v
        cands.append((float(c @ g @ c), k, c))
    cands.sort(key=lambda it: (-it[0], it[1]))
    w1 = cands[0][2] / math.sqrt(cands[0][0])
    c = cands[1][2]
    c = c - float(c @ g @ w1) * w1
    nc = math.sqrt(float(c @ g @ c))
    if nc < 1e-12:
        c = cands[2][2] - float(cands[2][2] @ g @ w1) * w1 - float(cands[2][2] @ g @ v) * v
        nc = math.sqrt(float(c @ g @ c))
    w2 = c / nc
    return v, w1, w2


def integrate_geodesic(spec: MetricSpec, p, v, T: float, dt: float) -> GeodesicPath:
    """Geodesic through (p, v) with a parallel orthonormal frame of v-perp.

    v is normalized to unit g-length at p.  Sample times are 0, dt, ..., T
    (last step shortened if T is not a multiple of dt).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    v, w1, w2 = _initial_frame(spec, p, v)
    n_steps = int(round(T / dt))
    ts = [0.0]
    ys = [np.concatenate([p, v, w1, w2])]
    y = ys[0]
    t = 0.0
    for _ in range(n_steps):
        h = min(dt, T - t)
        if h <= 0:
            break
        y = _rk4(spec, y, h)
        t += h
        ts.append(t)
        ys.append(y)
    ys = np.array(ys)
    return GeodesicPath(
        spec=spec,
        dt=dt,
        ts=np.array(ts),
        xs=ys[:, 0:3],
        vs=ys[:, 3:6],
        w1s=ys[:, 6:9],
        w2s=ys[:, 9:12],
    )


def jacobi_along(spec: MetricSpec, path: GeodesicPath) -> np.ndarray:
    """J(t) in the parallel frame at each path sample: (n,2,2) symmetric."""
    out = np.empty((len(path.ts), 2, 2))
    for i, (x, v, w1, w2) in enumerate(zip(path.xs, path.vs, path.w1s, path.w2s)):
        g, _, R = curvature_r_only(spec, x)
        J = np.einsum("ijkl,j,k->li", R, v, v)
        m11 = float(w1 @ g @ (J @ w1))
        m22 = float(w2 @ g @ (J @ w2))
        m12 = 0.5 * float(w1 @ g @ (J @ w2) + w2 @ g @ (J @ w1))
        out[i] = [[m11, m12], [m12, m22]]
    return out


def _interp_J(ts, Js, t):
    """4-point Lagrange interpolation of the J samples at time t."""
    n = len(ts)
    if n == 1:
        return Js[0]
    i = int(np.searchsorted(ts, t)) - 1
    i = max(0, min(i, n - 2))
    lo = max(0, min(i - 1, n - 4))
    idx = range(lo, min(lo + 4, n))
    out = np.zeros((2, 2))
    for a in idx:
        w = 1.0
        for b in idx:
            if a != b:
                w *= (t - ts[b]) / (ts[a] - ts[b])
        out += w * Js[a]
    return out


def integrate_riccati(path: GeodesicPath, Js: np.ndarray, u0, T: float | None = None) -> RiccatiResult:
    """Integrate u' = -u^2 - J(t) from a symmetric 2x2 initial value.

    Blow-up (Frobenius norm above 1e8) is a return value, not an error; the
    crossing time is refined by step bisection to about 1e-3.
    """
    u = np.asarray(u0, dtype=float)
    if u.shape != (2, 2) or abs(u[0, 1] - u[1, 0]) > 1e-12:
        raise ValueError("u0 must be symmetric 2x2")
    ts = path.ts
    t_end = float(ts[-1]) if T is None else min(float(T), float(ts[-1]))

    def f(t, u):
        return -(u @ u) - _interp_J(ts, Js, t)

    def step(t, u, h):
        k1 = f(t, u)
        k2 = f(t + 0.5 * h, u + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, u + 0.5 * h * k2)
        k4 = f(t + h, u + h * k3)
        return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    states = [RiccatiState(0.0, u.copy(), abs(float(np.trace(u))))]
    defect = states[0].trace_defect
    t = 0.0
    dt = float(path.dt)
    while t < t_end - 1e-14:
        h = min(dt, t_end - t)
        u_next = step(t, u, h)
        if not np.all(np.isfinite(u_next)) or np.linalg.norm(u_next) > BLOWUP_NORM:
            lo, hi = t, t + h
            u_lo = u.copy()
            while hi - lo > 1e-3:
                mid = 0.5 * (lo + hi)
                u_mid = step(lo, u_lo, mid - lo)
                if not np.all(np.isfinite(u_mid)) or np.linalg.norm(u_mid) > BLOWUP_NORM:
                    hi = mid
                else:
                    lo, u_lo = mid, u_mid
            t_blow = 0.5 * (lo + hi)
            return RiccatiResult(states, defect, True, t_blow, (lo, hi))
        t += h
        u = u_next
        d = abs(float(np.trace(u)))
        defect = max(defect, d)
        states.append(RiccatiState(t, u.copy(), d))
    return RiccatiResult(states, defect, False, None, None)


@dataclass
class ProbeCandidate:
    a: float
    b: float
    jet1_residual: float
    jet2_residual: float
    trace0_residual: float
    trace_defect: float
    blown_up: bool
    blowup_time: float | None


@dataclass
class ProbeReport:
    candidates: list
    best: ProbeCandidate
    min_combined: float  # min over candidates of max(jet residuals, trace defect)
    first_jet_inconsistency: bool
    ric_vv: float


def constrained_probe(
    spec: MetricSpec,
    p,
    v,
    T: float = 1.0,
    grid_radius: float | None = None,
    grid_n: int = 21,
    dt: float = 1e-2,
) -> ProbeReport:
    """Scan trace-free initial values u0 = [[a,b],[b,-a]] on a grid.

    For each candidate the report carries the two jet-condition residuals at
    t = 0 (the linear conditions 4(aA+bB) = D1 and 4(aA1+bB1) = D2), the
    zeroth trace condition |2(a^2+b^2) + ric(v,v)|, the max trace defect of
    the integrated trajectory, and the blow-up time if any.  The best
    candidate minimizes (max jet residual, trace defect, trace0, |u0|).

    ``first_jet_inconsistency`` is set when the jet system is degenerate (all
    coefficients ~ 0) so its minimal-norm solution is u0 = 0, yet
    ric(v,v) != 0 makes the trace condition unsatisfiable at that candidate.
    """
    from .obstruction import obstruction_values

    p = np.asarray(p, dtype=float)
    from .curvature import pack_at

    pack = pack_at(spec, p)
    v = np.asarray(v, dtype=float)
    v = v / pack.norm(v)
    ov = obstruction_values(pack, v)
    A, B = ov.frame.A, ov.frame.B
    A1, B1 = ov.derived.A1, ov.derived.B1
    D1, D2 = ov.D1, ov.D2
    ric_vv = ov.frame.t

    if grid_radius is None:
        grid_radius = 2.0 * math.sqrt(max(0.0, -ric_vv) / 2.0)
        if grid_radius == 0.0 and ric_vv > 1e-12:
            grid_radius = 1.0

    path = integrate_geodesic(spec, p, v, T, dt)
    Js = jacobi_along(spec, path)

    if grid_n < 1 or grid_radius == 0.0:
        grid = [0.0]
    else:
        grid = np.linspace(-grid_radius, grid_radius, grid_n)
    candidates = []
    for a in grid:
        for b in grid:
            u0 = np.array([[a, b], [b, -a]])
            res = integrate_riccati(path, Js, u0, T)
            candidates.append(
                ProbeCandidate(
                    a=float(a),
                    b=float(b),
                    jet1_residual=abs(4.0 * (a * A + b * B) - D1),
                    jet2_residual=abs(4.0 * (a * A1 + b * B1) - D2),
                    trace0_residual=abs(2.0 * (a * a + b * b) + ric_vv),
                    trace_defect=res.trace_defect_max,
                    blown_up=res.blown_up,
                    blowup_time=res.blowup_time,
                )
            )

    def key(c):
        return (
            max(c.jet1_residual, c.jet2_residual),
            c.trace_defect,
            c.trace0_residual,
            math.hypot(c.a, c.b),
        )

    best = min(candidates, key=key)
    min_combined = min(max(c.jet1_residual, c.jet2_residual, c.trace_defect) for c in candidates)
    degenerate = (
        math.hypot(A, B) < 1e-9 and math.hypot(A1, B1) < 1e-9 and abs(D1) < 1e-9 and abs(D2) < 1e-9
    )
    inconsistent = degenerate and abs(ric_vv) > 1e-9
    return ProbeReport(
        candidates=candidates,
        best=best,
        min_combined=min_combined,
        first_jet_inconsistency=inconsistent,
        ric_vv=ric_vv,
    )
