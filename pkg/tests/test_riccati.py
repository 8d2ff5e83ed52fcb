import math

import numpy as np
import pytest

from riccati3 import metrics
from riccati3.riccati import (
    constrained_probe,
    integrate_geodesic,
    integrate_riccati,
    jacobi_along,
)


def test_flat_geodesic_is_straight():
    spec = metrics.builtin("flat")
    path = integrate_geodesic(spec, (0.1, 0.2, 0.3), (1.0, 0.0, 0.0), 1.0, 1e-2)
    assert np.allclose(path.xs[-1], [1.1, 0.2, 0.3], atol=1e-12)
    assert np.allclose(path.w1s[0], path.w1s[-1], atol=1e-12)


def test_hyperbolic_vertical_closed_form():
    spec = metrics.builtin("hyperbolic", c=1.0)
    path = integrate_geodesic(spec, (0, 0, 1.0), (0, 0, 1.0), 1.0, 1e-3)
    assert np.max(np.abs(path.xs[-1] - np.array([0, 0, math.e]))) < 1e-8
    # parallel frame stays coordinate-aligned and rescales with height
    assert np.max(np.abs(path.w1s[-1] - np.array([math.e, 0, 0]))) < 1e-7


def test_geodesic_invariants_long_run():
    spec = metrics.builtin("heisenberg", L=1.0)
    path = integrate_geodesic(spec, (0.1, 0.2, 0.3), (0.6, 0.7, 0.3), 10.0, 1e-3)
    assert path.speed_drift() < 1e-8
    assert path.frame_drift() < 1e-8


def test_geodesic_halving_dt_16x():
    spec = metrics.builtin("hyperbolic", c=1.0)
    errs = []
    for dt in (0.02, 0.01):
        path = integrate_geodesic(spec, (0, 0, 1.0), (0, 0, 1.0), 1.0, dt)
        errs.append(float(np.max(np.abs(path.xs[-1] - np.array([0, 0, math.e])))))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.15)


def test_sphere_great_circle_period():
    spec = metrics.builtin("sphere", c=1.0)
    p0 = np.array([0.3, 0.1, 0.2])
    path = integrate_geodesic(spec, p0, (0.1, 1.0, -0.2), 2 * math.pi, 2.5e-4)
    assert np.max(np.abs(path.xs[-1] - p0)) < 1e-6


def test_jacobi_along_constant_curvature():
    spec = metrics.builtin("flat")
    path = integrate_geodesic(spec, (0, 0, 0), (1, 0, 0), 0.5, 1e-2)
    Js = jacobi_along(spec, path)
    assert np.max(np.abs(Js)) == 0.0

    spec = metrics.builtin("hyperbolic", c=1.0)
    path = integrate_geodesic(spec, (0, 0, 1.0), (0.2, 0.1, 0.9), 1.0, 1e-2)
    Js = jacobi_along(spec, path)
    assert np.max(np.abs(Js + np.eye(2))) < 1e-8


def test_jacobi_along_heisenberg_crosscheck():
    from riccati3.curvature import jacobi_op, pack_at

    spec = metrics.builtin("heisenberg", L=1.0)
    path = integrate_geodesic(spec, (0.1, 0.2, 0.3), (0.5, 0.7, 0.4), 0.5, 1e-2)
    Js = jacobi_along(spec, path)
    assert np.std([J[0, 0] for J in Js]) > 1e-6  # genuinely non-constant
    for k in (0, len(path.ts) // 2, len(path.ts) - 1):
        pk = pack_at(spec, path.xs[k])
        v, w1, w2 = path.vs[k], path.w1s[k], path.w2s[k]
        J3 = jacobi_op(pk, v)
        m11 = float(w1 @ pk.g @ (J3 @ w1))
        m12 = float(w1 @ pk.g @ (J3 @ w2))
        m22 = float(w2 @ pk.g @ (J3 @ w2))
        assert abs(m11 - Js[k][0, 0]) < 1e-6
        assert abs(m12 - Js[k][0, 1]) < 1e-6
        assert abs(m22 - Js[k][1, 1]) < 1e-6
        assert abs(np.trace(Js[k]) - float(v @ pk.ric @ v)) < 1e-8


def test_riccati_flat_zero():
    spec = metrics.builtin("flat")
    path = integrate_geodesic(spec, (0, 0, 0), (1, 0, 0), 1.0, 1e-2)
    Js = jacobi_along(spec, path)
    res = integrate_riccati(path, Js, np.zeros((2, 2)))
    assert res.trace_defect_max == 0.0
    assert np.max(np.abs(res.final)) == 0.0


def test_riccati_hyperbolic_fixed_point():
    spec = metrics.builtin("hyperbolic", c=1.0)
    path = integrate_geodesic(spec, (0, 0, 1.0), (0, 0, 1.0), 10.0, 1e-2)
    Js = jacobi_along(spec, path)
    res = integrate_riccati(path, Js, np.eye(2))
    dev = max(float(np.max(np.abs(s.u - np.eye(2)))) for s in res.states)
    assert dev < 1e-8


def test_riccati_flat_blowup():
    spec = metrics.builtin("flat")
    path = integrate_geodesic(spec, (0, 0, 0), (1, 0, 0), 1.2, 1e-3)
    Js = jacobi_along(spec, path)
    res = integrate_riccati(path, Js, np.diag([1.0, -1.0]))
    assert res.blown_up
    assert res.blowup_time == pytest.approx(1.0, abs=1e-3)
    assert res.blowup_bracket[1] - res.blowup_bracket[0] <= 1e-3 + 1e-12


def test_riccati_trace_identity():
    spec = metrics.builtin("heisenberg", L=1.0)
    path = integrate_geodesic(spec, (0.1, 0.2, 0.3), (0.5, 0.7, 0.4), 1.0, 1e-3)
    Js = jacobi_along(spec, path)
    res = integrate_riccati(path, Js, np.array([[0.3, 0.1], [0.1, -0.3]]))
    ts = path.ts[: len(res.states)]
    tr_u = np.array([np.trace(s.u) for s in res.states])
    tr_u2 = np.array([np.trace(s.u @ s.u) for s in res.states])
    tr_J = np.array([np.trace(J) for J in Js[: len(res.states)]])
    ddt = np.gradient(tr_u, ts)
    assert np.max(np.abs(ddt + tr_u2 + tr_J)[2:-2]) < 1e-6


def test_order4_convergence_both_integrators():
    spec = metrics.builtin("hyperbolic", c=1.0)
    p0, v0 = (0, 0, 1.0), (0, 0, 1.0)
    geo_errs, ric_errs = [], []
    for dt in (0.02, 0.01, 0.005):
        path = integrate_geodesic(spec, p0, v0, 1.0, dt)
        geo_errs.append(float(np.max(np.abs(path.xs[-1] - np.array([0, 0, math.e])))))
        res = integrate_riccati(path, jacobi_along(spec, path), np.zeros((2, 2)))
        ric_errs.append(abs(res.final[0, 0] - math.tanh(1.0)))
    for errs in (geo_errs, ric_errs):
        for k in range(2):
            slope = math.log2(errs[k] / errs[k + 1])
            assert abs(slope - 4.0) < 0.2


def test_metric_fault_along_path():
    from riccati3.exprjet import DomainFault

    comps = {
        "g11": "1", "g12": "0", "g13": "0",
        "g22": "1", "g23": "0", "g33": "1 + 0.1*log(x1)",
    }
    spec = metrics.custom(comps, name="half_space")
    with pytest.raises(DomainFault):
        integrate_geodesic(spec, (0.2, 0, 0), (-1.0, 0, 0), 1.0, 1e-2)


def test_probe_flat():
    rep = constrained_probe(metrics.builtin("flat"), (0, 0, 0), (1.0, 0.2, 0.1), T=1.0, grid_n=9)
    b = rep.best
    assert (b.a, b.b) == (0.0, 0.0)
    assert max(b.jet1_residual, b.jet2_residual, b.trace0_residual, b.trace_defect) == 0.0
    assert not rep.first_jet_inconsistency


def test_probe_hyperbolic_flags_first_jet():
    rep = constrained_probe(
        metrics.builtin("hyperbolic", c=1.0), (0, 0, 1.0), (0.3, 0.2, 0.5), T=1.0, grid_n=9
    )
    assert rep.first_jet_inconsistency
    assert rep.ric_vv == pytest.approx(-2.0, abs=1e-9)
    # candidates on the circle 2(a^2+b^2) = 2 do integrate cleanly
    assert rep.best.trace_defect < 1e-6
    assert rep.best.trace0_residual < 1e-9


def test_probe_heisenberg_no_candidate():
    rep = constrained_probe(
        metrics.builtin("heisenberg", L=1.0), (0.1, 0.2, 0.3), (0.5, 0.7, 0.4), T=1.0, grid_n=15
    )
    assert rep.min_combined > 1e-6
    assert not rep.first_jet_inconsistency
