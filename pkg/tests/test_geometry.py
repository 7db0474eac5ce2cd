import math

import numpy as np
import pytest

from mrayleigh.coefficients import (
    EvalPoint,
    GeometricStructure,
    SpeedVector,
    constant_structure,
    prolongation_structure,
)
from mrayleigh.errors import ConditionViolated, DimensionMismatch
from mrayleigh.geometry import (
    FieldFunction,
    GridSpec,
    ResidualReport,
    box,
    check_prolongation,
    check_reversibility,
    hessian,
    prolong_field,
    rayleigh_residual,
    residual_for,
    stationary_solution,
    traveling_sine,
    vdp_residual,
)

rng = np.random.default_rng(91)


def _random_constant_structure(m, variant="rayleigh"):
    A = rng.normal(size=(m, m))
    h = A + A.T
    c = rng.normal(size=m)
    if variant == "rayleigh":
        b = rng.normal()
        return constant_structure(h, c=c, b=np.full((m, m, m), b))
    return constant_structure(h, c=c, d=rng.normal(size=m))


def _sin_exp_field(m):
    """u = sin(x + t1) * exp(0.3 t_m), with full analytic partials."""

    def u(x, t):
        return math.sin(x + t[0]) * math.exp(0.3 * t[-1])

    def grad(x, t):
        out = np.zeros(m)
        out[0] += math.cos(x + t[0]) * math.exp(0.3 * t[-1])
        out[-1] += 0.3 * u(x, t)
        return out

    def hess(x, t):
        out = np.zeros((m, m))
        e = math.exp(0.3 * t[-1])
        out[0, 0] += -math.sin(x + t[0]) * e
        out[0, -1] += 0.3 * math.cos(x + t[0]) * e
        out[-1, 0] += 0.3 * math.cos(x + t[0]) * e
        out[-1, -1] += 0.09 * u(x, t)
        return out

    def d2x(x, t):
        return -math.sin(x + t[0]) * math.exp(0.3 * t[-1])

    return FieldFunction(u=u, grad_t=grad, hess_t=hess, d2x=d2x, m=m)


def test_stationary_solution_gives_exactly_zero_residual():
    u = stationary_solution(1.7, -0.4)
    for m in (1, 2, 3):
        for variant in ("rayleigh", "vdp"):
            st = _random_constant_structure(m, variant)
            res = residual_for(st)
            for _ in range(5):
                x, t = rng.normal(), rng.normal(size=m)
                assert res(u, st, x, t) == 0.0


def test_box_is_linear_for_analytic_fields():
    m = 2
    st = _random_constant_structure(m)
    u = _sin_exp_field(m)
    v = stationary_solution(0.5, 2.0)
    al, be = 1.3, -0.7

    def w_val(x, t):
        return al * u.value(x, t) + be * v.value(x, t)

    w = FieldFunction(
        u=w_val,
        grad_t=lambda x, t: al * u.time_gradient(x, t) + be * v.time_gradient(x, t),
        hess_t=lambda x, t: al * u.time_hessian(x, t) + be * v.time_hessian(x, t),
        d2x=lambda x, t: al * u.second_x(x, t) + be * v.second_x(x, t),
        m=m,
    )
    for _ in range(10):
        x, t = rng.normal(), rng.normal(size=m)
        lhs = box(w, st, x, t)
        rhs = al * box(u, st, x, t) + be * box(v, st, x, t)
        assert abs(lhs - rhs) <= 1e-12


def test_hessian_symmetry():
    m = 3
    st = _random_constant_structure(m)
    u = _sin_exp_field(m)
    H = hessian(u, st, 0.3, np.array([0.1, -0.2, 0.5]))
    assert np.max(np.abs(H - H.T)) <= 1e-9
    # finite-difference fallback should stay symmetric to FD noise
    u_fd = FieldFunction(u=u.value, m=m)
    H2 = hessian(u_fd, st, 0.3, np.array([0.1, -0.2, 0.5]))
    assert np.max(np.abs(H2 - H2.T)) <= 1e-6


def test_fd_fallback_matches_analytic_partials():
    m = 2
    ana = _sin_exp_field(m)
    fd = FieldFunction(u=ana.value, m=m)
    for _ in range(8):
        x, t = rng.normal(), rng.normal(size=m)
        assert np.max(np.abs(fd.time_gradient(x, t) - ana.time_gradient(x, t))) <= 1e-8
        assert np.max(np.abs(fd.time_hessian(x, t) - ana.time_hessian(x, t))) <= 1e-5
        assert abs(fd.second_x(x, t) - ana.second_x(x, t)) <= 1e-5


def test_reversibility_parity():
    m = 2
    pts = [EvalPoint(rng.normal(), rng.normal(size=m)) for _ in range(20)]

    def odd_c(x, t, eta, xi):
        return np.array([t[0], t[1] ** 3])

    def odd_b(x, t, eta, xi):
        out = np.zeros((m, m, m))
        out[0, 0, 0] = t[0]
        return out

    st_odd = GeometricStructure(m=m, h=lambda *a: np.eye(m),
                                gamma=lambda *a: np.zeros((m, m, m)),
                                c_field=odd_c, b_field=odd_b)
    assert check_reversibility(st_odd, pts)

    st_const = constant_structure(np.eye(m), c=np.array([1.0, 0.0]))
    assert not check_reversibility(st_const, pts)

    st_zero = constant_structure(np.eye(m))
    assert check_reversibility(st_zero, pts)


def test_reversibility_reflects_residuals():
    # for an odd structure, u(x, -t) has the reflected residual field
    m = 2

    def odd_c(x, t, eta, xi):
        return np.array([t[0], 0.5 * t[1]])

    def odd_b(x, t, eta, xi):
        out = np.zeros((m, m, m))
        out[0, 0, 0] = 2.0 * t[0]
        return out

    st = GeometricStructure(m=m, h=lambda *a: np.eye(m),
                            gamma=lambda *a: np.zeros((m, m, m)),
                            c_field=odd_c, b_field=odd_b)
    u = _sin_exp_field(m)
    refl = FieldFunction(
        u=lambda x, t: u.value(x, -t),
        grad_t=lambda x, t: -u.time_gradient(x, -t),
        hess_t=lambda x, t: u.time_hessian(x, -t),
        d2x=lambda x, t: u.second_x(x, -t),
        m=m,
    )
    for _ in range(10):
        x, t = rng.normal(), rng.normal(size=m)
        r_orig = rayleigh_residual(u, st, x, -t)
        r_refl = rayleigh_residual(refl, st, x, t)
        assert abs(r_refl - r_orig) <= 1e-9


def test_vdp_residual_uses_eta_squared_damping():
    m = 1
    st = constant_structure(np.array([[2.0]]), c=0.0, d=np.array([1.0]))
    u = FieldFunction(u=lambda x, t: t[0] ** 2,
                      grad_t=lambda x, t: np.array([2.0 * t[0]]),
                      hess_t=lambda x, t: np.array([[2.0]]),
                      d2x=lambda x, t: 0.0, m=1)
    # residual = h u_tt + u^2 d u_t - u_xx = 4 + t^4 * 2t
    got = vdp_residual(u, st, 0.0, np.array([1.5]))
    want = 4.0 + (1.5 ** 2) ** 2 * (2.0 * 1.5)
    assert abs(got - want) <= 1e-12


def test_grid_spec_shapes():
    g = GridSpec((0.0, 1.0, 3), ((0.0, 2.0, 2), (0.0, 1.0, 4)))
    assert g.m == 2
    assert g.n_points() == 3 * 2 * 4
    pts = list(g.points())
    assert len(pts) == 24
    x0, t0 = pts[0]
    assert x0 == 0.0 and t0.shape == (2,)
    xs = g.axis_values()[0]
    assert np.allclose(xs, [0.0, 0.5, 1.0])


def test_residual_report_serialization():
    g = GridSpec((0.0, 1.0, 2), ((0.0, 1.0, 2),))
    rep = check_prolongation(traveling_sine(), prolongation_structure(1, 0.0),
                             grid=g)
    assert isinstance(rep, ResidualReport)
    d = rep.to_json_dict()
    assert set(d) == {"labels", "points", "residuals", "max_abs", "rms"}
    assert rep.csv_header() == ["x", "t1", "residual"]
    assert len(list(rep.csv_rows())) == len(rep.residuals)


def test_prolonged_sine_solves_multitime_equation():
    grid = GridSpec((0.0, 2.0 * math.pi, 9),
                    ((0.0, 1.0, 5), (0.0, 1.0, 3), (0.0, 1.0, 3)))
    rep = check_prolongation(traveling_sine(), prolongation_structure(3, 0.0),
                             grid=grid)
    assert rep.max_abs <= 1e-6


def test_prolonged_stationary_field_has_zero_residual():
    grid = GridSpec((-1.0, 1.0, 5), ((0.0, 1.0, 3), (0.0, 1.0, 3)))
    rep = check_prolongation(stationary_solution(0.8, 0.1),
                             prolongation_structure(2, 0.5), grid=grid)
    assert rep.max_abs == 0.0


def test_check_prolongation_rejects_unbalanced_structure():
    st = constant_structure(np.eye(3), c=np.array([1.0, 0.0, 0.0]))
    grid = GridSpec((0.0, 1.0, 3), ((0.0, 1.0, 2), (0.0, 1.0, 2), (0.0, 1.0, 2)))
    with pytest.raises(ConditionViolated):
        check_prolongation(traveling_sine(), st, grid=grid)


def test_check_prolongation_grid_argument_forms():
    grid = GridSpec((0.0, 1.0, 3), ((0.0, 1.0, 2),))
    st = prolongation_structure(1, 0.0)
    a = check_prolongation(traveling_sine(), st, None, grid)
    b = check_prolongation(traveling_sine(), st, grid)  # grid in the legacy slot
    assert a.max_abs == b.max_abs
    with pytest.raises(ValueError):
        check_prolongation(traveling_sine(), st)


def test_prolong_field_dimension_guard():
    u3 = _sin_exp_field(3)
    with pytest.raises(DimensionMismatch):
        prolong_field(u3, 4)
