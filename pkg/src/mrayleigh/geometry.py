"""Multitime differential operators and PDE residual checks.

The connection-corrected Hessian of a scalar field u(x, t^1, ..., t^m) is

    (Hess u)_{ab} = d2u/dt^a dt^b - Gamma^g_{ab} du/dt^g

and the box operator is its h-trace, h^{ab} (Hess u)_{ab}.  The two wave
equations verified here read, in residual form,

    rayleigh:    h^{ab} u_{ab} - C^g u_g + B^{abc} u_a u_b u_c - u_xx
    van der pol: h^{ab} u_{ab} - C^g u_g + u^2 D^g u_g - u_xx

with u_a = du/dt^a.  Fields may carry analytic partials; anything missing
falls back to central finite differences whose steps scale with the
coordinate (first order 1e-5 * max(1, |coord|), second order
5e-5 * max(1, |coord|); the larger second-order step keeps the roundoff
part of the difference quotient well below the 1e-6 residual budget).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import (
    CONSTRAINT_TOL,
    EvalPoint,
    GeometricStructure,
    SpeedVector,
    Variant,
    check_constraint,
)
from .errors import ConditionViolated, DimensionMismatch, WrongVariant

FD_STEP_FIRST = 1e-5
FD_STEP_SECOND = 5e-5


def _h1(coord: float) -> float:
    return FD_STEP_FIRST * max(1.0, abs(coord))


def _h2(coord: float) -> float:
    return FD_STEP_SECOND * max(1.0, abs(coord))


@dataclass(frozen=True)
class FieldFunction:
    """Scalar field u(x, t) with optional analytic partial derivatives.

    ``u(x, t)`` takes a float and a length-m array.  ``grad_t`` returns the
    m-vector du/dt^a, ``hess_t`` the (m, m) matrix of second time partials
    and ``d2x`` the scalar d2u/dx2; each may be None, in which case central
    differences of ``u`` are used.
    """

    u: Callable[[float, np.ndarray], float]
    grad_t: Callable | None = None
    hess_t: Callable | None = None
    d2x: Callable | None = None
    m: int | None = None

    def value(self, x: float, t) -> float:
        return float(self.u(float(x), np.asarray(t, dtype=float)))

    def time_gradient(self, x: float, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.grad_t is not None:
            return np.asarray(self.grad_t(float(x), t), dtype=float)
        out = np.empty(t.size)
        for a in range(t.size):
            h = _h1(t[a])
            tp, tm = t.copy(), t.copy()
            tp[a] += h
            tm[a] -= h
            out[a] = (self.u(x, tp) - self.u(x, tm)) / (2.0 * h)
        return out

    def time_hessian(self, x: float, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.hess_t is not None:
            return np.asarray(self.hess_t(float(x), t), dtype=float)
        n = t.size
        out = np.empty((n, n))
        u0 = self.u(x, t)
        for a in range(n):
            ha = _h2(t[a])
            tp, tm = t.copy(), t.copy()
            tp[a] += ha
            tm[a] -= ha
            out[a, a] = (self.u(x, tp) - 2.0 * u0 + self.u(x, tm)) / (ha * ha)
        for a in range(n):
            for bb in range(a + 1, n):
                ha, hb = _h2(t[a]), _h2(t[bb])
                tpp, tpm, tmp, tmm = t.copy(), t.copy(), t.copy(), t.copy()
                tpp[a] += ha; tpp[bb] += hb
                tpm[a] += ha; tpm[bb] -= hb
                tmp[a] -= ha; tmp[bb] += hb
                tmm[a] -= ha; tmm[bb] -= hb
                val = (self.u(x, tpp) - self.u(x, tpm)
                       - self.u(x, tmp) + self.u(x, tmm)) / (4.0 * ha * hb)
                out[a, bb] = out[bb, a] = val
        return out

    def second_x(self, x: float, t) -> float:
        t = np.asarray(t, dtype=float)
        if self.d2x is not None:
            return float(self.d2x(float(x), t))
        h = _h2(x)
        return (self.u(x + h, t) - 2.0 * self.u(x, t) + self.u(x - h, t)) / (h * h)


def stationary_solution(slope: float, intercept: float) -> FieldFunction:
    """u(x, t) = slope * x + intercept, a solution for every structure."""
    slope, intercept = float(slope), float(intercept)
    return FieldFunction(
        u=lambda x, t: slope * x + intercept,
        grad_t=lambda x, t: np.zeros(t.size),
        hess_t=lambda x, t: np.zeros((t.size, t.size)),
        d2x=lambda x, t: 0.0,
        m=None,
    )


def traveling_sine() -> FieldFunction:
    """u(x, t) = sin(x - t), the d'Alembert solution of u_tt = u_xx (m = 1)."""
    return FieldFunction(
        u=lambda x, t: np.sin(x - t[0]),
        grad_t=lambda x, t: np.array([-np.cos(x - t[0])]),
        hess_t=lambda x, t: np.array([[-np.sin(x - t[0])]]),
        d2x=lambda x, t: -np.sin(x - t[0]),
        m=1,
    )


def prolong_field(u1: FieldFunction, m: int) -> FieldFunction:
    """Lift a single-time field to m times via v(x, t) = u(x, t^1).

    Analytic partials of ``u1`` carry over; index-1 slots hold the
    single-time derivatives and all others vanish identically.
    """
    if u1.m not in (None, 1):
        raise DimensionMismatch("can only prolong a single-time field")
    if m < 1:
        raise DimensionMismatch("need m >= 1")

    def value(x, t):
        return u1.value(x, t[:1])

    def grad(x, t):
        out = np.zeros(m)
        out[0] = u1.time_gradient(x, t[:1])[0]
        return out

    def hess(x, t):
        out = np.zeros((m, m))
        out[0, 0] = u1.time_hessian(x, t[:1])[0, 0]
        return out

    def d2x(x, t):
        return u1.second_x(x, t[:1])

    return FieldFunction(u=value, grad_t=grad, hess_t=hess, d2x=d2x, m=m)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular lattice over (x, t^1, ..., t^m).

    Each axis is a (lo, hi, count) triple; points are produced in row-major
    order with x varying slowest.
    """

    x_axis: tuple[float, float, int]
    t_axes: tuple[tuple[float, float, int], ...]

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), int(n)) for lo, hi, n in [self.x_axis])
        object.__setattr__(self, "x_axis", axes[0])
        t_axes = tuple((float(lo), float(hi), int(n)) for lo, hi, n in self.t_axes)
        object.__setattr__(self, "t_axes", t_axes)
        for lo, hi, n in (self.x_axis, *self.t_axes):
            if n < 1 or (n > 1 and hi < lo):
                raise ValueError("grid axes need hi >= lo and count >= 1")

    @property
    def m(self) -> int:
        return len(self.t_axes)

    def n_points(self) -> int:
        total = self.x_axis[2]
        for _, _, n in self.t_axes:
            total *= n
        return total

    def axis_values(self):
        def vals(lo, hi, n):
            return np.array([0.5 * (lo + hi)]) if n == 1 else np.linspace(lo, hi, n)
        return [vals(*self.x_axis)] + [vals(*ax) for ax in self.t_axes]

    def points(self):
        """Yield (x, t) pairs over the lattice."""
        grids = self.axis_values()
        mesh = np.meshgrid(*grids, indexing="ij")
        flat = [g.reshape(-1) for g in mesh]
        for i in range(flat[0].size):
            yield float(flat[0][i]), np.array([f[i] for f in flat[1:]])


@dataclass(frozen=True)
class ResidualReport:
    """Residual samples over labelled coordinates, with summary statistics."""

    points: np.ndarray          # (n, k)
    residuals: np.ndarray       # (n,)
    labels: tuple[str, ...]     # k coordinate names
    max_abs: float
    rms: float

    @classmethod
    def from_samples(cls, points, residuals, labels) -> "ResidualReport":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        residuals = np.asarray(residuals, dtype=float)
        if residuals.size == 0:
            raise ValueError("residual report needs at least one sample")
        if points.shape[0] != residuals.size or points.shape[1] != len(labels):
            raise ValueError("points, residuals and labels disagree on shape")
        max_abs = float(np.max(np.abs(residuals)))
        rms = float(np.sqrt(np.mean(residuals ** 2)))
        return cls(points=points, residuals=residuals, labels=tuple(labels),
                   max_abs=max_abs, rms=rms)

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "points": [[float(v) for v in row] for row in self.points],
            "residuals": [float(r) for r in self.residuals],
            "max_abs": self.max_abs,
            "rms": self.rms,
        }

    def csv_header(self) -> list[str]:
        return list(self.labels) + ["residual"]

    def csv_rows(self):
        for row, r in zip(self.points, self.residuals):
            yield [float(v) for v in row] + [float(r)]


def hessian(u: FieldFunction, structure: GeometricStructure, x: float, t) -> np.ndarray:
    """Connection-corrected Hessian (d2u/dt^a dt^b - Gamma^g_{ab} du/dt^g)."""
    t = np.asarray(t, dtype=float)
    if t.size != structure.m:
        raise DimensionMismatch("t has the wrong number of components")
    eta = u.value(x, t)
    xi = u.time_gradient(x, t)
    g = np.asarray(structure.gamma(x, t, eta, xi), dtype=float)
    return u.time_hessian(x, t) - np.einsum("gab,g->ab", g, xi)


def box(u: FieldFunction, structure: GeometricStructure, x: float, t) -> float:
    """h-trace of the corrected Hessian, h^{ab} (Hess u)_{ab}."""
    t = np.asarray(t, dtype=float)
    eta = u.value(x, t)
    xi = u.time_gradient(x, t)
    h = np.asarray(structure.h(x, t, eta, xi), dtype=float)
    return float(np.einsum("ab,ab", h, hessian(u, structure, x, t)))


def rayleigh_residual(u: FieldFunction, structure: GeometricStructure,
                      x: float, t) -> float:
    """Residual h^{ab} u_{ab} - C^g u_g + B^{abc} u_a u_b u_c - u_xx."""
    if structure.variant is not Variant.RAYLEIGH:
        raise WrongVariant("structure carries a D field, use vdp_residual")
    t = np.asarray(t, dtype=float)
    if t.size != structure.m:
        raise DimensionMismatch("t has the wrong number of components")
    eta = u.value(x, t)
    xi = u.time_gradient(x, t)
    h = np.asarray(structure.h(x, t, eta, xi), dtype=float)
    C = np.asarray(structure.c_field(x, t, eta, xi), dtype=float)
    B = np.asarray(structure.b_field(x, t, eta, xi), dtype=float)
    val = float(np.einsum("ab,ab", h, u.time_hessian(x, t)))
    val -= float(np.dot(C, xi))
    val += float(np.einsum("abc,a,b,c", B, xi, xi, xi))
    val -= u.second_x(x, t)
    return val


def vdp_residual(u: FieldFunction, structure: GeometricStructure,
                 x: float, t) -> float:
    """Residual h^{ab} u_{ab} - C^g u_g + u^2 D^g u_g - u_xx."""
    if structure.variant is not Variant.VAN_DER_POL:
        raise WrongVariant("structure carries a B field, use rayleigh_residual")
    t = np.asarray(t, dtype=float)
    if t.size != structure.m:
        raise DimensionMismatch("t has the wrong number of components")
    eta = u.value(x, t)
    xi = u.time_gradient(x, t)
    h = np.asarray(structure.h(x, t, eta, xi), dtype=float)
    C = np.asarray(structure.c_field(x, t, eta, xi), dtype=float)
    D = np.asarray(structure.d_field(x, t, eta, xi), dtype=float)
    val = float(np.einsum("ab,ab", h, u.time_hessian(x, t)))
    val -= float(np.dot(C, xi))
    val += eta * eta * float(np.dot(D, xi))
    val -= u.second_x(x, t)
    return val


def residual_for(structure: GeometricStructure):
    """The residual function matching the structure's variant."""
    return rayleigh_residual if structure.variant is Variant.RAYLEIGH else vdp_residual


def check_reversibility(structure: GeometricStructure, sample_points,
                        tol: float = CONSTRAINT_TOL) -> bool:
    """True iff C and B (or D) are odd under t -> -t at every sample.

    Multitime reversibility: u(x, -t) solves the equation whenever u(x, t)
    does exactly when the damping fields flip sign with time.
    """
    for p in sample_points:
        pt = p if isinstance(p, EvalPoint) else EvalPoint(*p)
        if pt.m != structure.m:
            raise DimensionMismatch("sample point has the wrong number of times")
        x, t, eta, xi = pt.x, pt.t, pt.eta, pt.xi
        pairs = [(np.asarray(structure.c_field(x, t, eta, xi), float),
                  np.asarray(structure.c_field(x, -t, eta, xi), float))]
        if structure.b_field is not None:
            pairs.append((np.asarray(structure.b_field(x, t, eta, xi), float),
                          np.asarray(structure.b_field(x, -t, eta, xi), float)))
        else:
            pairs.append((np.asarray(structure.d_field(x, t, eta, xi), float),
                          np.asarray(structure.d_field(x, -t, eta, xi), float)))
        for plus, minus in pairs:
            if np.max(np.abs(plus + minus)) > tol:
                return False
    return True


def _residual_loop(u: FieldFunction, structure: GeometricStructure, pts):
    res = residual_for(structure)
    return [res(u, structure, x, t) for x, t in pts]


def check_prolongation(u1: FieldFunction, structure: GeometricStructure,
                       lambda_unused=None, grid: GridSpec | None = None,
                       constraint_tol: float = CONSTRAINT_TOL) -> ResidualReport:
    """Verify that v(x, t) = u1(x, t^1) solves the multitime equation.

    First samples the jet of the prolonged field along the grid and checks
    the index-1 algebraic condition through ``check_constraint`` (raising
    ConditionViolated on failure), then sweeps the variant residual over
    the grid.  The third slot takes no speed vector (prolongation has
    none); the grid may be passed there directly.
    """
    if grid is None and isinstance(lambda_unused, GridSpec):
        grid, lambda_unused = lambda_unused, None
    if grid is None:
        raise ValueError("a GridSpec is required")
    if lambda_unused is not None:
        raise ValueError("prolongation takes no speed vector")
    m = structure.m
    if grid.m != m:
        raise DimensionMismatch("grid and structure disagree on m")
    v = prolong_field(u1, m)

    pts = list(grid.points())
    stride = max(1, len(pts) // 50)
    lam_probe = SpeedVector(np.ones(m))
    jets = []
    for x, t in pts[::stride]:
        xi = np.zeros(m)
        xi[0] = v.time_gradient(x, t)[0]
        jets.append(EvalPoint(x, t, eta=v.value(x, t), xi=xi))
    if not check_constraint(structure, lam_probe, jets, tol=constraint_tol):
        raise ConditionViolated(
            "index-1 condition fails on the sampled jet of the prolonged field")

    residuals = _residual_loop(v, structure, pts)
    points = np.array([[x, *t] for x, t in pts])
    labels = ["x"] + [f"t{i + 1}" for i in range(m)]
    return ResidualReport.from_samples(points, residuals, labels)
