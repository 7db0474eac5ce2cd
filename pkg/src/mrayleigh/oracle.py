"""Independent verification routes: ODE integration, residual sweeps, decay.

Nothing here reuses the closed-form construction logic.  The reduction is
re-integrated numerically from initial data, the multitime residual is
evaluated pointwise from the jet of the candidate field, and the damped
single-time equation u_tt - u_xx = eps (u_t - u_t^3) is solved by a
spectral method of lines.  Agreement between these routes and the
constructed profiles is what the test suite certifies.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, make_interp_spline

from .closed_form import SolitonProfile, as_multitime
from .coefficients import ReducedCoeffs, Variant
from .errors import (
    BadParameters,
    BlowUp,
    CFLViolation,
    DomainExceeded,
    EmptyDomain,
    StiffnessFailure,
    WrongVariant,
)
from .geometry import FieldFunction, GridSpec, ResidualReport, _h1, residual_for

# terminal-event threshold for the reduction integrator
OVERFLOW_GUARD = 1e12

# solver failures with the state already past this are classified
# as finite-z blow-up rather than stiffness
_BLOWUP_FLOOR = 1e6

TOL_MIN = 1e-12
TOL_MAX = 1e-4


def _rhs_for(coeffs: ReducedCoeffs):
    if coeffs.variant is Variant.RAYLEIGH:
        def rhs(z, y):
            phi, psi = y
            return [psi, (coeffs.b(z) * psi ** 3 - coeffs.c(z) * psi) / coeffs.a(z)]
    else:
        def rhs(z, y):
            phi, psi = y
            return [psi, (coeffs.d(z) * phi * phi * psi - coeffs.c(z) * psi) / coeffs.a(z)]
    return rhs


@dataclass
class IvpSolution:
    """Dense numerical solution of the reduced ODE on one z-interval."""

    coeffs: ReducedCoeffs
    nodes: np.ndarray
    phi_values: np.ndarray
    phi_prime_values: np.ndarray
    tolerance_used: float
    _phi_spline: CubicHermiteSpline = field(repr=False)
    _psi_spline: CubicHermiteSpline = field(repr=False)
    _psi_deriv: object = field(repr=False)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])

    def _check(self, z):
        z = np.asarray(z, dtype=float)
        lo, hi = self.span
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(z < lo - slack) or np.any(z > hi + slack):
            raise DomainExceeded(f"z outside the integrated interval [{lo}, {hi}]")
        return z

    def phi(self, z):
        out = self._phi_spline(self._check(z))
        return float(out) if out.ndim == 0 else out

    def phi_prime(self, z):
        out = self._psi_spline(self._check(z))
        return float(out) if out.ndim == 0 else out

    def phi_second(self, z):
        out = self._psi_deriv(self._check(z))
        return float(out) if out.ndim == 0 else out

    def csv_header(self) -> list[str]:
        return ["z", "phi", "phi_prime"]

    def csv_rows(self):
        for z, p, q in zip(self.nodes, self.phi_values, self.phi_prime_values):
            yield [float(z), float(p), float(q)]


def _integrate_one_way(rhs, z0, z1, y0, tol):
    """solve_ivp leg with blow-up classification and 3-point node refinement."""
    def overflow(z, y):
        return OVERFLOW_GUARD - float(np.max(np.abs(y)))
    overflow.terminal = True

    sol = solve_ivp(rhs, (z0, z1), y0, method="RK45", rtol=tol, atol=tol,
                    dense_output=True, events=[overflow])
    blew_up = sol.status == 1 and sol.t_events[0].size > 0
    if not blew_up and sol.status < 0:
        # the step-size controller died; distinguish escape from stiffness
        last = float(np.max(np.abs(sol.y[:, -1]))) if sol.y.size else 0.0
        if last > _BLOWUP_FLOOR:
            blew_up = True
        else:
            raise StiffnessFailure(
                f"integrator failed at z = {sol.t[-1]}: {sol.message}")
    if blew_up:
        raise BlowUp(f"solution escaped before z = {z1}",
                     z_reached=float(sol.t[-1]))

    # refine: three interior samples per accepted step
    zs = [sol.t[0]]
    for za, zb in zip(sol.t[:-1], sol.t[1:]):
        zs.extend(za + (zb - za) * np.array([0.25, 0.5, 0.75]))
        zs.append(zb)
    zs = np.array(zs)
    vals = sol.sol(zs)
    return zs, vals[0], vals[1]


def integrate_reduction(coeffs: ReducedCoeffs, phi0: float, phi_prime0: float,
                        span: tuple[float, float] = (-10.0, 10.0),
                        z0: float | None = None,
                        tol: float = 1e-10,
                        variant: Variant | None = None) -> IvpSolution:
    """Integrate the reduced ODE as a first-order system in (phi, phi').

    Initial data is posed at ``z0`` (default: the left end of ``span``) and
    the solver runs toward both ends when z0 is interior.  ``variant``, if
    given, must agree with what the coefficients carry.  Tolerance outside
    [1e-12, 1e-4] raises BadParameters.  Escape past 1e12 raises BlowUp
    with the z reached, other integrator failures raise StiffnessFailure.
    """
    if variant is not None and variant is not coeffs.variant:
        raise WrongVariant(f"coefficients are {coeffs.variant.value}, "
                           f"not {variant.value}")
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise BadParameters(f"tol must lie in [{TOL_MIN}, {TOL_MAX}]")
    lo, hi = float(span[0]), float(span[1])
    if not lo < hi:
        raise BadParameters("span must be an increasing pair")
    if z0 is None:
        z0 = lo
    z0 = float(z0)
    if not (lo <= z0 <= hi):
        raise BadParameters("z0 must lie inside span")

    rhs = _rhs_for(coeffs)
    y0 = [float(phi0), float(phi_prime0)]
    segs = []
    if z0 > lo:
        zb, pb, qb = _integrate_one_way(rhs, z0, lo, y0, tol)
        segs.append((zb[::-1][:-1], pb[::-1][:-1], qb[::-1][:-1]))
    segs.append((np.array([z0]), np.array([y0[0]]), np.array([y0[1]])))
    if z0 < hi:
        zf, pf, qf = _integrate_one_way(rhs, z0, hi, y0, tol)
        segs.append((zf[1:], pf[1:], qf[1:]))

    z = np.concatenate([s[0] for s in segs])
    phi = np.concatenate([s[1] for s in segs])
    psi = np.concatenate([s[2] for s in segs])
    keep = np.concatenate([[True], np.diff(z) > 0])
    z, phi, psi = z[keep], phi[keep], psi[keep]
    psi_prime = np.array([rhs(zi, (pi, qi))[1] for zi, pi, qi in zip(z, phi, psi)])

    phi_spline = CubicHermiteSpline(z, phi, psi)
    psi_spline = CubicHermiteSpline(z, psi, psi_prime)
    return IvpSolution(coeffs, z, phi, psi, tol,
                       phi_spline, psi_spline, psi_spline.derivative())


def bernoulli_chain_check(coeffs: ReducedCoeffs, profile, samples,
                          tol: float = 1e-6,
                          skip_tol: float = 1e-12) -> bool:
    """Check both stages of the order reduction along a profile.

    psi = phi' must satisfy psi' = -(c/a) psi + (b/a) psi^3, and
    xi = psi^-2 the linear equation xi' - 2 (c/a) xi = -2 (b/a).  Both
    derivatives come from central finite differences of the profile, so
    neither route trusts a supplied second derivative.  Samples where
    |phi'| < ``skip_tol`` are skipped with a warning (xi is undefined
    there); if every sample is skipped the answer is vacuously true.
    """
    if coeffs.variant is not Variant.RAYLEIGH:
        raise WrongVariant("the cubic-in-psi chain applies to the B-field variant")
    skipped = 0
    for z in np.asarray(samples, dtype=float):
        psi = profile.phi_prime(z)
        if abs(psi) < skip_tol:
            skipped += 1
            continue
        a, b, c = coeffs.a(z), coeffs.b(z), coeffs.c(z)
        h = _h1(z)
        psi_hi = profile.phi_prime(z + h)
        psi_lo = profile.phi_prime(z - h)
        dpsi = (psi_hi - psi_lo) / (2.0 * h)
        dxi = (psi_hi ** -2 - psi_lo ** -2) / (2.0 * h)
        if abs(dpsi + (c / a) * psi - (b / a) * psi ** 3) > tol:
            return False
        if abs(dxi - 2.0 * (c / a) * psi ** -2 + 2.0 * (b / a)) > tol:
            return False
    if skipped:
        warnings.warn(f"{skipped} samples skipped where |phi'| < {skip_tol}",
                      RuntimeWarning, stacklevel=2)
    return True


def reduction_ode_residual(coeffs: ReducedCoeffs, profile, zs,
                           derivative_mode: str = "analytic") -> ResidualReport:
    """Residual of the reduced ODE along a profile, as a labelled report.

    ``derivative_mode`` picks where phi'' comes from: "analytic" uses the
    profile's own second derivative, "fd" central-differences phi' so that
    the check does not trust the constructed phi''.
    """
    if derivative_mode not in ("analytic", "fd"):
        raise BadParameters("derivative_mode must be 'analytic' or 'fd'")
    zs = np.asarray(zs, dtype=float)
    residuals = []
    for z in zs:
        p = profile.phi_prime(z)
        if derivative_mode == "fd" or profile.phi_second is None:
            h = _h1(z)
            pp = (profile.phi_prime(z + h) - profile.phi_prime(z - h)) / (2.0 * h)
        else:
            pp = profile.phi_second(z)
        if coeffs.variant is Variant.RAYLEIGH:
            r = coeffs.a(z) * pp - coeffs.b(z) * p ** 3 + coeffs.c(z) * p
        else:
            r = coeffs.a(z) * pp - coeffs.d(z) * profile.phi(z) ** 2 * p + coeffs.c(z) * p
        residuals.append(r)
    return ResidualReport.from_samples(zs.reshape(-1, 1), residuals, ("z",))


def _thread_count() -> int:
    raw = os.environ.get("MRAYLEIGH_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise BadParameters(f"MRAYLEIGH_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def residual_sweep(u, structure, grid: GridSpec,
                   skip_out_of_domain: bool = False) -> ResidualReport:
    """Evaluate the variant residual of ``u`` at every grid point.

    ``u`` may be a FieldFunction or a SolitonProfile (converted through its
    own speed vector).  MRAYLEIGH_THREADS sets the worker count; results
    are ordered by the grid regardless.  With ``skip_out_of_domain`` points
    whose phase leaves a profile's validity interval are dropped; if every
    point drops, EmptyDomain is raised.
    """
    if isinstance(u, SolitonProfile):
        u = as_multitime(u)
    res = residual_for(structure)
    pts = list(grid.points())
    if not pts:
        raise EmptyDomain("grid contains no points")

    def one(pt):
        x, t = pt
        try:
            return res(u, structure, x, t)
        except DomainExceeded:
            if skip_out_of_domain:
                return None
            raise

    n = _thread_count()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            vals = list(ex.map(one, pts))
    else:
        vals = [one(pt) for pt in pts]

    rows, residuals = [], []
    for (x, t), v in zip(pts, vals):
        if v is None:
            continue
        rows.append([x] + [float(c) for c in t])
        residuals.append(v)
    if not residuals:
        raise EmptyDomain("every grid point fell outside the profile domain")
    labels = ["x"] + [f"t{i + 1}" for i in range(grid.m)]
    return ResidualReport.from_samples(rows, residuals, labels)


@dataclass(frozen=True)
class DecayResult:
    """Outcome of following a profile along a ray in multitime."""

    direction: tuple[float, ...]
    threshold: float
    horizon: float
    ok: bool
    crossing_radius: float | None
    final_value: float
    limit_metadata: dict

    def __iter__(self):
        # unpacks as (ok, crossing_radius)
        return iter((self.ok, self.crossing_radius))

    def to_json_dict(self) -> dict:
        return {
            "direction": [float(v) for v in self.direction],
            "threshold": float(self.threshold),
            "horizon": float(self.horizon),
            "ok": bool(self.ok),
            "crossing_radius": None if self.crossing_radius is None
            else float(self.crossing_radius),
            "final_value": float(self.final_value),
            "limit_metadata": self.limit_metadata,
        }


def decay_check(profile: SolitonProfile, direction, threshold: float = 1e-3,
                horizon: float = 1e3, x: float = 0.0,
                n_samples: int = 2000) -> DecayResult:
    """Does |phi| fall below ``threshold`` along t = s * direction, s -> horizon?

    The phase is z = x - s (lambda . direction); the ray is sampled up to
    the horizon, restricted to the profile's validity interval.  ok means
    a crossing radius exists past which every remaining sample stays under
    the threshold.  Known asymptotic limits recorded on the profile are
    passed through as metadata for the relevant phase direction.
    """
    direction = np.asarray(direction, dtype=float)
    if direction.size != profile.lam.m:
        raise BadParameters("direction length must match the number of times")
    rate = float(np.dot(profile.lam.values, direction))
    if rate == 0.0:
        raise BadParameters("phase is constant along this direction")
    s = np.linspace(0.0, float(horizon), n_samples)
    z = x - rate * s
    inside = np.array([profile.domain.contains(zi) for zi in z])
    if not inside.any():
        raise EmptyDomain("the ray never meets the profile domain")
    s, z = s[inside], z[inside]
    vals = np.array([abs(profile.phi(zi)) for zi in z])

    below = vals <= threshold
    crossing = None
    if below[-1]:
        # earliest sample past which no later sample exceeds the threshold
        idx = np.where(~below)[0]
        first_stable = 0 if idx.size == 0 else idx[-1] + 1
        crossing = float(s[first_stable])
    side = "-inf" if rate > 0 else "+inf"
    key = "limit_neg_inf" if rate > 0 else "limit_pos_inf"
    meta = {"phase_tends_to": side}
    if key in profile.params:
        meta["stated_limit"] = profile.params[key]
    return DecayResult(tuple(float(v) for v in direction), threshold,
                       float(horizon), crossing is not None, crossing,
                       float(vals[-1]), meta)


@dataclass
class SingleTimeSolution:
    """Spectral method-of-lines solution of u_tt - u_xx = eps (u_t - u_t^3).

    Periodic on x in [0, 2 pi).  Fourier coefficients of u and u_t are
    splined over t (quintic), so the field and the derivatives entering the
    residual are all available at arbitrary (x, t): u_t and u_tt from the
    velocity spline and its derivative, u_xx by wavenumber multiplication.
    """

    epsilon: float
    t_final: float
    n_x: int
    _k: np.ndarray = field(repr=False)
    _su: object = field(repr=False)
    _sv: object = field(repr=False)
    _svd: object = field(repr=False)

    def _check_t(self, t: float) -> float:
        t = float(t)
        slack = 1e-12 * max(1.0, self.t_final)
        if t < -slack or t > self.t_final + slack:
            raise DomainExceeded(f"t = {t} outside the integrated range "
                                 f"[0, {self.t_final}]")
        return t

    def _coeffs(self, spline, t: float) -> np.ndarray:
        row = np.asarray(spline(t))
        half = row.size // 2
        return row[:half] + 1j * row[half:]

    def _trig(self, ch: np.ndarray, x: float, order: int = 0) -> float:
        w = np.full(ch.size, 2.0)
        w[0] = 1.0
        if self.n_x % 2 == 0:
            w[-1] = 1.0
        fac = (1j * self._k) ** order if order else 1.0
        return float(np.real(np.sum(w * fac * ch * np.exp(1j * self._k * x))) / self.n_x)

    def u(self, x: float, t: float) -> float:
        return self._trig(self._coeffs(self._su, self._check_t(t)), x)

    def u_t(self, x: float, t: float) -> float:
        return self._trig(self._coeffs(self._sv, self._check_t(t)), x)

    def u_tt(self, x: float, t: float) -> float:
        return self._trig(self._coeffs(self._svd, self._check_t(t)), x)

    def u_xx(self, x: float, t: float) -> float:
        return self._trig(self._coeffs(self._su, self._check_t(t)), x, order=2)

    def as_field(self) -> FieldFunction:
        return FieldFunction(
            u=lambda x, t: self.u(x, float(np.asarray(t).reshape(-1)[0])),
            grad_t=lambda x, t: np.array([self.u_t(x, float(np.asarray(t).reshape(-1)[0]))]),
            hess_t=lambda x, t: np.array([[self.u_tt(x, float(np.asarray(t).reshape(-1)[0]))]]),
            d2x=lambda x, t: self.u_xx(x, float(np.asarray(t).reshape(-1)[0])),
            m=1,
        )

    def residual_estimate(self, n_probe_x: int = 48, n_probe_t: int = 33) -> float:
        """Max |u_tt - u_xx - eps (u_t - u_t^3)| over an off-grid probe lattice."""
        xs = np.linspace(0.1, 2.0 * np.pi - 0.1, n_probe_x)
        ts = np.linspace(0.0, self.t_final, n_probe_t)
        worst = 0.0
        for t in ts:
            cu = self._coeffs(self._su, t)
            cv = self._coeffs(self._sv, t)
            ca = self._coeffs(self._svd, t)
            for x in xs:
                ut = self._trig(cv, x)
                r = (self._trig(ca, x) - self._trig(cu, x, order=2)
                     - self.epsilon * (ut - ut ** 3))
                worst = max(worst, abs(r))
        return worst


def integrate_single_time_rayleigh(epsilon: float, u0, v0, t_final: float,
                                   n_x: int = 512, n_t: int = 201,
                                   tol: float = 1e-10) -> SingleTimeSolution:
    """Solve the damped wave equation on the periodic circle, spectrally.

    ``u0`` and ``v0`` give initial displacement and velocity as functions
    of x.  Integrator failure surfaces as CFLViolation.
    """
    if t_final <= 0.0:
        raise BadParameters("t_final must be positive")
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise BadParameters(f"tol must lie in [{TOL_MIN}, {TOL_MAX}]")
    x = np.linspace(0.0, 2.0 * np.pi, n_x, endpoint=False)
    k = np.fft.rfftfreq(n_x, d=1.0 / n_x)
    u_init = np.array([u0(xi) for xi in x], dtype=float)
    v_init = np.array([v0(xi) for xi in x], dtype=float)
    y0 = np.concatenate([u_init, v_init])

    def rhs(t, y):
        u, v = y[:n_x], y[n_x:]
        uxx = np.fft.irfft(-(k ** 2) * np.fft.rfft(u), n_x)
        return np.concatenate([v, uxx + epsilon * (v - v ** 3)])

    ts = np.linspace(0.0, t_final, n_t)
    sol = solve_ivp(rhs, (0.0, t_final), y0, method="DOP853",
                    rtol=tol, atol=tol, t_eval=ts)
    if not sol.success:
        raise CFLViolation(f"time integration failed: {sol.message}")

    U = sol.y[:n_x, :].T
    V = sol.y[n_x:, :].T
    cu = np.fft.rfft(U, axis=1)
    cv = np.fft.rfft(V, axis=1)
    su = make_interp_spline(ts, np.concatenate([cu.real, cu.imag], axis=1),
                            k=5, axis=0)
    sv = make_interp_spline(ts, np.concatenate([cv.real, cv.imag], axis=1),
                            k=5, axis=0)
    return SingleTimeSolution(float(epsilon), float(t_final), n_x,
                              k, su, sv, sv.derivative())
