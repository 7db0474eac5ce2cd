"""Closed-form traveling-wave profiles phi(z).

Every profile solves one of the reduced ODEs

    a phi'' - b (phi')^3 + c phi' = 0          (Rayleigh)
    a phi'' - d phi^2 phi' + c phi' = 0        (Van der Pol)

on a reported validity interval.  Families:

``quadrature``
    general-coefficient Rayleigh solution by nested antiderivatives,
    phi'(z) = exp(-F) / sqrt(K - 2 G) with F = int c/a and
    G = int (b/a) exp(-2 F), both anchored at z0 where phi(z0) = 0.
``arccosh``/``arcsinh``/``arcsin``
    constant-coefficient closed forms
    phi = sigma (a/c) sqrt(|c/b|) f(K e^{-(c/a) z}) + r with f one of
    arccosh (c/b > 0, w >= 1), arcsinh (c/b > 0, all z) and
    arcsin (c/b < 0, w <= 1).
``vdp_implicit``
    Van der Pol solution through the first integral
    phi^3/3 = (a/d) phi' + k1^3/3, valid when (a/d)' = c/d.  For k1 = 0
    this resolves to the closed form phi^{-2} = -(2/3)(int d/a + C); the
    sign-flipped relation phi^2 = -(2/3)(int d/a + C) is also constructible
    (square_relation="direct") but does not satisfy the ODE and exists so
    tests can demonstrate that failure.  For k1 != 0 the profile is defined
    implicitly and recovered per z by bracketed root finding on the
    monotone branch selected by phi(z0).
``vdp_explicit``
    constant-coefficient Van der Pol profile
    phi(z) = 1 / sqrt(K e^{(2c/a) z} + d/(3c)).
``series``
    truncated power series (constructed by the series module).

Profiles carry phi, phi' and an analytic phi''; lifting to a multitime
field via ``as_multitime`` uses the chain rule du/dt^a = -lambda_a phi'.
Evaluation outside the domain raises DomainExceeded; at finite endpoints
phi itself stays finite for the arc-family profiles while phi' may be
unbounded there, which is why residual testing keeps a guard band.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from .coefficients import (
    CoeffKind,
    ReducedCoeffs,
    SpeedVector,
    Variant,
    coeffs_to_json_dict,
    constant_coeffs,
)
from .errors import (
    BadParameters,
    CompatibilityViolated,
    DomainExceeded,
    EmptyDomain,
    NoBracket,
    WrongVariant,
)
from .geometry import FieldFunction, _h2


class Family(str, enum.Enum):
    QUADRATURE = "quadrature"
    ARCCOSH = "arccosh"
    ARCSINH = "arcsinh"
    ARCSIN = "arcsin"
    VDP_IMPLICIT = "vdp_implicit"
    VDP_EXPLICIT = "vdp_explicit"
    SERIES = "series"


@dataclass(frozen=True)
class Interval:
    """Closed interval, possibly half-infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise BadParameters(f"bad interval [{self.lo}, {self.hi}]")

    def contains(self, z: float) -> bool:
        slack_lo = 0.0 if math.isinf(self.lo) else 1e-12 * max(1.0, abs(self.lo))
        slack_hi = 0.0 if math.isinf(self.hi) else 1e-12 * max(1.0, abs(self.hi))
        return self.lo - slack_lo <= z <= self.hi + slack_hi

    def to_json(self):
        return [None if math.isinf(self.lo) else float(self.lo),
                None if math.isinf(self.hi) else float(self.hi)]


def _check_domain(dom: Interval, z: float):
    if not dom.contains(z):
        raise DomainExceeded(f"z = {z} outside validity interval [{dom.lo}, {dom.hi}]")


@dataclass(frozen=True)
class SolitonProfile:
    """A traveling-wave profile phi with its speeds and validity interval."""

    family: Family
    params: dict
    lam: SpeedVector
    domain: Interval
    phi: Callable[[float], float]
    phi_prime: Callable[[float], float]
    phi_second: Callable[[float], float] | None = None
    coeffs: ReducedCoeffs | None = None

    def sample(self, zs, skip_out_of_domain: bool = True):
        """Evaluate (z, phi, phi') over a grid, dropping out-of-domain z."""
        kept, vals, ders = [], [], []
        for z in np.asarray(zs, dtype=float):
            z = float(z)
            if skip_out_of_domain and not self.domain.contains(z):
                continue
            kept.append(z)
            vals.append(self.phi(z))
            ders.append(self.phi_prime(z))
        return np.array(kept), np.array(vals), np.array(ders)

    def to_json_dict(self) -> dict:
        return {
            "family": self.family.value,
            "params": self.params,
            "lambda": self.lam.to_json(),
            "domain": self.domain.to_json(),
        }


def _default_lam(lam) -> SpeedVector:
    if lam is None:
        return SpeedVector(np.array([1.0]))
    return lam if isinstance(lam, SpeedVector) else SpeedVector(np.asarray(lam, float))


def _coeffs_payload(rc: ReducedCoeffs):
    try:
        return coeffs_to_json_dict(rc)
    except ValueError:
        return {"kind": CoeffKind.GENERAL.value, "variant": rc.variant.value}


def _cheb_antiderivative(fn, lo: float, hi: float, anchor: float,
                         max_degree: int = 1024):
    """Antiderivative F(z) = int_anchor^z fn, cached as a Chebyshev series.

    ``fn`` is sampled at Chebyshev points of [lo, hi]; the interpolant is
    integrated term by term, and the degree doubles until the coefficient
    tail is negligible.  Smooth integrands resolve to near machine
    precision; non-smooth ones get the highest degree and whatever accuracy
    that buys, which the downstream residual checks will expose.
    """
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)

    def mapped(us):
        return np.array([float(fn(mid + half * float(u))) for u in np.atleast_1d(us)])

    deg = 64
    while True:
        coef = _cheb.chebinterpolate(mapped, deg)
        scale = float(np.max(np.abs(coef)))
        if float(np.max(np.abs(coef[-6:]))) <= 1e-13 * max(1.0, scale):
            break
        if deg >= max_degree:
            break
        deg *= 2
    poly = _cheb.Chebyshev(coef, domain=[lo, hi])
    return poly.integ(1, lbnd=anchor), poly


def _positive_run(zs: np.ndarray, vals: np.ndarray, z0: float):
    """Maximal contiguous subinterval of zs with vals > 0 containing z0.

    Returns (lo, hi, shrunk_lo, shrunk_hi) or None when the anchor sample
    is not positive.  Shrunk edges are pulled one scan step inward so that
    evaluation at the reported endpoint stays finite.
    """
    i0 = int(np.argmin(np.abs(zs - z0)))
    if vals[i0] <= 0.0:
        return None
    lo_i = i0
    while lo_i > 0 and vals[lo_i - 1] > 0.0:
        lo_i -= 1
    hi_i = i0
    while hi_i < len(zs) - 1 and vals[hi_i + 1] > 0.0:
        hi_i += 1
    shrunk_lo = lo_i > 0
    shrunk_hi = hi_i < len(zs) - 1
    if shrunk_lo and lo_i + 1 < hi_i:
        lo_i += 1
    if shrunk_hi and hi_i - 1 > lo_i:
        hi_i -= 1
    return float(zs[lo_i]), float(zs[hi_i]), shrunk_lo, shrunk_hi


def soliton_quadrature(coeffs: ReducedCoeffs, K: float, z0: float = 0.0,
                       domain=(-10.0, 10.0), lam=None,
                       n_scan: int = 4001) -> SolitonProfile:
    """Rayleigh profile by nested quadrature, anchored with phi(z0) = 0.

    phi'(z) = exp(-F(z)) / sqrt(K - 2 G(z)), F = int_{z0}^{z} c/a,
    G = int_{z0}^{z} (b/a) exp(-2 F).  The radicand is scanned over the
    requested interval and the domain shrinks to the maximal positive
    subinterval containing z0 (EmptyDomain if the anchor itself fails).
    Antiderivatives are cached on Chebyshev grids, so evaluation is cheap
    and deterministic.
    """
    if coeffs.variant is not Variant.RAYLEIGH:
        raise WrongVariant("quadrature family solves the Rayleigh reduction")
    lam = _default_lam(lam)
    lo, hi = float(domain[0]), float(domain[1])
    if not lo < hi:
        raise BadParameters("domain must satisfy lo < hi")
    if not lo <= z0 <= hi:
        raise BadParameters("anchor z0 must lie inside the requested domain")
    K = float(K)
    if K <= 0.0:
        raise EmptyDomain("the radicand K - 2G is nonpositive at the anchor")

    def build(a_lo, a_hi):
        F, _ = _cheb_antiderivative(lambda s: coeffs.c(s) / coeffs.a(s), a_lo, a_hi, z0)
        G, _ = _cheb_antiderivative(
            lambda s: coeffs.b(s) / coeffs.a(s) * math.exp(-2.0 * float(F(s))),
            a_lo, a_hi, z0)
        return F, G

    F, G = build(lo, hi)
    zs = np.linspace(lo, hi, n_scan)
    radicand = K - 2.0 * G(zs)
    run = _positive_run(zs, radicand, z0)
    if run is None:
        raise EmptyDomain("the radicand K - 2G is nonpositive at the anchor")
    d_lo, d_hi, shrunk_lo, shrunk_hi = run
    if shrunk_lo or shrunk_hi:
        F, G = build(d_lo, d_hi)
    dom = Interval(d_lo, d_hi)

    def phi_prime(z: float) -> float:
        _check_domain(dom, z)
        rad = K - 2.0 * float(G(z))
        if rad <= 0.0:
            raise DomainExceeded(f"radicand nonpositive at z = {z}")
        return math.exp(-float(F(z))) / math.sqrt(rad)

    PHI, _ = _cheb_antiderivative(phi_prime, d_lo, d_hi, z0)

    def phi(z: float) -> float:
        _check_domain(dom, z)
        return float(PHI(z))

    def phi_second(z: float) -> float:
        # differentiate the closed form: phi'' = (-c/a) phi' + (b/a) phi'^3
        p = phi_prime(z)
        return (-coeffs.c(z) * p + coeffs.b(z) * p ** 3) / coeffs.a(z)

    params = {"K": K, "z0": float(z0), "coeffs": _coeffs_payload(coeffs)}
    return SolitonProfile(Family.QUADRATURE, params, lam, dom,
                          phi, phi_prime, phi_second, coeffs=coeffs)


def _arc_common(a, b, c, K, sigma):
    a, b, c, K = float(a), float(b), float(c), float(K)
    if a == 0.0 or c == 0.0 or b == 0.0:
        raise BadParameters("arc families need a, b, c all nonzero")
    if K <= 0.0:
        raise BadParameters("K must be positive")
    if sigma not in (1.0, -1.0, 1, -1):
        raise BadParameters("sigma must be +1 or -1")
    return a, b, c, K, float(sigma)


def soliton_arccosh(a, b, c, K, r=0.0, sigma=1.0, lam=None) -> SolitonProfile:
    """phi = sigma (a/c) sqrt(c/b) arccosh(K e^{-(c/a) z}) + r, for c/b > 0.

    Valid where w = K e^{-(c/a) z} >= 1, a half-line ending (or starting)
    at (a/c) ln K.  phi is finite at that endpoint while phi' diverges.
    """
    a, b, c, K, sigma = _arc_common(a, b, c, K, sigma)
    Q = c / b
    if Q <= 0.0:
        raise BadParameters("arccosh family needs c/b > 0")
    rate = c / a
    amp = sigma * (a / c) * math.sqrt(Q)
    edge = (a / c) * math.log(K)
    dom = Interval(-math.inf, edge) if rate > 0 else Interval(edge, math.inf)
    r = float(r)

    def w(z):
        return K * math.exp(-rate * z)

    def phi(z: float) -> float:
        _check_domain(dom, z)
        return amp * math.acosh(max(w(z), 1.0)) + r

    def phi_prime(z: float) -> float:
        _check_domain(dom, z)
        ww = w(z)
        rad = ww * ww - 1.0
        if rad <= 0.0:
            return -sigma * math.inf
        return -sigma * math.sqrt(Q) * ww / math.sqrt(rad)

    def phi_second(z: float) -> float:
        _check_domain(dom, z)
        ww = w(z)
        rad = ww * ww - 1.0
        if rad <= 0.0:
            return sigma * rate * math.inf
        return -sigma * math.sqrt(Q) * rate * ww * rad ** -1.5

    params = {"a": a, "b": b, "c": c, "K": K, "r": r, "sigma": sigma}
    return SolitonProfile(Family.ARCCOSH, params, _default_lam(lam), dom,
                          phi, phi_prime, phi_second,
                          coeffs=_arc_coeffs(a, b, c))


def soliton_arcsinh(a, b, c, K, r=0.0, sigma=1.0, lam=None) -> SolitonProfile:
    """phi = sigma (a/c) sqrt(c/b) arcsinh(K e^{-(c/a) z}) + r, on all of R."""
    a, b, c, K, sigma = _arc_common(a, b, c, K, sigma)
    Q = c / b
    if Q <= 0.0:
        raise BadParameters("arcsinh family needs c/b > 0")
    rate = c / a
    amp = sigma * (a / c) * math.sqrt(Q)
    dom = Interval(-math.inf, math.inf)
    r = float(r)

    def phi(z: float) -> float:
        return amp * math.asinh(K * math.exp(-rate * z)) + r

    def phi_prime(z: float) -> float:
        ww = K * math.exp(-rate * z)
        return -sigma * math.sqrt(Q) * ww / math.sqrt(ww * ww + 1.0)

    def phi_second(z: float) -> float:
        ww = K * math.exp(-rate * z)
        return sigma * math.sqrt(Q) * rate * ww * (ww * ww + 1.0) ** -1.5

    params = {"a": a, "b": b, "c": c, "K": K, "r": r, "sigma": sigma}
    return SolitonProfile(Family.ARCSINH, params, _default_lam(lam), dom,
                          phi, phi_prime, phi_second,
                          coeffs=_arc_coeffs(a, b, c))


def soliton_arcsin(a, b, c, K, r=0.0, sigma=1.0, lam=None) -> SolitonProfile:
    """phi = sigma (a/c) sqrt(-c/b) arcsin(K e^{-(c/a) z}) + r, for c/b < 0.

    Valid where w = K e^{-(c/a) z} <= 1, the half-line complementary to the
    arccosh family's.  phi is finite at the endpoint, phi' diverges there.
    """
    a, b, c, K, sigma = _arc_common(a, b, c, K, sigma)
    Q = c / b
    if Q >= 0.0:
        raise BadParameters("arcsin family needs c/b < 0")
    rate = c / a
    amp = sigma * (a / c) * math.sqrt(-Q)
    edge = (a / c) * math.log(K)
    dom = Interval(edge, math.inf) if rate > 0 else Interval(-math.inf, edge)
    r = float(r)

    def phi(z: float) -> float:
        _check_domain(dom, z)
        return amp * math.asin(min(K * math.exp(-rate * z), 1.0)) + r

    def phi_prime(z: float) -> float:
        _check_domain(dom, z)
        ww = K * math.exp(-rate * z)
        rad = 1.0 - ww * ww
        if rad <= 0.0:
            return -sigma * math.inf
        return -sigma * math.sqrt(-Q) * ww / math.sqrt(rad)

    def phi_second(z: float) -> float:
        _check_domain(dom, z)
        ww = K * math.exp(-rate * z)
        rad = 1.0 - ww * ww
        if rad <= 0.0:
            return sigma * rate * math.inf
        return sigma * math.sqrt(-Q) * rate * ww * rad ** -1.5

    params = {"a": a, "b": b, "c": c, "K": K, "r": r, "sigma": sigma}
    return SolitonProfile(Family.ARCSIN, params, _default_lam(lam), dom,
                          phi, phi_prime, phi_second,
                          coeffs=_arc_coeffs(a, b, c))


def _arc_coeffs(a, b, c) -> ReducedCoeffs:
    return constant_coeffs(a, c, b=b)


def _fd_ratio_derivative(coeffs: ReducedCoeffs, z: float) -> float:
    """(d/a)'(z) by a central difference on the coefficient callables."""
    h = 1e-6 * max(1.0, abs(z))
    rp = coeffs.d(z + h) / coeffs.a(z + h)
    rm = coeffs.d(z - h) / coeffs.a(z - h)
    return (rp - rm) / (2.0 * h)


def _check_compatibility(coeffs: ReducedCoeffs, lo: float, hi: float,
                         tol: float) -> None:
    """Sample a' d - a d' - d c = 0, the condition (a/d)' = c/d."""
    for z in np.linspace(lo, hi, 21):
        h = 1e-6 * max(1.0, abs(z))
        ap = (coeffs.a(z + h) - coeffs.a(z - h)) / (2.0 * h)
        dp = (coeffs.d(z + h) - coeffs.d(z - h)) / (2.0 * h)
        a, d, c = coeffs.a(z), coeffs.d(z), coeffs.c(z)
        resid = ap * d - a * dp - d * c
        scale = max(1.0, abs(ap * d), abs(a * dp), abs(d * c))
        if abs(resid) > tol * scale:
            raise CompatibilityViolated(
                f"(a/d)' = c/d fails at z = {z}: residual {resid:.3e}")


def _first_integral_antiderivative(k1: float):
    """L with L'(phi) = 3 / (phi^3 - k1^3), the separated Van der Pol side."""
    s3 = math.sqrt(3.0)

    def L(phi: float) -> float:
        num = abs(phi - k1)
        den = math.sqrt(phi * phi + phi * k1 + k1 * k1)
        return (math.log(num / den) - s3 * math.atan((2.0 * phi + k1) / (k1 * s3))) / (k1 * k1)

    return L


def vdp_implicit(coeffs: ReducedCoeffs, k1: float, z0: float = 0.0,
                 phi0: float | None = None, domain=(-5.0, 5.0),
                 square_relation: str = "reciprocal", lam=None,
                 compat_tol: float = 1e-6, n_scan: int = 2001) -> SolitonProfile:
    """Van der Pol profile through the first integral phi^3/3 = (a/d) phi' + k.

    Requires the compatibility relation (a/d)' = c/d (checked by sampling,
    CompatibilityViolated otherwise); k = k1^3 / 3.  ``phi0`` anchors the
    profile, phi(z0) = phi0, and for k1 != 0 also selects the monotone
    branch (phi0 above or below k1).

    k1 = 0 resolves in closed form.  With H(z) = int_{z0}^{z} d/a:

        reciprocal: phi^{-2} = -(2/3) (H(z) + C),  C = -(3/2) / phi0^2
        direct:     phi^2    = -(2/3) (H(z) + C),  C = -(3/2) phi0^2

    Only the reciprocal relation satisfies the ODE; the direct one is kept
    strictly as a negative control for the residual tests.  The domain
    shrinks to the maximal subinterval around z0 on which the squared
    quantity stays positive (k1 = 0) or on which the requested branch still
    has a root (k1 != 0).
    """
    if coeffs.variant is not Variant.VAN_DER_POL:
        raise WrongVariant("vdp_implicit needs Van der Pol coefficients")
    if phi0 is None:
        raise BadParameters("phi0 (the anchor value at z0) is required")
    lam = _default_lam(lam)
    lo, hi = float(domain[0]), float(domain[1])
    if not lo < hi or not lo <= z0 <= hi:
        raise BadParameters("need lo < hi with z0 inside the domain")
    k1 = float(k1)
    phi0 = float(phi0)
    if square_relation not in ("reciprocal", "direct"):
        raise BadParameters("square_relation must be 'reciprocal' or 'direct'")

    _check_compatibility(coeffs, lo, hi, compat_tol)
    H, _ = _cheb_antiderivative(lambda s: coeffs.d(s) / coeffs.a(s), lo, hi, z0)

    def ratio(z):
        return coeffs.d(z) / coeffs.a(z)

    if k1 == 0.0:
        if phi0 == 0.0:
            raise BadParameters("phi0 must be nonzero for the k1 = 0 branch")
        sgn = math.copysign(1.0, phi0)
        if square_relation == "reciprocal":
            C = -1.5 / (phi0 * phi0)
        else:
            C = -1.5 * (phi0 * phi0)

        def squared(z):
            return -(2.0 / 3.0) * (float(H(z)) + C)

        zs = np.linspace(lo, hi, n_scan)
        vals = np.array([squared(z) for z in zs])
        run = _positive_run(zs, vals, z0)
        if run is None:
            raise EmptyDomain("the squared relation is nonpositive at the anchor")
        d_lo, d_hi, _, _ = run
        dom = Interval(d_lo, d_hi)

        if square_relation == "reciprocal":
            def phi(z: float) -> float:
                _check_domain(dom, z)
                P = squared(z)
                if P <= 0.0:
                    raise DomainExceeded(f"phi^-2 nonpositive at z = {z}")
                return sgn / math.sqrt(P)

            def phi_prime(z: float) -> float:
                p = phi(z)
                return ratio(z) * p ** 3 / 3.0

            def phi_second(z: float) -> float:
                p = phi(z)
                return (_fd_ratio_derivative(coeffs, z) * p ** 3 / 3.0
                        + ratio(z) * p * p * phi_prime(z))
        else:
            def phi(z: float) -> float:
                _check_domain(dom, z)
                P = squared(z)
                if P <= 0.0:
                    raise DomainExceeded(f"phi^2 nonpositive at z = {z}")
                return sgn * math.sqrt(P)

            def phi_prime(z: float) -> float:
                return -ratio(z) / (3.0 * phi(z))

            def phi_second(z: float) -> float:
                p = phi(z)
                return (-_fd_ratio_derivative(coeffs, z) / (3.0 * p)
                        + ratio(z) * phi_prime(z) / (3.0 * p * p))

        params = {"k1": 0.0, "z0": float(z0), "phi0": phi0,
                  "square_relation": square_relation,
                  "coeffs": _coeffs_payload(coeffs)}
        return SolitonProfile(Family.VDP_IMPLICIT, params, lam, dom,
                              phi, phi_prime, phi_second, coeffs=coeffs)

    # k1 != 0: implicit relation L(phi) = H(z) + C on a monotone branch
    if phi0 == k1:
        raise BadParameters("phi0 = k1 is the constant solution; "
                            "the implicit branches exclude it")
    L = _first_integral_antiderivative(k1)
    side = 1.0 if phi0 > k1 else -1.0
    C = L(phi0)
    far_scale = max(1.0, abs(k1), 4.0 * abs(phi0 - k1))
    L_far = L(k1 + side * 1e12 * far_scale)

    def solvable(target: float) -> bool:
        return target < L_far - 1e-12 * max(1.0, abs(L_far))

    zs = np.linspace(lo, hi, n_scan)
    ok = np.array([1.0 if solvable(float(H(z)) + C) else -1.0 for z in zs])
    run = _positive_run(zs, ok, z0)
    if run is None:
        raise NoBracket("the requested branch has no root at the anchor")
    d_lo, d_hi, _, _ = run
    dom = Interval(d_lo, d_hi)

    from scipy.optimize import brentq

    def solve_branch(target: float) -> float:
        delta = 1e-3 * max(1.0, abs(k1))
        while L(k1 + side * delta) > target:
            delta /= 8.0
            if delta < 4e-16 * max(1.0, abs(k1)):
                # below float resolution the root is indistinguishable from k1
                raise NoBracket("root collapses onto the constant solution")
        far = far_scale
        while L(k1 + side * far) < target:
            far *= 4.0
            if far > 1e13 * far_scale:
                raise NoBracket("no far bracket endpoint on this branch")
        p_lo, p_hi = sorted((k1 + side * delta, k1 + side * far))
        root = brentq(lambda p: L(p) - target, p_lo, p_hi,
                      xtol=1e-14, rtol=8.9e-16, maxiter=200)
        # one Newton polish using L'(phi) = 3 / (phi^3 - k1^3)
        denom = root ** 3 - k1 ** 3
        if denom != 0.0:
            root -= (L(root) - target) * denom / 3.0
        return root

    def phi(z: float) -> float:
        _check_domain(dom, z)
        target = float(H(z)) + C
        if not solvable(target):
            raise DomainExceeded(f"branch escapes to infinity before z = {z}")
        return solve_branch(target)

    def phi_prime(z: float) -> float:
        p = phi(z)
        return ratio(z) * (p ** 3 - k1 ** 3) / 3.0

    def phi_second(z: float) -> float:
        p = phi(z)
        return (_fd_ratio_derivative(coeffs, z) * (p ** 3 - k1 ** 3) / 3.0
                + ratio(z) * p * p * phi_prime(z))

    params = {"k1": k1, "z0": float(z0), "phi0": phi0,
              "branch": "above" if side > 0 else "below",
              "coeffs": _coeffs_payload(coeffs)}
    return SolitonProfile(Family.VDP_IMPLICIT, params, lam, dom,
                          phi, phi_prime, phi_second, coeffs=coeffs)


def vdp_explicit(a, c, d, K, lam=None) -> SolitonProfile:
    """phi(z) = 1 / sqrt(K e^{(2c/a) z} + d/(3c)), constant coefficients.

    Satisfies the first integral a phi' - (d/3) phi^3 + c phi = 0 and hence
    the Van der Pol reduction.  The domain is where the radicand stays
    positive; when it is unbounded the approached limits (0 on the decaying
    side, sqrt(3c/d) on the saturating side) are attached as metadata
    ``limit_neg_inf`` / ``limit_pos_inf``.
    """
    a, c, d, K = float(a), float(c), float(d), float(K)
    if a == 0.0 or c == 0.0:
        raise BadParameters("need a != 0 and c != 0")
    lam = _default_lam(lam)
    rate = 2.0 * c / a
    off = d / (3.0 * c)
    log_abs_k = math.log(abs(K)) if K != 0.0 else None
    # past this exponent K e^{rate z} dwarfs off and a direct exp overflows
    tail_floor = max(690.0, math.log(max(abs(off), 1.0)) + 40.0)

    def _tail_exponent(z: float):
        # exponent of K e^{rate z} once that term alone decides the value;
        # only the K > 0 side matters, for K < 0 the region is out of domain
        if K <= 0.0:
            return None
        t = log_abs_k + rate * z
        return t if t > tail_floor else None

    def E(z: float) -> float:
        if log_abs_k is None:
            return off
        t = log_abs_k + rate * z
        term = (math.copysign(math.inf, K) if t > 709.0
                else math.copysign(math.exp(t), K))
        return term + off

    # domain analysis: where K e^{rate z} + off > 0
    pad = 1e-9
    if K == 0.0:
        if off <= 0.0:
            raise EmptyDomain("constant radicand is nonpositive")
        dom = Interval(-math.inf, math.inf)
    elif K > 0.0:
        if off >= 0.0:
            dom = Interval(-math.inf, math.inf)
        else:
            zb = math.log(-off / K) / rate
            edge = zb + math.copysign(pad * max(1.0, abs(zb)), rate)
            dom = Interval(edge, math.inf) if rate > 0 else Interval(-math.inf, edge)
    else:
        if off <= 0.0:
            raise EmptyDomain("radicand is negative everywhere")
        zb = math.log(off / (-K)) / rate
        edge = zb - math.copysign(pad * max(1.0, abs(zb)), rate)
        dom = Interval(-math.inf, edge) if rate > 0 else Interval(edge, math.inf)

    def _radicand(z: float) -> float:
        e = E(z)
        if e <= 0.0:
            raise DomainExceeded(f"radicand nonpositive at z = {z}")
        return e

    # derivatives are written through s = (e - off)/e = 1 - off/e, which stays
    # bounded where e is large; (e - off)^2 would overflow long before then
    def phi(z: float) -> float:
        _check_domain(dom, z)
        t = _tail_exponent(z)
        if t is not None:
            return math.exp(-0.5 * t)
        return 1.0 / math.sqrt(_radicand(z))

    def phi_prime(z: float) -> float:
        _check_domain(dom, z)
        t = _tail_exponent(z)
        if t is not None:
            return -0.5 * rate * math.exp(-0.5 * t)
        e = _radicand(z)
        return -0.5 * rate * (1.0 - off / e) / math.sqrt(e)

    def phi_second(z: float) -> float:
        _check_domain(dom, z)
        t = _tail_exponent(z)
        if t is not None:
            return 0.25 * rate * rate * math.exp(-0.5 * t)
        e = _radicand(z)
        s = 1.0 - off / e
        return rate * rate * (0.75 * s - 0.5) * s / math.sqrt(e)

    def tail_limit(e_tail):
        if e_tail is None or e_tail <= 0.0:
            return None
        return 0.0 if math.isinf(e_tail) else 1.0 / math.sqrt(e_tail)

    if K == 0.0:
        e_plus = e_minus = off
    elif rate > 0.0:
        e_plus, e_minus = math.copysign(math.inf, K), off
    else:
        e_plus, e_minus = off, math.copysign(math.inf, K)

    params = {
        "a": a, "c": c, "d": d, "K": K,
        "limit_pos_inf": tail_limit(e_plus) if math.isinf(dom.hi) else None,
        "limit_neg_inf": tail_limit(e_minus) if math.isinf(dom.lo) else None,
    }
    return SolitonProfile(Family.VDP_EXPLICIT, params, lam, dom,
                          phi, phi_prime, phi_second,
                          coeffs=constant_coeffs(a, c, d=d))


def as_multitime(profile: SolitonProfile, lam: SpeedVector | None = None) -> FieldFunction:
    """Lift a profile to the field u(x, t) = phi(x - lambda_alpha t^alpha).

    Chain-rule partials are attached analytically: du/dt^a = -lambda_a phi',
    d2u/dt^a dt^b = lambda_a lambda_b phi'', d2u/dx2 = phi''.  Points whose
    phase leaves the profile domain raise DomainExceeded.
    """
    lam = profile.lam if lam is None else lam
    lv = lam.values
    second = profile.phi_second
    if second is None:
        def second(z, _p=profile.phi_prime):
            h = _h2(z)
            return (_p(z + h) - _p(z - h)) / (2.0 * h)

    def value(x, t):
        return profile.phi(float(x) - float(np.dot(lv, t)))

    def grad(x, t):
        return -lv * profile.phi_prime(float(x) - float(np.dot(lv, t)))

    def hess(x, t):
        return np.outer(lv, lv) * second(float(x) - float(np.dot(lv, t)))

    def d2x(x, t):
        return second(float(x) - float(np.dot(lv, t)))

    return FieldFunction(u=value, grad_t=grad, hess_t=hess, d2x=d2x, m=lam.m)


def with_speed(profile: SolitonProfile, lam: SpeedVector) -> SolitonProfile:
    """The same profile attached to a different speed covector."""
    return replace(profile, lam=lam)
