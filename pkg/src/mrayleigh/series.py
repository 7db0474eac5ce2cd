"""Power-series solutions of the Rayleigh reduction with affine coefficients.

For a(z) = a1 z + a0, b(z) = b1 z + b0, c(z) = c1 z + c0 the ansatz
phi = sum_n alpha_n z^n turns a phi'' - b (phi')^3 + c phi' = 0 into

    a1 n(n+1) alpha_{n+1} + a0 (n+1)(n+2) alpha_{n+2}
        - b1 T(n-1) - b0 T(n) + c1 n alpha_n + c0 (n+1) alpha_{n+1} = 0

for n >= 0 (with T(-1) = 0; the n = 0 instance is the seed relation
2 a0 alpha_2 + c0 alpha_1 - b0 alpha_1^3 = 0).  Here T(n) is the z^n
coefficient of (phi')^3, accumulated from the derivative coefficients
beta_k = (k+1) alpha_{k+1} by two convolution stages,

    gamma_n = sum_k beta_k beta_{n-k},     T(n) = sum_i gamma_i beta_{n-i},

which keeps the whole recurrence O(N^2).  A literal triple-sum evaluator
of T is kept as a cross-check path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .closed_form import Family, Interval, SolitonProfile, _check_domain
from .coefficients import (
    DEGENERACY_TOL,
    ReducedCoeffs,
    SpeedVector,
    affine_coeffs,
)
from .errors import DegenerateA

# returned when the tail gives no growth to measure (constant or polynomial
# truncations are entire); finite so that reports stay strict JSON
LARGE_RADIUS = 1e300

# profiles built from a truncated series are restricted to this fraction of
# the estimated convergence radius
SAFETY_FRACTION = 0.5


@dataclass(frozen=True)
class AffineCoeffs:
    """Affine coefficient data; sextuple order is (slopes, then constants).

    a(z) = a_slope z + a_const, b(z) = b_slope z + b_const,
    c(z) = c_slope z + c_const.
    """

    a_slope: float
    b_slope: float
    c_slope: float
    a_const: float
    b_const: float
    c_const: float

    @classmethod
    def from_sextuple(cls, seq) -> "AffineCoeffs":
        vals = [float(v) for v in seq]
        if len(vals) != 6:
            raise ValueError("need exactly six values (three slopes, three constants)")
        return cls(*vals)

    def sextuple(self) -> tuple[float, ...]:
        return (self.a_slope, self.b_slope, self.c_slope,
                self.a_const, self.b_const, self.c_const)

    def to_reduced(self) -> ReducedCoeffs:
        return affine_coeffs(*self.sextuple())

    def a(self, z: float) -> float:
        return self.a_slope * z + self.a_const

    def b(self, z: float) -> float:
        return self.b_slope * z + self.b_const

    def c(self, z: float) -> float:
        return self.c_slope * z + self.c_const


@dataclass(frozen=True)
class SeriesSolution:
    """Truncated series phi = sum alpha_n z^n with its radius estimate."""

    coeffs: AffineCoeffs
    alpha: np.ndarray
    radius_estimate: float

    def __post_init__(self):
        arr = np.asarray(self.alpha, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "alpha", arr)

    @property
    def n_terms(self) -> int:
        return self.alpha.size - 1

    # truncation order under its conventional name
    N = n_terms

    def to_json_dict(self) -> dict:
        return {
            "params": list(self.coeffs.sextuple()),
            "alpha0": float(self.alpha[0]),
            "alpha1": float(self.alpha[1]),
            "N": int(self.n_terms),
            "alpha": [float(v) for v in self.alpha],
            "radius_estimate": float(self.radius_estimate),
        }


def _cubed_derivative_coefficient(beta: np.ndarray, n: int) -> float:
    """T(n) = [z^n] (phi')^3 via the literal triple sum; cross-check path."""
    total = 0.0
    for i in range(n + 1):
        for j in range(n + 1 - i):
            total += beta[i] * beta[j] * beta[n - i - j]
    return total


def series_coefficients(coeffs: AffineCoeffs, alpha0: float, alpha1: float,
                        n_terms: int) -> SeriesSolution:
    """Solve the coefficient recurrence up to alpha_{n_terms}.

    O(N^2) overall: the convolutions gamma = beta*beta and T = gamma*beta
    are extended incrementally as new beta values appear.  Raises
    DegenerateA when the constant part of a vanishes.
    """
    if n_terms < 1:
        raise ValueError("need n_terms >= 1")
    beta: list[float] = []
    gamma: list[float] = []
    t_cache: list[float] = []
    alpha_ref: list[np.ndarray] = []

    def t_of(n: int) -> float:
        if n < 0:
            return 0.0
        alpha = alpha_ref[0]
        while len(beta) <= n:
            k = len(beta)
            beta.append((k + 1) * alpha[k + 1])
        while len(gamma) <= n:
            k = len(gamma)
            gamma.append(sum(beta[j] * beta[k - j] for j in range(k + 1)))
        while len(t_cache) <= n:
            k = len(t_cache)
            t_cache.append(sum(gamma[i] * beta[k - i] for i in range(k + 1)))
        return t_cache[n]

    # _recurrence fills alpha incrementally; t_of(n) only needs alpha up to
    # index n+1, which is already known when step n runs
    a1, b1, c1 = coeffs.a_slope, coeffs.b_slope, coeffs.c_slope
    a0, b0, c0 = coeffs.a_const, coeffs.b_const, coeffs.c_const
    if abs(a0) <= DEGENERACY_TOL:
        raise DegenerateA("the recurrence divides by the constant part of a")
    alpha = np.zeros(n_terms + 1)
    alpha[0], alpha[1] = float(alpha0), float(alpha1)
    alpha_ref.append(alpha)
    for n in range(0, n_terms - 1):
        t_n = t_of(n)
        t_nm1 = t_cache[n - 1] if n >= 1 else 0.0
        num = (b1 * t_nm1 + b0 * t_n
               - a1 * n * (n + 1) * alpha[n + 1]
               - c1 * n * alpha[n]
               - c0 * (n + 1) * alpha[n + 1])
        alpha[n + 2] = num / (a0 * (n + 1) * (n + 2))
    sol = SeriesSolution(coeffs, alpha, 0.0)
    return SeriesSolution(coeffs, alpha, estimate_radius(sol))


def series_coefficients_triple_sum(coeffs: AffineCoeffs, alpha0: float,
                                   alpha1: float, n_terms: int) -> SeriesSolution:
    """Same recurrence with T(n) from the literal triple sum (O(N^3))."""
    if n_terms < 1:
        raise ValueError("need n_terms >= 1")
    alpha_box: list[np.ndarray] = []

    def t_of(n: int) -> float:
        if n < 0:
            return 0.0
        alpha = alpha_box[0]
        beta = np.array([(k + 1) * alpha[k + 1] for k in range(n + 1)])
        return _cubed_derivative_coefficient(beta, n)

    a1, b1, c1 = coeffs.a_slope, coeffs.b_slope, coeffs.c_slope
    a0, b0, c0 = coeffs.a_const, coeffs.b_const, coeffs.c_const
    if abs(a0) <= DEGENERACY_TOL:
        raise DegenerateA("the recurrence divides by the constant part of a")
    alpha = np.zeros(n_terms + 1)
    alpha[0], alpha[1] = float(alpha0), float(alpha1)
    alpha_box.append(alpha)
    for n in range(0, n_terms - 1):
        num = (b1 * t_of(n - 1) + b0 * t_of(n)
               - a1 * n * (n + 1) * alpha[n + 1]
               - c1 * n * alpha[n]
               - c0 * (n + 1) * alpha[n + 1])
        alpha[n + 2] = num / (a0 * (n + 1) * (n + 2))
    sol = SeriesSolution(coeffs, alpha, 0.0)
    return SeriesSolution(coeffs, alpha, estimate_radius(sol))


def _warn_outside(series: SeriesSolution, z: float):
    if abs(z) >= series.radius_estimate:
        warnings.warn(
            f"|z| = {abs(z)} is at or beyond the radius estimate "
            f"{series.radius_estimate}; the truncation error is uncontrolled",
            RuntimeWarning, stacklevel=3)


def evaluate(series: SeriesSolution, z: float) -> float:
    """Horner evaluation of phi at z (warns outside the radius estimate)."""
    _warn_outside(series, z)
    return float(np.polynomial.polynomial.polyval(z, series.alpha))


def evaluate_prime(series: SeriesSolution, z: float) -> float:
    _warn_outside(series, z)
    der = np.polynomial.polynomial.polyder(series.alpha)
    return float(np.polynomial.polynomial.polyval(z, der))


def evaluate_second(series: SeriesSolution, z: float) -> float:
    _warn_outside(series, z)
    der2 = np.polynomial.polynomial.polyder(series.alpha, 2)
    return float(np.polynomial.polynomial.polyval(z, der2))


def estimate_radius(series: SeriesSolution) -> float:
    """Convergence-radius estimate from the coefficient tail.

    Root test on the tail half of the coefficients: the median of
    |alpha_n|^{-1/n} over nonzero tail entries.  When the tail carries no
    information (constant or terminating series) the large sentinel
    LARGE_RADIUS is returned; when b(z) is identically zero the ODE is
    linear and the nearest zero of a(z) is used as an analytic fallback.
    A return of 0.0 means the estimate is inconclusive.
    """
    alpha = series.alpha
    n_top = alpha.size - 1
    start = max(4, n_top // 2)
    tail_idx = [n for n in range(start, n_top + 1) if alpha[n] != 0.0]
    if len(tail_idx) >= 3:
        rn = [abs(alpha[n]) ** (-1.0 / n) for n in tail_idx]
        return float(min(np.median(rn), LARGE_RADIUS))
    if not np.any(alpha[1:] != 0.0) or not np.any(alpha[start:] != 0.0):
        # constant or terminating polynomial: entire
        return LARGE_RADIUS
    if series.coeffs.b_slope == 0.0 and series.coeffs.b_const == 0.0:
        # linear ODE: singular only where a(z) = 0
        if series.coeffs.a_slope != 0.0:
            return abs(series.coeffs.a_const / series.coeffs.a_slope)
        return LARGE_RADIUS
    return 0.0


def series_soliton(series: SeriesSolution, lam: SpeedVector | None = None) -> SolitonProfile:
    """Wrap a truncated series as a profile on |z| < 0.5 * radius estimate."""
    if lam is None:
        lam = SpeedVector(np.array([1.0]))
    rho = SAFETY_FRACTION * series.radius_estimate
    if rho <= 0.0:
        raise DegenerateA(
            "radius estimate is inconclusive; cannot bound a validity interval")
    dom = Interval(-rho, rho)
    der1 = np.polynomial.polynomial.polyder(series.alpha)
    der2 = np.polynomial.polynomial.polyder(series.alpha, 2)

    def phi(z: float) -> float:
        _check_domain(dom, z)
        return float(np.polynomial.polynomial.polyval(z, series.alpha))

    def phi_prime(z: float) -> float:
        _check_domain(dom, z)
        return float(np.polynomial.polynomial.polyval(z, der1))

    def phi_second(z: float) -> float:
        _check_domain(dom, z)
        return float(np.polynomial.polynomial.polyval(z, der2))

    params = {
        "coeffs": list(series.coeffs.sextuple()),
        "alpha0": float(series.alpha[0]),
        "alpha1": float(series.alpha[1]),
        "n_terms": int(series.n_terms),
        "radius_estimate": float(series.radius_estimate),
    }
    return SolitonProfile(Family.SERIES, params, lam, dom,
                          phi, phi_prime, phi_second,
                          coeffs=series.coeffs.to_reduced())
