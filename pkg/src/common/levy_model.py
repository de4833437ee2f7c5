"""Levy triplets of spectrally negative processes and their integration primitives.

A measure is a finite set of atoms on (-inf, 0) plus disjoint density pieces.
Pieces with a closed-form antiderivative (power law, exponential, log-normal)
never go through quadrature for masses or truncated moments; everything else
uses QUADPACK through ``scipy.integrate.quad``.

Boundary conventions: intervals are left-closed/right-open ``[a, b)`` and tails
are open, ``tail_mass(t) = lambda((-inf, -t))``.
"""

import cmath
import logging
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from src.common.scalekit_exceptions import (
    ArgumentError,
    InfiniteMassError,
    InvalidTripletError,
    QuadratureError,
)

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-10
QUAD_EPSABS = 1e-13
PANEL_BUDGET = 10_000
SERIES_CUTOFF = 1e-3

# Dyadic deltas used when the caller does not supply any.
DEFAULT_DELTAS = tuple(2.0 ** -k for k in range(4, 13))


def _integrate(func: Callable[[float], float], a: float, b: float, **kwargs) -> float:
    """Integrate ``func`` over [a, b] with QUADPACK at the module tolerances.

    Raises:
        QuadratureError: If QUADPACK flags a failure and its error estimate is not small.
    """
    if not a < b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr, *rest = integrate.quad(
            func, a, b,
            epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=PANEL_BUDGET,
            full_output=1, **kwargs,
        )
    if len(rest) > 1:
        if not math.isfinite(value) or abserr > 1e-6 * max(1.0, abs(value)):
            raise QuadratureError(f"quadrature on [{a}, {b}] failed: {rest[1]}")
        logger.debug("quadrature on [%g, %g] flagged (%s), abserr=%.3g accepted", a, b, rest[1], abserr)
    return value


def _integrate_complex(func: Callable[[float], complex], a: float, b: float, beta: complex, **kwargs) -> complex:
    """Integrate a complex integrand as two real QUADPACK calls."""
    real = _integrate(lambda t: func(t).real, a, b, **kwargs)
    if beta.imag == 0.0:
        return complex(real, 0.0)
    imag = _integrate(lambda t: func(t).imag, a, b, **kwargs)
    return complex(real, imag)


def _exp_terms(z: complex, compensated: bool) -> complex:
    """e^z - 1, minus z when compensated; series near 0."""
    if abs(z) < SERIES_CUTOFF:
        tail = z * z / 2 + z ** 3 / 6 + z ** 4 / 24 + z ** 5 / 120
        return tail if compensated else z + tail
    value = cmath.exp(z) - 1
    return value - z if compensated else value


def _quadratic_remainder(beta: complex, t: float) -> complex:
    """(e^{-beta t} - 1 + beta t) / t^2, finite at t = 0."""
    bt = beta * t
    if abs(bt) < SERIES_CUTOFF:
        return beta * beta * (0.5 - bt / 6 + bt * bt / 24 - bt ** 3 / 120)
    return (cmath.exp(-bt) - 1 + bt) / (t * t)


def _linear_remainder(beta: complex, t: float) -> complex:
    """(e^{-beta t} - 1) / t, finite at t = 0."""
    bt = beta * t
    if abs(bt) < SERIES_CUTOFF:
        return beta * (-1 + bt / 2 - bt * bt / 6 + bt ** 3 / 24)
    return (cmath.exp(-bt) - 1) / t


def _power_integral(b: float, t1: float, t2: float) -> float:
    """Integral of t^(-1-b) over [t1, t2], 0 <= t1 <= t2 <= inf (may be inf)."""
    if not t1 < t2:
        return 0.0
    if b == 0.0:
        if t1 == 0.0 or math.isinf(t2):
            return math.inf
        return math.log1p((t2 - t1) / t1)
    if t1 == 0.0:
        return math.inf if b > 0 else t2 ** (-b) / (-b)
    if math.isinf(t2):
        return math.inf if b < 0 else t1 ** (-b) / b
    return -math.expm1(-b * math.log(t2 / t1)) * t1 ** (-b) / b


def _check_support(lower: float, upper: float) -> None:
    if math.isnan(lower) or math.isnan(upper) or not lower < upper:
        raise InvalidTripletError(f"density support [{lower}, {upper}) is empty or malformed")
    if upper > 0 or math.isinf(upper):
        raise InvalidTripletError(f"density support must lie in (-inf, 0], got upper={upper}")


def _check_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise InvalidTripletError(f"{name} must be finite and > 0, got {value}")


class PathClass(str, Enum):
    """Sample-path regime of the jump part."""
    BM_ONLY = "BM-only"
    FINITE_ACTIVITY = "finite-activity"
    INFINITE_ACTIVITY_FINITE_VARIATION = "infinite-activity-finite-variation"
    INFINITE_VARIATION = "infinite-variation"


@dataclass(frozen=True)
class Atom:
    """Point mass of the Levy measure."""
    location: float
    mass: float

    def __post_init__(self):
        if not (math.isfinite(self.location) and self.location < 0):
            raise InvalidTripletError(f"atom location must be finite and < 0, got {self.location}")
        _check_positive("atom mass", self.mass)


class DensityPiece(ABC):
    """Nonnegative density on a support [lower, upper) inside (-inf, 0].

    Subclasses override the closed forms they have; the defaults integrate
    ``density`` numerically.
    """

    lower: float
    upper: float

    @abstractmethod
    def density(self, y: float) -> float:
        """Pointwise density value at y."""

    @property
    def infinite_activity(self) -> bool:
        return False

    @property
    def infinite_variation(self) -> bool:
        return False

    def clip(self, a: float, b: float) -> Optional[tuple[float, float]]:
        lo, hi = max(a, self.lower), min(b, self.upper)
        return (lo, hi) if lo < hi else None

    def mass(self, a: float, b: float) -> float:
        span = self.clip(a, b)
        if span is None:
            return 0.0
        if span[1] == 0.0 and self.infinite_activity:
            raise InfiniteMassError(f"infinite mass on [{a}, {b})")
        return _integrate(self.density, *span)

    def abs_moment(self, a: float, b: float) -> float:
        """Integral of |y| over [a, b); inf for infinite variation near 0."""
        span = self.clip(a, b)
        if span is None:
            return 0.0
        if span[1] == 0.0 and self.infinite_variation:
            return math.inf
        return _integrate(lambda y: -y * self.density(y), *span)

    def second_moment(self, a: float, b: float) -> float:
        span = self.clip(a, b)
        if span is None:
            return 0.0
        return _integrate(lambda y: y * y * self.density(y), *span)

    def psi_integral(self, beta: complex, a: float, b: float, compensated: bool) -> complex:
        """Integral of (e^{beta y} - 1 - beta y [compensated]) over [a, b)."""
        span = self.clip(a, b)
        if span is None:
            return 0j
        return _integrate_complex(lambda y: _exp_terms(beta * y, compensated) * self.density(y), *span, beta)


@dataclass(frozen=True)
class PowerLawDensity(DensityPiece):
    """``coefficient * |y - anchor|^(-1-index)`` on [lower, upper).

    With ``anchor = 0`` and ``upper = 0`` this is the stable-like piece; an
    anchor at a negative upper endpoint (index < 0) gives integrable poles such
    as ``(-y-1)^(-1/2)`` on [-2, -1).
    """
    lower: float
    upper: float
    coefficient: float = 1.0
    index: float = 0.5
    anchor: float = 0.0

    def __post_init__(self):
        _check_support(self.lower, self.upper)
        _check_positive("power-law coefficient", self.coefficient)
        if not (math.isfinite(self.index) and self.index < 2):
            raise InvalidTripletError(f"power-law index must be < 2, got {self.index}")
        if not self.anchor >= self.upper:
            raise InvalidTripletError("power-law anchor must lie at or above the support")
        if self.anchor == self.upper and self.upper < 0 and self.index >= 0:
            raise InvalidTripletError(f"non-integrable pole at {self.anchor} away from the origin")
        if math.isinf(self.lower) and self.index <= 0:
            raise InvalidTripletError("power-law far tail is not integrable (index must be > 0)")

    @property
    def _touches_origin(self) -> bool:
        return self.upper == 0.0 and self.anchor == 0.0

    @property
    def infinite_activity(self) -> bool:
        return self._touches_origin and self.index >= 0

    @property
    def infinite_variation(self) -> bool:
        return self._touches_origin and self.index >= 1

    def density(self, y: float) -> float:
        return self.coefficient * (self.anchor - y) ** (-1 - self.index)

    def _t_range(self, a: float, b: float) -> Optional[tuple[float, float]]:
        span = self.clip(a, b)
        if span is None:
            return None
        return self.anchor - span[1], self.anchor - span[0]

    def mass(self, a: float, b: float) -> float:
        ts = self._t_range(a, b)
        if ts is None:
            return 0.0
        value = self.coefficient * _power_integral(self.index, *ts)
        if math.isinf(value):
            raise InfiniteMassError(f"infinite mass on [{a}, {b})")
        return value

    def abs_moment(self, a: float, b: float) -> float:
        # |y| = t - anchor
        ts = self._t_range(a, b)
        if ts is None:
            return 0.0
        value = _power_integral(self.index - 1, *ts)
        if self.anchor != 0.0:
            value += -self.anchor * _power_integral(self.index, *ts)
        return self.coefficient * value

    def second_moment(self, a: float, b: float) -> float:
        ts = self._t_range(a, b)
        if ts is None:
            return 0.0
        value = _power_integral(self.index - 2, *ts)
        if self.anchor != 0.0:
            value += (-2 * self.anchor * _power_integral(self.index - 1, *ts)
                      + self.anchor ** 2 * _power_integral(self.index, *ts))
        return self.coefficient * value

    def psi_integral(self, beta: complex, a: float, b: float, compensated: bool) -> complex:
        ts = self._t_range(a, b)
        if ts is None:
            return 0j
        t_lo, t_hi = ts
        if t_lo > 0:
            return super().psi_integral(beta, a, b, compensated)
        if math.isinf(t_hi):
            split = self.anchor - 1.0
            return (self.psi_integral(beta, split, b, compensated)
                    + self.psi_integral(beta, a, split, compensated))

        # Algebraic singularity at the anchor goes into the QAWS weight.
        c = self.coefficient
        if self.anchor == 0.0 and compensated:
            alpha = 1.0 - self.index
            func = lambda t: c * _quadratic_remainder(beta, t)
        elif self.anchor == 0.0:
            alpha = -self.index
            func = lambda t: c * _linear_remainder(beta, t)
        else:
            alpha = -1.0 - self.index
            anchor = self.anchor
            func = lambda t: c * _exp_terms(beta * (anchor - t), compensated)
        if alpha <= -1.0:
            raise QuadratureError(f"divergent Laplace-exponent integral on [{a}, {b})")
        return _integrate_complex(func, 0.0, t_hi, beta, weight="alg", wvar=(alpha, 0.0))


@dataclass(frozen=True)
class ExponentialDensity(DensityPiece):
    """``scale * rate * exp(rate * y)`` on [lower, upper)."""
    scale: float = 1.0
    rate: float = 1.0
    upper: float = 0.0
    lower: float = -math.inf

    def __post_init__(self):
        _check_support(self.lower, self.upper)
        _check_positive("exponential scale", self.scale)
        _check_positive("exponential rate", self.rate)

    def density(self, y: float) -> float:
        return self.scale * self.rate * math.exp(self.rate * y)

    def _primitive(self, y: float, poly: Callable[[float], float]) -> float:
        if math.isinf(y):
            return 0.0
        return self.scale * math.exp(self.rate * y) * poly(y)

    def mass(self, a: float, b: float) -> float:
        span = self.clip(a, b)
        if span is None:
            return 0.0
        lo, hi = span
        return self.scale * math.exp(self.rate * hi) * -math.expm1(self.rate * (lo - hi))

    def abs_moment(self, a: float, b: float) -> float:
        span = self.clip(a, b)
        if span is None:
            return 0.0
        poly = lambda y: 1 / self.rate - y
        return self._primitive(span[1], poly) - self._primitive(span[0], poly)

    def second_moment(self, a: float, b: float) -> float:
        span = self.clip(a, b)
        if span is None:
            return 0.0
        r = self.rate
        poly = lambda y: y * y - 2 * y / r + 2 / r ** 2
        return self._primitive(span[1], poly) - self._primitive(span[0], poly)

    def psi_integral(self, beta: complex, a: float, b: float, compensated: bool) -> complex:
        span = self.clip(a, b)
        if span is None:
            return 0j
        lo, hi = span
        shifted = beta + self.rate
        upper = cmath.exp(shifted * hi)
        lower = 0j if math.isinf(lo) else cmath.exp(shifted * lo)
        value = self.scale * self.rate * (upper - lower) / shifted - self.mass(lo, hi)
        if compensated:
            value += beta * self.abs_moment(lo, hi)
        return value


@dataclass(frozen=True)
class LogNormalDensity(DensityPiece):
    """Log-normal law of the jump size |y| on (-inf, 0), total mass ``scale``."""
    scale: float = 1.0
    log_mean: float = 0.0
    log_sd: float = 1.0

    def __post_init__(self):
        _check_positive("log-normal scale", self.scale)
        _check_positive("log-normal log_sd", self.log_sd)
        if not math.isfinite(self.log_mean):
            raise InvalidTripletError("log-normal log_mean must be finite")

    @property
    def lower(self) -> float:
        return -math.inf

    @property
    def upper(self) -> float:
        return 0.0

    def density(self, y: float) -> float:
        u = -y
        if u <= 0:
            return 0.0
        z = (math.log(u) - self.log_mean) / self.log_sd
        return self.scale * math.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * self.log_sd * u)

    def _partial_moment(self, k: int, a: float, b: float) -> float:
        """E[U^k; -b < U <= -a] times scale, U the jump size."""
        span = self.clip(a, b)
        if span is None:
            return 0.0
        nu, s = self.log_mean, self.log_sd

        def survival(u: float) -> float:
            if u <= 0:
                return 1.0
            if math.isinf(u):
                return 0.0
            return float(special.ndtr(-(math.log(u) - nu - k * s * s) / s))

        factor = math.exp(k * nu + 0.5 * (k * s) ** 2)
        return self.scale * factor * (survival(-span[1]) - survival(-span[0]))

    def mass(self, a: float, b: float) -> float:
        return self._partial_moment(0, a, b)

    def abs_moment(self, a: float, b: float) -> float:
        return self._partial_moment(1, a, b)

    def second_moment(self, a: float, b: float) -> float:
        return self._partial_moment(2, a, b)


@dataclass(frozen=True)
class GenericDensity(DensityPiece):
    """User density with a pointwise evaluator.

    ``antiderivative``, when given, must vanish at -inf whenever the support is
    unbounded below. Activity hints describe the behaviour at the origin, which
    quadrature cannot detect.
    """
    evaluator: Callable[[float], float]
    lower: float
    upper: float
    antiderivative: Optional[Callable[[float], float]] = None
    finite_activity: bool = True
    finite_variation: bool = True

    def __post_init__(self):
        _check_support(self.lower, self.upper)
        if self.finite_activity is False and self.upper != 0.0:
            raise InvalidTripletError("infinite activity requires the support to reach the origin")
        if self.finite_activity and not self.finite_variation:
            raise InvalidTripletError("a finite-activity density cannot have infinite variation")

    @property
    def infinite_activity(self) -> bool:
        return not self.finite_activity

    @property
    def infinite_variation(self) -> bool:
        return not self.finite_variation

    def density(self, y: float) -> float:
        return float(self.evaluator(y))

    def mass(self, a: float, b: float) -> float:
        if self.antiderivative is None:
            return super().mass(a, b)
        span = self.clip(a, b)
        if span is None:
            return 0.0
        if span[1] == 0.0 and self.infinite_activity:
            raise InfiniteMassError(f"infinite mass on [{a}, {b})")
        lo, hi = span
        lower_value = 0.0 if math.isinf(lo) else float(self.antiderivative(lo))
        return float(self.antiderivative(hi)) - lower_value


@dataclass(frozen=True)
class LevyMeasure:
    """Atoms plus pairwise disjoint density pieces on (-inf, 0)."""
    atoms: tuple[Atom, ...] = ()
    pieces: tuple[DensityPiece, ...] = ()

    def __post_init__(self):
        atoms = tuple(sorted(self.atoms, key=lambda a: a.location))
        pieces = tuple(sorted(self.pieces, key=lambda p: p.lower))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", pieces)
        for left, right in zip(pieces, pieces[1:]):
            if left.upper > right.lower:
                raise InvalidTripletError(
                    f"density pieces overlap: [{left.lower}, {left.upper}) and [{right.lower}, {right.upper})"
                )
        far = tail_mass(self, 1.0)
        if not math.isfinite(far):
            raise InvalidTripletError("lambda(-inf, -1] must be finite")
        if not math.isfinite(second_moment_zero(self, 1.0)):
            raise InvalidTripletError("integral of y^2 over [-1, 0) must be finite")

    @cached_property
    def is_zero(self) -> bool:
        return not self.atoms and not self.pieces

    @cached_property
    def is_finite(self) -> bool:
        return not any(p.infinite_activity for p in self.pieces)

    @cached_property
    def kappa_zero_finite(self) -> bool:
        return not any(p.infinite_variation for p in self.pieces)


def total_mass(measure: LevyMeasure) -> float:
    """lambda(R), inf for infinite activity."""
    if not measure.is_finite:
        return math.inf
    parts = [a.mass for a in measure.atoms]
    parts += [p.mass(p.lower, p.upper) for p in measure.pieces]
    return math.fsum(parts)


def kappa_zero_finite(measure: LevyMeasure) -> bool:
    """Whether the jump part has finite variation."""
    return measure.kappa_zero_finite


def interval_mass(measure: LevyMeasure, a: float, b: float) -> float:
    """
    lambda([a, b)) for a < b <= 0.

    Args:
        measure: Levy measure
        a: Left end, included (may be -inf)
        b: Right end, excluded

    Returns:
        The mass, by closed form where the piece has one and QUADPACK otherwise.

    Raises:
        ArgumentError: If the interval is malformed.
        InfiniteMassError: If [a, b) carries infinite mass at the origin.
    """
    if not a < b or b > 0:
        raise ArgumentError(f"interval [{a}, {b}) must satisfy a < b <= 0")
    parts = [atom.mass for atom in measure.atoms if a <= atom.location < b]
    parts += [p.mass(a, b) for p in measure.pieces]
    return math.fsum(parts)


def tail_mass(measure: LevyMeasure, t: float) -> float:
    """
    lambda((-inf, -t)), open at -t.

    Raises:
        ArgumentError: If t <= 0.
    """
    if not t > 0:
        raise ArgumentError(f"tail threshold must be > 0, got {t}")
    parts = [atom.mass for atom in measure.atoms if atom.location < -t]
    parts += [p.mass(-math.inf, -t) for p in measure.pieces]
    return math.fsum(parts)


def second_moment_zero(measure: LevyMeasure, delta: float) -> float:
    """Integral of y^2 over [-delta, 0)."""
    if not delta > 0:
        raise ArgumentError(f"delta must be > 0, got {delta}")
    parts = [atom.mass * atom.location ** 2 for atom in measure.atoms if -delta <= atom.location]
    parts += [p.second_moment(-delta, 0.0) for p in measure.pieces]
    return math.fsum(parts)


def abs_moment(measure: LevyMeasure, a: float, b: float) -> float:
    """Integral of |y| over [a, b)."""
    parts = [atom.mass * -atom.location for atom in measure.atoms if a <= atom.location < b]
    parts += [p.abs_moment(a, b) for p in measure.pieces]
    return math.fsum(parts)


def kappa(measure: LevyMeasure, delta: float) -> float:
    """Integral of |y| over [-1, -delta)."""
    if delta >= 1:
        return 0.0
    return abs_moment(measure, -1.0, -delta)


def xi(measure: LevyMeasure, delta: float) -> float:
    return second_moment_zero(measure, delta)


def _open_mass(measure: LevyMeasure, a: float, b: float) -> float:
    """lambda((a, b))."""
    at_a = math.fsum(atom.mass for atom in measure.atoms if atom.location == a)
    return interval_mass(measure, a, b) - at_a


@dataclass(frozen=True)
class LevyTriplet:
    """Characteristic triplet (sigma2, measure, mu) with cutoff y * 1[-V, 0)(y)."""
    sigma2: float
    measure: LevyMeasure = field(default_factory=LevyMeasure)
    mu: float = 0.0
    label: str = "triplet"

    def __post_init__(self):
        if not (math.isfinite(self.sigma2) and self.sigma2 >= 0):
            raise InvalidTripletError(f"sigma2 must be finite and >= 0, got {self.sigma2}")
        if not math.isfinite(self.mu):
            raise InvalidTripletError(f"mu must be finite, got {self.mu}")
        if self.sigma2 == 0 and self.measure.is_zero:
            raise InvalidTripletError("pure drift has monotone paths and is not spectrally negative")
        if self.sigma2 == 0 and self.measure.kappa_zero_finite and not self.mu0 > 0:
            raise InvalidTripletError(
                f"finite-variation triplet without Gaussian part needs adjusted drift mu0 > 0, got {self.mu0}"
            )

    @property
    def V(self) -> int:
        return 0 if self.measure.is_finite else 1

    @property
    def mu0(self) -> float:
        """Drift once the compensator is folded in; only finite when kappa(0) < inf."""
        if not self.measure.kappa_zero_finite:
            return math.nan
        return self.mu + self.V * abs_moment(self.measure, -1.0, 0.0)

    @property
    def infinite_variation(self) -> bool:
        return self.sigma2 > 0 or not self.measure.kappa_zero_finite

    @property
    def delta0(self) -> int:
        return 1 if self.infinite_variation else 0


def psi(triplet: LevyTriplet, beta: complex) -> complex:
    """
    Laplace exponent at beta, Re(beta) >= 0.

    Args:
        triplet: Levy triplet
        beta: Complex argument; real values give the real exponent

    Returns:
        psi(beta) as a complex number.

    Raises:
        ArgumentError: If Re(beta) < 0.
        QuadratureError: If the jump integral does not converge.
    """
    beta = complex(beta)
    if beta.real < 0:
        raise ArgumentError(f"psi needs Re(beta) >= 0, got {beta}")
    V = triplet.V
    terms = [0.5 * triplet.sigma2 * beta * beta, triplet.mu * beta]
    for atom in triplet.measure.atoms:
        compensated = V == 1 and atom.location >= -1.0
        terms.append(atom.mass * _exp_terms(beta * atom.location, compensated))
    for piece in triplet.measure.pieces:
        if V == 1:
            terms.append(piece.psi_integral(beta, -math.inf, -1.0, False))
            terms.append(piece.psi_integral(beta, -1.0, 0.0, True))
        else:
            terms.append(piece.psi_integral(beta, -math.inf, 0.0, False))
    value = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    if not cmath.isfinite(value):
        raise QuadratureError(f"Laplace exponent diverged at beta={beta}")
    return value


def psi_real(triplet: LevyTriplet) -> Callable[[float], float]:
    """psi restricted to the real half-line."""
    return lambda beta: psi(triplet, beta).real


@dataclass(frozen=True)
class SmallJumpDiagnostics:
    """kappa, xi, zeta, gamma evaluated on the supplied deltas plus the exponent fit."""
    deltas: tuple[float, ...]
    kappa: tuple[float, ...]
    xi: tuple[float, ...]
    zeta: tuple[float, ...]
    gamma_small: tuple[float, ...]
    path_class: PathClass
    kappa_zero_finite: bool
    epsilon_estimate: Optional[float] = None
    epsilon_residual: Optional[float] = None
    upper_bound_ok: Optional[bool] = None
    lower_bound_ok: Optional[bool] = None

    @property
    def assumption_ok(self) -> bool:
        return bool(self.upper_bound_ok and self.lower_bound_ok)


def classify_paths(measure: LevyMeasure) -> PathClass:
    if measure.is_zero:
        return PathClass.BM_ONLY
    if measure.is_finite:
        return PathClass.FINITE_ACTIVITY
    if measure.kappa_zero_finite:
        return PathClass.INFINITE_ACTIVITY_FINITE_VARIATION
    return PathClass.INFINITE_VARIATION


def small_jump_diagnostics(measure: LevyMeasure, deltas: Sequence[float] = DEFAULT_DELTAS) -> SmallJumpDiagnostics:
    """
    Evaluate the small-jump functionals and, for infinite variation, fit the exponent.

    The exponent is the negated least-squares slope of log lambda((-1, -delta))
    against log delta. The two bound checks compare the normalized sequences
    ``delta^eps * lambda((-1,-delta))`` and ``xi(delta) / delta^(2-eps)`` at the
    smallest delta against the largest one: a factor of 10 either way counts
    as unbounded or vanishing.

    Args:
        measure: Levy measure
        deltas: Points in (0, 1], sorted internally

    Returns:
        SmallJumpDiagnostics with kappa, xi, zeta, gamma per delta, the fitted
        exponent (None for finite variation) and the path class.

    Raises:
        ArgumentError: If deltas is empty or any delta lies outside (0, 1].
    """
    ds = tuple(sorted(float(d) for d in deltas))
    if not ds:
        raise ArgumentError("deltas must be nonempty")
    if any(not (0 < d <= 1) for d in ds):
        raise ArgumentError(f"deltas must lie in (0, 1], got {list(ds)}")

    kappas = tuple(kappa(measure, d) for d in ds)
    xis = tuple(xi(measure, d) for d in ds)
    zetas = tuple(d * k for d, k in zip(ds, kappas))
    gammas = tuple(d * d * interval_mass(measure, -1.0, -d) if d < 1 else 0.0 for d in ds)
    path_class = classify_paths(measure)
    result = dict(
        deltas=ds, kappa=kappas, xi=xis, zeta=zetas, gamma_small=gammas,
        path_class=path_class, kappa_zero_finite=measure.kappa_zero_finite,
    )
    if measure.kappa_zero_finite:
        return SmallJumpDiagnostics(**result)

    fit_ds = [d for d in ds if d < 1]
    masses = np.array([_open_mass(measure, -1.0, -d) for d in fit_ds])
    if len(fit_ds) < 2 or np.any(masses <= 0):
        logger.info("exponent fit skipped: need two deltas below 1 with positive mass")
        return SmallJumpDiagnostics(**result)

    log_d = np.log(fit_ds)
    coeffs, residuals, *_ = np.polyfit(log_d, np.log(masses), 1, full=True)
    epsilon = float(-coeffs[0])
    rms = float(np.sqrt(residuals[0] / len(fit_ds))) if len(residuals) else 0.0
    d_arr = np.array(fit_ds)
    upper = d_arr ** epsilon * masses
    lower = np.array([xi(measure, d) for d in fit_ds]) / d_arr ** (2 - epsilon)
    in_range = 1 < epsilon < 2
    upper_ok = in_range and bool(np.all(np.isfinite(upper))) and upper[0] <= 10 * upper[-1]
    lower_ok = in_range and lower[0] > 0 and lower[0] >= 0.1 * lower[-1]
    logger.debug("fitted epsilon=%.4f rms=%.3g", epsilon, rms)
    return SmallJumpDiagnostics(
        **result, epsilon_estimate=epsilon, epsilon_residual=rms,
        upper_bound_ok=bool(upper_ok), lower_bound_ok=bool(lower_ok),
    )


@dataclass(frozen=True)
class PositiveMeasure:
    """Measure on (0, inf), stored as atoms plus the reflection of its density.

    ``reflected`` holds the density of y -> m(-y) on (-inf, 0); atoms keep
    their positive locations so boundaries stay [a, b) on the positive axis.
    """
    atoms: tuple[tuple[float, float], ...] = ()
    reflected: LevyMeasure = field(default_factory=LevyMeasure)

    def __post_init__(self):
        for location, mass in self.atoms:
            if not (math.isfinite(location) and location > 0):
                raise InvalidTripletError(f"positive atom location must be > 0, got {location}")
            _check_positive("positive atom mass", mass)
        if self.reflected.atoms:
            raise InvalidTripletError("put atoms of a positive measure in 'atoms', not in the reflection")


def positive_interval_mass(measure: PositiveMeasure, a: float, b: float = math.inf) -> float:
    """m([a, b)) for 0 <= a < b <= inf."""
    if not (0 <= a < b):
        raise ArgumentError(f"interval [{a}, {b}) must satisfy 0 <= a < b")
    parts = [mass for location, mass in measure.atoms if a <= location < b]
    parts += [p.mass(-b, -a) for p in measure.reflected.pieces]
    return math.fsum(parts)
