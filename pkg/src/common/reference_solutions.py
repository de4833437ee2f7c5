"""Closed-form scale functions, sharpness limits and fine-grid benchmarks."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

from scipy import special

from src.common.levy_model import LevyTriplet
from src.common.scale_engine import compute_table, evaluate_W_at, evaluate_Z_at
from src.common.scalekit_exceptions import ArgumentError, ScaleRangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BmClosedForm:
    """Brownian motion with drift: sigma2 > 0, mu real, q >= 0."""
    sigma2: float
    mu: float
    q: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ArgumentError(f"sigma2 must be > 0, got {self.sigma2}")
        if not self.q >= 0:
            raise ArgumentError(f"q must be >= 0, got {self.q}")

    @property
    def root(self) -> float:
        return math.sqrt(self.mu ** 2 + 2 * self.sigma2 * self.q)

    @property
    def alpha_plus(self) -> float:
        return (-self.mu + self.root) / self.sigma2

    @property
    def alpha_minus(self) -> float:
        return (-self.mu - self.root) / self.sigma2

    @property
    def degenerate(self) -> bool:
        return self.q == 0 and self.mu == 0

    def _theta(self, sign: int) -> float:
        mu, s2, q, root = self.mu, self.sigma2, self.q, self.root
        return (mu ** 3 * root + sign * (0.5 * q * q * s2 * s2 - mu ** 4 - mu * mu * s2 * q)) / (3 * s2 ** 3 * root)

    @property
    def theta_plus(self) -> float:
        return self._theta(+1)

    @property
    def theta_minus(self) -> float:
        return self._theta(-1)


def bm_W(form: BmClosedForm, x: float) -> float:
    """
    W^(q)(x) for Brownian motion with drift; 2x/sigma2 when q = mu = 0.

    Args:
        form: Brownian parameters (sigma2, mu, q)
        x: Level; W vanishes below 0

    Returns:
        (e^{alpha+ x} - e^{alpha- x}) / sqrt(mu^2 + 2 sigma2 q), through expm1.

    Raises:
        ScaleRangeError: If the value exceeds the float range.
    """
    if x < 0:
        return 0.0
    if form.degenerate:
        return 2 * x / form.sigma2
    return _finite(
        "W", x, lambda: (math.expm1(form.alpha_plus * x) - math.expm1(form.alpha_minus * x)) / form.root
    )


def bm_Z(form: BmClosedForm, x: float) -> float:
    """Z^(q)(x) = 1 + q * integral of bm_W over [0, x]."""
    if x <= 0 or form.q == 0:
        return 1.0
    ap, am = form.alpha_plus, form.alpha_minus
    return _finite("Z", x, lambda: 1.0 + form.q * (math.expm1(ap * x) / ap - math.expm1(am * x) / am) / form.root)


def _finite(name: str, x: float, value: Callable[[], float]) -> float:
    try:
        result = value()
    except OverflowError:
        result = math.inf
    if not math.isfinite(result):
        raise ScaleRangeError(f"closed-form {name}({x}) overflows the float range")
    return result


def cp_unit_atom_W(q: float, x: float) -> float:
    """W^(q)(x) = e^{(1+q) x} on [0, 1) for sigma2 = 0, lambda = delta_{-1}, mu = 1."""
    _check_unit_interval(x)
    return math.exp((1 + q) * x)


def cp_unit_atom_Z(q: float, x: float) -> float:
    _check_unit_interval(x)
    return 1.0 + q * math.expm1((1 + q) * x) / (1 + q)


def _check_unit_interval(x: float) -> None:
    if not 0 <= x < 1:
        raise ArgumentError(f"closed form only holds for x in [0, 1), got {x}")


def exp_jumps_W(a: float, rho: float, mu: float, x: float) -> float:
    """W(x) for drift mu minus compound Poisson jumps of law a*rho*e^{rho y}dy, q = 0."""
    if x < 0:
        return 0.0
    c = rho - a / mu
    if abs(c) < 1e-12:
        return (1 + rho * x) / mu
    return rho / (mu * c) - a / (mu * mu * c) * math.exp(-c * x)


def stable_W(beta: float, x: float) -> float:
    """W(x) = x^{beta-1} / (Gamma(beta) Gamma(-beta)) for the spectrally negative beta-stable law.

    The triplet is sigma2 = 0, lambda(dy) = |y|^{-1-beta} dy on (-inf, 0),
    V = 1 and mu = 1/(beta - 1), for which psi(theta) = Gamma(-beta) theta^beta.
    """
    if not 1 < beta < 2:
        raise ArgumentError(f"beta must lie in (1, 2), got {beta}")
    if x <= 0:
        return 0.0
    return x ** (beta - 1) / (special.gamma(beta) * special.gamma(-beta))


class SharpnessCase(str, Enum):
    BM_W = "BM_W"
    BM_Z = "BM_Z"
    CP_W = "CP_W"
    CP_Z = "CP_Z"


def sharpness_limit(case: SharpnessCase | str, q: float, x: float, sigma2: float = 1.0, mu: float = 1.0) -> float:
    """
    Limit of Delta(x, h) / h^p as h -> 0 for the fixed reference triplets.

    p = 2 for BM_W and 1 otherwise, with Delta = exact - approximant. The BM
    cases use (sigma2, 0, mu); the CP cases use (0, delta_{-1}, 1) and need
    0 < x < 1.

    Args:
        case: BM_W, BM_Z, CP_W or CP_Z
        q: Killing rate
        x: Level
        sigma2: Gaussian variance of the BM cases
        mu: Drift of the BM cases

    Returns:
        The limit constant; 0 for driftless Brownian motion at q = 0.

    Raises:
        ArgumentError: If x is outside the validity range.
    """
    case = SharpnessCase(case)
    if case in (SharpnessCase.CP_W, SharpnessCase.CP_Z):
        if not 0 < x < 1:
            raise ArgumentError(f"{case.value} limit needs 0 < x < 1, got {x}")
        growth = math.exp(x * (1 + q))
        if case is SharpnessCase.CP_W:
            return 0.5 * (1 + q) ** 2 * x * growth
        return 0.5 * q * (1 + q) * x * growth

    if x < 0:
        raise ArgumentError(f"x must be >= 0, got {x}")
    form = BmClosedForm(sigma2=sigma2, mu=mu, q=q)
    if form.degenerate:
        return 0.0
    ep, em = math.exp(form.alpha_plus * x), math.exp(form.alpha_minus * x)
    if case is SharpnessCase.BM_Z:
        return -0.5 * q / form.root * (ep - em)
    first = q * q / (2 * form.root ** 2) * bm_W(form, x)
    return first + x / form.root * (ep * form.theta_plus - em * form.theta_minus)


def fine_grid_benchmark(triplet: LevyTriplet, q: float, xs: Sequence[float], h_bench: float,
                        with_z: bool = False) -> dict[float, float] | tuple[dict[float, float], dict[float, float]]:
    """
    W^(q)_{h_bench}(x - delta0 h_bench) at each x, optionally with Z_{h_bench}(x).

    Args:
        triplet: Levy triplet
        q: Killing rate
        xs: Levels, multiples of h_bench
        h_bench: Benchmark step
        with_z: Also return the Z values

    Returns:
        {x: W} or ({x: W}, {x: Z}).

    Raises:
        ArgumentError: If some x is not a multiple of h_bench.
        InadmissibleStepError: If h_bench is inadmissible for the triplet.
    """
    xs = list(xs)
    if not xs:
        return ({}, {}) if with_z else {}
    table = compute_table(triplet, h_bench, q, max(xs))
    w_values = {x: evaluate_W_at(table, x) for x in xs}
    logger.info("benchmark %s at h=%g over %d points", triplet.label, h_bench, len(xs))
    if not with_z:
        return w_values
    return w_values, {x: evaluate_Z_at(table, x) for x in xs}
