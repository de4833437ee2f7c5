"""Named triplets used by the experiments and the test suite."""

import math

from src.common.levy_model import (
    Atom,
    ExponentialDensity,
    GenericDensity,
    LevyMeasure,
    LevyTriplet,
    LogNormalDensity,
    PositiveMeasure,
    PowerLawDensity,
)
from src.common.scalekit_exceptions import InvalidTripletError


def brownian(sigma2: float = 2.0, mu: float = 0.0) -> LevyTriplet:
    return LevyTriplet(sigma2=sigma2, mu=mu, label=f"brownian(sigma2={sigma2:g},mu={mu:g})")


def unit_atom() -> LevyTriplet:
    """Drift 1 minus unit-rate jumps of size 1 (V = 0)."""
    return LevyTriplet(sigma2=0.0, measure=LevyMeasure(atoms=(Atom(-1.0, 1.0),)), mu=1.0, label="unit-atom")


def lognormal_cramer_lundberg(mu: float = 5.0) -> LevyTriplet:
    """Premium rate mu, unit-rate claims with standard log-normal sizes."""
    return LevyTriplet(sigma2=0.0, measure=LevyMeasure(pieces=(LogNormalDensity(),)), mu=mu, label="lognormal")


def stable(beta: float = 1.5, mu: float | None = None) -> LevyTriplet:
    """lambda(dy) = |y|^(-1-beta) dy on (-inf, 0); mu defaults to 1/(beta - 1).

    Raises:
        InvalidTripletError: If mu is omitted and beta is not in (1, 2).
    """
    if mu is None and not 1.0 < beta < 2.0:
        raise InvalidTripletError(f"stable preset needs 1 < beta < 2 for the default drift, got beta={beta}")
    measure = LevyMeasure(pieces=(PowerLawDensity(lower=-math.inf, upper=0.0, coefficient=1.0, index=beta),))
    drift = 1.0 / (beta - 1.0) if mu is None else mu
    return LevyTriplet(sigma2=0.0, measure=measure, mu=drift, label=f"stable(beta={beta:g},mu={drift:g})")


def exponential_jumps(a: float = 1.0, rho: float = 1.0, mu: float = 2.0) -> LevyTriplet:
    measure = LevyMeasure(pieces=(ExponentialDensity(scale=a, rate=rho),))
    return LevyTriplet(sigma2=0.0, measure=measure, mu=mu, label=f"exp-jumps(a={a:g},rho={rho:g},mu={mu:g})")


def _far_density(y: float) -> float:
    t = -y
    return math.exp(math.cos(y)) * (3 + y * math.sin(y)) / t ** 4 + math.e / t ** 3


def _far_antiderivative(y: float) -> float:
    t = -y
    return math.exp(math.cos(y)) / t ** 3 + 0.5 * math.e / t ** 2


def _pole_density(y: float) -> float:
    return 0.5 / math.sqrt(-y - 1) + _far_density(y)


def _pole_antiderivative(y: float) -> float:
    return -math.sqrt(-y - 1) + _far_antiderivative(y)


def cbi_mixture(mu: float = 15.0) -> LevyTriplet:
    """Two atoms, a stable-like piece at 0, a pole at -1 and a fat far tail (V = 1).

    On [-2, -1) the pole and the far-tail term overlap and form one piece.
    """
    measure = LevyMeasure(
        atoms=(Atom(-1.0, 0.5), Atom(-2.0, 0.5)),
        pieces=(
            PowerLawDensity(lower=-1.0, upper=0.0, coefficient=1.5, index=1.5),
            GenericDensity(evaluator=_pole_density, lower=-2.0, upper=-1.0, antiderivative=_pole_antiderivative),
            GenericDensity(evaluator=_far_density, lower=-math.inf, upper=-2.0, antiderivative=_far_antiderivative),
        ),
    )
    return LevyTriplet(sigma2=0.0, measure=measure, mu=mu, label="cbi-mixture")


def cbi_immigration() -> PositiveMeasure:
    """m(dy) = e^{-y} dy on (0, inf)."""
    return PositiveMeasure(reflected=LevyMeasure(pieces=(ExponentialDensity(scale=1.0, rate=1.0),)))


def lognormal_claim_density(y: float) -> float:
    """Standard log-normal density on (0, inf)."""
    if y <= 0:
        return 0.0
    return math.exp(-0.5 * math.log(y) ** 2) / (math.sqrt(2 * math.pi) * y)


PRESETS = {
    "brownian": brownian,
    "unit-atom": unit_atom,
    "lognormal": lognormal_cramer_lundberg,
    "stable": stable,
    "exp-jumps": exponential_jumps,
    "cbi-mixture": cbi_mixture,
}