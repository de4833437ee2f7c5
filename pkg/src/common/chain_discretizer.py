"""Upwards skip-free chain approximating a spectrally negative Levy process.

For a step h the chain lives on hZ, jumps up only by h, and jumps down by
multiples of h with the binned Levy masses c_{-kh} = lambda([-kh - h/2, -kh + h/2)).
Its scale-function recursion needs the gamma coefficients built here.
"""

import cmath
import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from src.common.levy_model import LevyTriplet, interval_mass, second_moment_zero, tail_mass
from src.common.scalekit_exceptions import ArgumentError, InadmissibleStepError, ScaleKitWarning

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    """Drift discretization: central differences need a Gaussian part."""
    ONE = "one"
    TWO = "two"


@dataclass(frozen=True)
class ChainModel:
    """Per-h discretization of a triplet.

    ``bins[k - 1]`` holds c_{-kh} for k = 1..depth and ``far_tail`` the mass
    below the deepest bin, lambda((-inf, -(depth + 1/2) h)).
    """
    triplet: LevyTriplet
    h: float
    scheme: Scheme
    V: int
    c0h: float
    mu_h: float
    bins: np.ndarray
    far_tail: float
    up_rate: float
    down_rate_local: float

    @property
    def depth(self) -> int:
        return len(self.bins)

    @property
    def drift_gap(self) -> float:
        return self.triplet.mu - self.mu_h


@dataclass(frozen=True)
class GammaCoefficients:
    """gamma_h and the tail coefficients gamma_{-kh}; ``gamma_down[k - 1]`` is gamma_{-kh}."""
    h: float
    gamma_up: float
    gamma_down: np.ndarray
    sigma_tilde2: float
    mu_tilde: float

    @property
    def depth(self) -> int:
        return len(self.gamma_down)


def select_scheme(triplet: LevyTriplet) -> tuple[Scheme, int]:
    """Scheme one iff sigma2 > 0; V = 0 iff the Levy measure is finite."""
    scheme = Scheme.ONE if triplet.sigma2 > 0 else Scheme.TWO
    return scheme, triplet.V


def depth_for(x: float, h: float) -> int:
    """Tail depth the recursion needs to reach level x."""
    return math.ceil(x / h - 1e-9) + 1


def _compensator(triplet: LevyTriplet, h: float, V: int) -> float:
    """mu^h = sum over bins y of y * lambda(A_y cap [-V, 0))."""
    if V == 0:
        return 0.0
    terms = []
    k = 1
    while k * h - h / 2 < V:
        lo = max(-k * h - h / 2, -float(V))
        hi = -k * h + h / 2
        terms.append(-k * h * interval_mass(triplet.measure, lo, hi))
        k += 1
    return math.fsum(terms)


def _warn_half_grid_atoms(triplet: LevyTriplet, h: float) -> None:
    for atom in triplet.measure.atoms:
        ratio = -atom.location / h - 0.5
        if abs(ratio - round(ratio)) < 1e-12:
            warnings.warn(
                f"atom at {atom.location} sits on a bin boundary for h={h}; "
                "it is assigned to the deeper bin",
                ScaleKitWarning,
                stacklevel=3,
            )


def build_chain(triplet: LevyTriplet, h: float, depth: int) -> ChainModel:
    """
    Discretize ``triplet`` on hZ with ``depth`` stored down-jump bins.

    Args:
        triplet: Levy triplet to approximate
        h: Grid step, finite and > 0
        depth: Number of stored bins; mass below (depth + 1/2) h goes to ``far_tail``

    Returns:
        ChainModel with rates, bins and the compensator mu^h.

    Raises:
        ArgumentError: If h or depth is out of range.
        InadmissibleStepError: If a rate is negative or the scheme-two drift gap is negative.
    """
    if not (math.isfinite(h) and h > 0):
        raise ArgumentError(f"h must be finite and > 0, got {h}")
    if depth < 1:
        raise ArgumentError(f"depth must be >= 1, got {depth}")

    scheme, V = select_scheme(triplet)
    measure = triplet.measure
    c0h = second_moment_zero(measure, h / 2) if V == 1 else 0.0
    mu_h = _compensator(triplet, h, V)
    gap = triplet.mu - mu_h
    diffusion = triplet.sigma2 + c0h

    if scheme is Scheme.ONE:
        up_rate = gap / (2 * h) + diffusion / (2 * h * h)
        down_local = -gap / (2 * h) + diffusion / (2 * h * h)
        offenders = {"up rate (mu - mu^h)/(2h) + (sigma2 + c0h)/(2h^2)": up_rate,
                     "local down rate (sigma2 + c0h)/(2h^2) - (mu - mu^h)/(2h)": down_local}
    else:
        up_rate = gap / h + c0h / (2 * h * h)
        down_local = c0h / (2 * h * h)
        offenders = {"drift gap mu - mu^h": gap, "up rate (mu - mu^h)/h + c0h/(2h^2)": up_rate}

    negative = {name: value for name, value in offenders.items() if value < 0}
    if negative:
        name = min(negative, key=negative.get)
        raise InadmissibleStepError(f"h={h} is inadmissible: {name} = {negative[name]:.6g} < 0")
    if not up_rate > 0:
        raise InadmissibleStepError(f"h={h} is inadmissible: up rate vanishes")

    _warn_half_grid_atoms(triplet, h)
    bins = np.array([interval_mass(measure, -k * h - h / 2, -k * h + h / 2) for k in range(1, depth + 1)])
    far_tail = tail_mass(measure, (depth + 0.5) * h)
    logger.debug("chain h=%g scheme=%s V=%d c0h=%.6g mu_h=%.6g up=%.6g", h, scheme.value, V, c0h, mu_h, up_rate)
    return ChainModel(
        triplet=triplet, h=h, scheme=scheme, V=V, c0h=c0h, mu_h=mu_h,
        bins=bins, far_tail=far_tail, up_rate=up_rate, down_rate_local=down_local,
    )


def gamma_coefficients(chain: ChainModel, depth: int | None = None) -> GammaCoefficients:
    """
    gamma_h and gamma_{-kh}, k = 1..depth, with open tails.

    Args:
        chain: Chain from build_chain
        depth: Number of tail coefficients; defaults to the chain's depth

    Returns:
        GammaCoefficients; gamma_down[0] also carries the local down rate.

    Raises:
        ArgumentError: If depth exceeds the chain's depth.
    """
    depth = chain.depth if depth is None else depth
    if not 1 <= depth <= chain.depth:
        raise ArgumentError(f"depth {depth} outside 1..{chain.depth}")
    h = chain.h
    measure = chain.triplet.measure
    gaussian = chain.triplet.sigma2 > 0
    sigma_tilde2 = (chain.triplet.sigma2 + chain.c0h) / (2 * h * h)
    mu_tilde = chain.drift_gap / (2 * h)

    gamma_up = sigma_tilde2 + mu_tilde if gaussian else sigma_tilde2 + 2 * mu_tilde
    tails = [tail_mass(measure, (k - 0.5) * h) for k in range(1, depth + 1)]
    tails[0] = sigma_tilde2 - (mu_tilde if gaussian else 0.0) + tails[0]
    return GammaCoefficients(
        h=h, gamma_up=gamma_up, gamma_down=np.array(tails),
        sigma_tilde2=sigma_tilde2, mu_tilde=mu_tilde,
    )


def chain_levy_tail(chain: ChainModel, k: int) -> float:
    """lambda^h((-inf, -kh]) from the chain's down rates."""
    if not 1 <= k <= chain.depth:
        raise ArgumentError(f"k={k} outside 1..{chain.depth}")
    parts = list(chain.bins[k - 1:]) + [chain.far_tail]
    if k == 1:
        parts.append(chain.down_rate_local)
    return math.fsum(parts)


def psi_h(chain: ChainModel, beta: complex) -> complex:
    """Laplace exponent of the chain.

    Mass below the deepest stored bin enters as ``-far_tail``, i.e. e^{beta y}
    is dropped there; the error is at most far_tail * e^{-Re(beta) (depth + 1/2) h}.
    """
    beta = complex(beta)
    if beta.real < 0:
        raise ArgumentError(f"psi_h needs Re(beta) >= 0, got {beta}")
    h = chain.h
    gap = chain.drift_gap
    second = (cmath.exp(beta * h) + cmath.exp(-beta * h) - 2) / (2 * h * h)
    if chain.scheme is Scheme.ONE:
        value = gap * (cmath.exp(beta * h) - cmath.exp(-beta * h)) / (2 * h)
        value += (chain.triplet.sigma2 + chain.c0h) * second
    else:
        value = gap * (cmath.exp(beta * h) - 1) / h
        value += chain.c0h * second
    ks = np.arange(1, chain.depth + 1)
    jumps = np.sum(chain.bins * (np.exp(-beta * ks * h) - 1))
    return complex(value + jumps - chain.far_tail)


def max_admissible_h(triplet: LevyTriplet, candidates: Sequence[float]) -> float:
    """
    Largest candidate step for which ``build_chain`` succeeds.

    Args:
        triplet: Levy triplet
        candidates: Steps to try, in any order

    Returns:
        The largest admissible candidate.

    Raises:
        ArgumentError: If candidates is empty.
        InadmissibleStepError: If every candidate fails.
    """
    if not candidates:
        raise ArgumentError("candidate list is empty")
    reasons = []
    for h in sorted(candidates, reverse=True):
        try:
            build_chain(triplet, h, depth=1)
            return h
        except InadmissibleStepError as exc:
            logger.debug("candidate h=%g rejected: %s", h, exc)
            reasons.append(str(exc))
    raise InadmissibleStepError("no admissible h among candidates; " + "; ".join(reasons))
