"""Scale functions W^(q)_h and Z^(q)_h of the skip-free chain.

Both recursions only ever add nonnegative terms:

    W[0]   = 1 / (h gamma_h)
    W[m+1] = W[0] + sum_{k=1}^{m+1} W[m+1-k] (q + gamma_{-kh}) / gamma_h
    Zt[m+1] = (m+1) q / gamma_h + sum_{k=1}^{m} Zt[m+1-k] (q + gamma_{-kh}) / gamma_h

so the cost is quadratic in the number of grid points.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from src.common.chain_discretizer import ChainModel, GammaCoefficients, build_chain, depth_for, gamma_coefficients, psi_h
from src.common.levy_model import LevyTriplet, tail_mass
from src.common.scalekit_exceptions import (
    ArgumentError,
    InadmissibleStepError,
    InsufficientMarginError,
    PhiDivergenceError,
    ScaleKitWarning,
    ScaleRangeError,
)

logger = logging.getLogger(__name__)

OVERFLOW_LIMIT = 1e300
GRID_TOL = 1e-9
PHI_XTOL = 1e-12
MAX_DOUBLINGS = 200
LAPLACE_MARGIN = 0.1


@dataclass(frozen=True)
class ScaleTable:
    """W^(q)_h and Z~^(q)_h = Z^(q)_h - 1 on {0, h, ..., nh}."""
    h: float
    q: float
    n: int
    W: np.ndarray
    Ztilde: np.ndarray
    delta0: int
    sigma2: float = 0.0

    @property
    def Z(self) -> np.ndarray:
        return 1.0 + self.Ztilde

    @property
    def grid(self) -> np.ndarray:
        return self.h * np.arange(self.n + 1)


@dataclass(frozen=True)
class PhiValue:
    """Largest root of psi(beta) = q on [0, inf)."""
    q: float
    phi: float
    residual: float


def _check_inputs(gamma: GammaCoefficients, q: float, n: int) -> None:
    if not (math.isfinite(q) and q >= 0):
        raise ArgumentError(f"q must be finite and >= 0, got {q}")
    if n < 0:
        raise ArgumentError(f"n must be >= 0, got {n}")
    if gamma.depth < n + 1:
        raise ArgumentError(f"gamma depth {gamma.depth} is short of n + 1 = {n + 1}")


def _weights(gamma: GammaCoefficients, q: float, n: int) -> np.ndarray:
    """(q + gamma_{-kh}) / gamma_h for k = n+1 down to 1, reversed so prefixes line up."""
    return ((q + gamma.gamma_down[: n + 1]) / gamma.gamma_up)[::-1].copy()


def _run_recursion(values: np.ndarray, rev: np.ndarray, offsets: Callable[[int], float], compensated: bool) -> None:
    # values[m+1] = offset(m) + sum_{j=0}^{m} values[j] * a_{m+1-j}; rev[-(m+1):] holds a_{m+1}..a_1
    size = len(rev)
    for m in range(len(values) - 1):
        coeffs = rev[size - m - 1:]
        head = values[: m + 1]
        if compensated:
            acc = math.fsum((head * coeffs).tolist() + [offsets(m)])
        else:
            acc = offsets(m) + float(np.dot(head, coeffs))
        if not acc <= OVERFLOW_LIMIT:
            raise ScaleRangeError(
                f"scale function exceeded {OVERFLOW_LIMIT:g} at grid index {m + 1}; "
                "reduce the level x or the growth rate"
            )
        values[m + 1] = acc


def compute_W(gamma: GammaCoefficients, q: float, n: int, compensated: bool = False) -> np.ndarray:
    """
    W^(q)_h on {0, ..., nh} by the forward recursion.

    Args:
        gamma: Chain coefficients with depth at least n + 1
        q: Killing rate, finite and >= 0
        n: Last grid index
        compensated: Accumulate each step with math.fsum instead of np.dot

    Returns:
        Array of n + 1 values starting at W[0] = 1 / (h gamma_h).

    Raises:
        ArgumentError: If q is negative or the coefficients are too shallow for n.
        ScaleRangeError: If values pass 1e300.
    """
    _check_inputs(gamma, q, n)
    W = np.empty(n + 1)
    W[0] = 1.0 / (gamma.h * gamma.gamma_up)
    w0 = W[0]
    _run_recursion(W, _weights(gamma, q, n), lambda m: w0, compensated)
    return W


def compute_Z(gamma: GammaCoefficients, q: float, n: int, compensated: bool = False) -> np.ndarray:
    """
    Z~^(q)_h = Z^(q)_h - 1 on {0, ..., nh}.

    Same arguments and errors as compute_W; Z~[0] = 0.
    """
    _check_inputs(gamma, q, n)
    Zt = np.zeros(n + 1)
    step = q / gamma.gamma_up
    # Zt[0] = 0, so including k = m+1 in the sum changes nothing.
    _run_recursion(Zt, _weights(gamma, q, n), lambda m: (m + 1) * step, compensated)
    return Zt


def compute_table(triplet: LevyTriplet, h: float, q: float, x_max: float, compensated: bool = False) -> ScaleTable:
    """
    Build chain and gamma coefficients, then both recursions up to x_max.

    Args:
        triplet: Levy triplet
        h: Grid step
        q: Killing rate
        x_max: Last level, a multiple of h
        compensated: Use fsum accumulation

    Returns:
        ScaleTable with W and Z~ on {0, ..., x_max}.

    Raises:
        ArgumentError: If x_max is off-grid or q is negative.
        InadmissibleStepError: If h gives a negative chain rate.
        ScaleRangeError: If values pass 1e300.
    """
    n = grid_index(x_max, h)
    chain = build_chain(triplet, h, depth_for(x_max, h))
    gamma = gamma_coefficients(chain, n + 1)
    W = compute_W(gamma, q, n, compensated)
    Zt = compute_Z(gamma, q, n, compensated)
    logger.debug("table h=%g q=%g n=%d W[n]=%.6g", h, q, n, W[-1])
    return ScaleTable(h=h, q=q, n=n, W=W, Ztilde=Zt, delta0=triplet.delta0, sigma2=triplet.sigma2)


def z_from_w(table: ScaleTable) -> np.ndarray:
    """Z^(q)_h from W via Z[m] = 1 + q h sum_{j<m} W[j]."""
    sums = np.concatenate(([0.0], np.cumsum(table.W[:-1])))
    return 1.0 + table.q * table.h * sums


def grid_index(x: float, h: float) -> int:
    """Index m with x = m h, tolerating relative 1e-9 rounding.

    Raises:
        ArgumentError: If x is not on the grid.
    """
    ratio = x / h
    m = round(ratio)
    if abs(ratio - m) > GRID_TOL * max(1.0, abs(ratio)) or m < 0:
        raise ArgumentError(f"x={x} is not on the grid of step h={h}")
    return int(m)


def evaluate_W_at(table: ScaleTable, x: float) -> float:
    """
    W_h(x - delta0 h), the grid approximant of W^(q)(x).

    Args:
        table: Table from compute_table
        x: Level on the grid

    Returns:
        The shifted table value.

    Raises:
        ArgumentError: If x is off-grid or outside {delta0 h, ..., nh}.
    """
    m = grid_index(x, table.h) - table.delta0
    if not 0 <= m <= table.n:
        raise ArgumentError(f"x={x} outside the table range [{table.delta0 * table.h}, {table.n * table.h}]")
    return float(table.W[m])


def evaluate_Z_at(table: ScaleTable, x: float) -> float:
    """Z_h(x), unshifted."""
    m = grid_index(x, table.h)
    if not 0 <= m <= table.n:
        raise ArgumentError(f"x={x} outside the table range [0, {table.n * table.h}]")
    return float(1.0 + table.Ztilde[m])


def ide_recursion_W(chain: ChainModel, q: float, n: int) -> np.ndarray:
    """W^(q)_h from the integro-differential rearrangement of the recursion.

    Uses the drift gap, c0h and open tails lambda((-inf, -(k - 1/2) h)) directly
    instead of the gamma coefficients.

    Raises:
        ArgumentError: If n exceeds the chain depth.
        InadmissibleStepError: If the leading coefficient vanishes.
    """
    if n < 0 or n + 1 > chain.depth + 1:
        raise ArgumentError(f"n={n} exceeds the chain depth {chain.depth}")
    h = chain.h
    gap = chain.drift_gap
    diffusion = chain.triplet.sigma2 + chain.c0h
    if chain.triplet.sigma2 > 0:
        lead = diffusion / (2 * h) + gap / 2
        previous = diffusion / (2 * h) - gap / 2
    else:
        lead = chain.c0h / (2 * h) + gap
        previous = chain.c0h / (2 * h)
    if not lead > 0:
        raise InadmissibleStepError(f"h={h} is inadmissible: leading coefficient {lead:.6g} <= 0")

    weights = h * (np.array([tail_mass(chain.triplet.measure, (k - 0.5) * h) for k in range(1, n + 1)]) + q)
    W = np.empty(n + 1)
    W[0] = 1.0 / lead
    for m in range(1, n + 1):
        rhs = 1.0 + previous * W[m - 1] + float(np.dot(W[m - 1::-1], weights[:m]))
        W[m] = rhs / lead
    return W


def phi_root(psi_eval: Callable[[float], float], q: float) -> PhiValue:
    """
    Largest root of psi_eval(beta) = q on [0, inf).

    psi is convex with psi(0) = 0; the minimizer on a bracket [0, b] with
    psi(b) > q separates the two possible roots and the right branch is solved
    with Brent's method.

    Args:
        psi_eval: Real Laplace exponent, e.g. psi_real(triplet) or a chain's psi_h
        q: Target value, finite and >= 0

    Returns:
        PhiValue with the root and the residual psi_eval(phi) - q.

    Raises:
        ArgumentError: If q is negative or not finite.
        PhiDivergenceError: If no b with psi(b) > q turns up within 200 doublings.
    """
    if not (math.isfinite(q) and q >= 0):
        raise ArgumentError(f"q must be finite and >= 0, got {q}")
    tol = 1e-10 * max(1.0, q)
    upper = 1.0
    for _ in range(MAX_DOUBLINGS):
        if psi_eval(upper) - q > 0:
            break
        upper *= 2
    else:
        raise PhiDivergenceError(f"could not bracket psi(beta) = {q} after {MAX_DOUBLINGS} doublings")

    found = optimize.minimize_scalar(lambda b: psi_eval(b) - q, bounds=(0.0, upper), method="bounded",
                                     options={"xatol": 1e-10})
    lowest = float(found.x)
    low_value = psi_eval(lowest) - q
    if low_value >= -tol:
        # Only reachable with q = 0 and psi'(0+) >= 0.
        return PhiValue(q=q, phi=0.0, residual=psi_eval(0.0) - q)
    if lowest >= upper:
        raise PhiDivergenceError("minimizer reached the bracket end")
    root = optimize.brentq(lambda b: psi_eval(b) - q, lowest, upper, xtol=PHI_XTOL, rtol=4 * np.finfo(float).eps)
    return PhiValue(q=q, phi=float(root), residual=psi_eval(root) - q)


def phi_h(chain: ChainModel, q: float) -> PhiValue:
    """Phi^h(q), the growth exponent of W^(q)_h."""
    return phi_root(lambda b: psi_h(chain, b).real, q)


def laplace_identity_check(table: ScaleTable, chain: ChainModel, beta: float) -> float:
    """
    Relative residual of the transform identity for the step function W_h.

    The left side sums W[m] e^{-beta m h} (1 - e^{-beta h}) / beta exactly over
    the table and bounds the remainder assuming W grows at most like
    e^{(Phi^h(q) + 0.1) x}; the right side is (e^{beta h} - 1) / (beta h (psi^h(beta) - q)).

    Args:
        table: Table of W_h, as long as possible
        chain: Chain the table was built from
        beta: Transform argument, beyond Phi^h(q) + 0.1

    Returns:
        |left + tail bound - right| / |right|; a ScaleKitWarning flags a large tail bound.

    Raises:
        InsufficientMarginError: If beta <= Phi^h(q) + 0.1.
    """
    phi = phi_h(chain, table.q).phi
    rate = phi + LAPLACE_MARGIN
    if not beta > rate:
        raise InsufficientMarginError(f"beta={beta} must exceed Phi^h(q) + {LAPLACE_MARGIN} = {rate:.6g}")
    h = table.h
    m = np.arange(table.n + 1)
    cell = -np.expm1(-beta * h) / beta
    lhs = float(np.sum(table.W * np.exp(-beta * m * h))) * cell

    ratio = math.exp((rate - beta) * h)
    tail = table.W[-1] * math.exp(-beta * table.n * h) * cell * ratio / (1 - ratio)
    rhs = math.expm1(beta * h) / (beta * h * (psi_h(chain, beta).real - table.q))
    if tail > 1e-6 * abs(rhs):
        warnings.warn(
            f"Laplace tail bound {tail:.3g} is large relative to the transform; extend the table",
            ScaleKitWarning,
            stacklevel=2,
        )
    return abs(lhs + tail - rhs) / abs(rhs)
