"""Applied quantities read off a scale-function table.

The deficit-at-ruin and CBI formulas are evaluated exactly as the discrete
sums are written, endpoint half-weights and signs included.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from src.common.levy_model import PositiveMeasure, positive_interval_mass
from src.common.scale_engine import ScaleTable, grid_index
from src.common.scalekit_exceptions import ArgumentError, ScaleKitWarning

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeficitDensityRequest:
    """Start level x, upper barrier a, deficit points and claim-size density f on (0, inf)."""
    x: float
    a: float
    y_grid: tuple[float, ...]
    claim_density: Callable[[float], float]

    def __post_init__(self):
        if not 0 < self.x < self.a:
            raise ArgumentError(f"need 0 < x < a, got x={self.x}, a={self.a}")
        if any(not y > 0 for y in self.y_grid):
            raise ArgumentError("deficit points must be > 0")


def _index(table: ScaleTable, x: float, name: str = "x") -> int:
    m = grid_index(x, table.h)
    if not 0 <= m <= table.n:
        raise ArgumentError(f"{name}={x} outside the table range [0, {table.n * table.h}]")
    return m


def exit_ratio(table: ScaleTable, x: float, y: float) -> float:
    """
    W_h(x) / W_h(x + y); for q = 0 the chain's chance to gain y before losing x.

    Args:
        table: Table from compute_table
        x: Start level, on the grid and > 0
        y: Gain, > 0, with x + y inside the table

    Returns:
        A ratio in (0, 1].

    Raises:
        ArgumentError: If x or y is not positive or a level is off-grid or past the table.
    """
    if not (x > 0 and y > 0):
        raise ArgumentError(f"x and y must be > 0, got x={x}, y={y}")
    i, j = _index(table, x), _index(table, x + y, "x + y")
    return float(table.W[i] / table.W[j])


def ruin_deficit_density(table: ScaleTable, req: DeficitDensityRequest) -> dict[float, float]:
    """
    k_h(y) for each y in the request's grid.

    Negative values are returned as computed and reported through a warning.

    Args:
        table: Table of the surplus process
        req: Start level, barrier, deficit points and claim density

    Returns:
        {y: k_h(y)} in the order of the request's grid.

    Raises:
        ArgumentError: If x or a is off-grid, the table does not reach a, or the claim
            density fails or is not finite at some point (the message names it).
    """
    h = table.h
    ix, ia = _index(table, req.x), _index(table, req.a, "a")
    W = table.W
    wx, wa, w0 = W[ix], W[ia], W[0]
    result = {}
    for y in req.y_grid:
        f = _evaluator(req.claim_density, y)
        upper = math.fsum(f(k * h + y) * W[ia - k] for k in range(1, ia)) * wx / wa
        lower = math.fsum(W[ix - k] * f(k * h + y) for k in range(1, ix))
        value = h * (f(y + req.a) * wx * w0 / (2 * wa) + upper - lower - w0 * f(req.x + y) / 2)
        result[y] = value
    negatives = [y for y, v in result.items() if v < 0]
    if negatives:
        warnings.warn(
            f"deficit density negative at {len(negatives)} point(s), first at y={negatives[0]:g}; "
            "refine h",
            ScaleKitWarning,
            stacklevel=2,
        )
    return result


def _evaluator(f: Callable[[float], float], y: float) -> Callable[[float], float]:
    def evaluate(point: float) -> float:
        try:
            value = float(f(point))
        except Exception as exc:
            raise ArgumentError(f"claim density failed at {point} (deficit y={y}): {exc}") from exc
        if not math.isfinite(value):
            raise ArgumentError(f"claim density is not finite at {point} (deficit y={y})")
        return value
    return evaluate


def deficit_total_mass(densities: dict[float, float]) -> float:
    """Trapezoid integral of k_h over its (sorted) deficit grid."""
    ys = np.array(sorted(densities))
    if len(ys) < 2:
        return 0.0
    values = np.array([densities[y] for y in ys])
    return float(np.sum((values[1:] + values[:-1]) * np.diff(ys)) / 2)


def cbi_k(table: ScaleTable, b: float, m: PositiveMeasure, xs: Sequence[float]) -> dict[float, float]:
    """
    k_h(x) of the CBI limit law for drift b and Levy measure m of the immigration subordinator.

    Args:
        table: Table of the dual process, q = 0
        b: Immigration drift, >= 0
        m: Levy measure of the immigration subordinator on (0, inf)
        xs: Levels on the grid, at least h

    Returns:
        {x: k_h(x)}. A ScaleKitWarning flags tables with delta0 = 0.

    Raises:
        ArgumentError: If b < 0 or some x is off-grid or outside (0, nh].
    """
    if not b >= 0:
        raise ArgumentError(f"b must be >= 0, got {b}")
    if table.delta0 != 1:
        warnings.warn(
            "the bW(0) term is only negligible for infinite-variation paths; this table has delta0 = 0",
            ScaleKitWarning,
            stacklevel=2,
        )
    h = table.h
    W = table.W
    head = positive_interval_mass(m, h / 2)
    result = {}
    for x in xs:
        i = _index(table, x)
        if i < 1:
            raise ArgumentError(f"x={x} must be at least h={h}")
        binned = math.fsum(
            W[i - k - 1] * positive_interval_mass(m, k * h - h / 2, k * h + h / 2) for k in range(1, i)
        )
        result[x] = b * (W[i] - W[i - 1]) / h + W[i - 1] * head - binned
    return result


def derivative_estimate(table: ScaleTable, x: float) -> float:
    """(W_h(x) - W_h(x - 2h)) / (2h).

    Raises:
        ArgumentError: If x < 2h or off-grid.
    """
    i = _index(table, x)
    if i < 2:
        raise ArgumentError(f"x={x} must be >= 2h = {2 * table.h}")
    if table.sigma2 == 0:
        warnings.warn(
            "derivative estimates are only analysed for a Gaussian component; result may not converge",
            ScaleKitWarning,
            stacklevel=2,
        )
    return float((table.W[i] - table.W[i - 2]) / (2 * table.h))


def functional_sum(table: ScaleTable, F: Callable[[float, float], float], x: float) -> float:
    """
    h * sum_{k=0}^{floor(x/h)-1} F(kh, W_h(kh)).

    Raises:
        ArgumentError: If x exceeds the table range.
    """
    if x > table.n * table.h * (1 + 1e-12):
        raise ArgumentError(f"x={x} exceeds the table range {table.n * table.h}")
    count = math.floor(x / table.h + 1e-9)
    h = table.h
    return h * math.fsum(F(k * h, float(table.W[k])) for k in range(count))
