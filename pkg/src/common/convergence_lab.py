"""Grid-refinement sweeps of the scale-function error and log-log rate fits."""

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from src.common.levy_model import LevyTriplet, PathClass, classify_paths, small_jump_diagnostics, SmallJumpDiagnostics
from src.common.reference_solutions import fine_grid_benchmark
from src.common.scale_engine import compute_table, evaluate_W_at, evaluate_Z_at
from src.common.scalekit_exceptions import ArgumentError, AssumptionCheckError, OracleResolutionError, ScaleKitWarning

logger = logging.getLogger(__name__)

DEFAULT_HS = tuple(2.0 ** -k for k in range(4, 10))
DEFAULT_K = (0.25, 0.5, 0.75)
MIN_R2 = 0.98
MAX_DROPS = 2
BENCHMARK_RATIO = 16
NEST_TOL = 1e-9


@dataclass(frozen=True)
class Oracle:
    """Reference values of W^(q) (and optionally Z^(q)) at the sweep points.

    Closed-form oracles carry callables; benchmark oracles carry the step of the
    fine grid they were computed on, which sweeps check against their own steps.
    """
    W: Callable[[float], float]
    Z: Optional[Callable[[float], float]] = None
    h_bench: Optional[float] = None
    name: str = "closed-form"

    @classmethod
    def closed_form(cls, W: Callable[[float], float], Z: Optional[Callable[[float], float]] = None,
                    name: str = "closed-form") -> "Oracle":
        return cls(W=W, Z=Z, name=name)

    @classmethod
    def benchmark(cls, triplet: LevyTriplet, q: float, xs: Sequence[float], h_bench: float) -> "Oracle":
        w_values, z_values = fine_grid_benchmark(triplet, q, xs, h_bench, with_z=True)
        return cls(W=_lookup(w_values), Z=_lookup(z_values), h_bench=h_bench, name=f"benchmark h={h_bench:g}")


def _lookup(values: dict[float, float]) -> Callable[[float], float]:
    def get(x: float) -> float:
        for key, value in values.items():
            if math.isclose(key, x, rel_tol=1e-12, abs_tol=1e-15):
                return value
        raise ArgumentError(f"benchmark has no value at x={x}")
    return get


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log err = slope * log h + intercept."""
    slope: float
    intercept: float
    r2: float
    exact: bool = False
    dropped: int = 0


@dataclass(frozen=True)
class ExpectedRates:
    w: float
    z: float


@dataclass(frozen=True)
class SweepReport:
    """Errors of W_h and Z_h against an oracle along a nested sequence of steps.

    ``signed_w[i, j]`` is W(K[j]) - W_{hs[i]}(K[j] - delta0 hs[i]); ``signed_z``
    compares Z unshifted.
    """
    triplet_id: str
    q: float
    K: tuple[float, ...]
    hs: tuple[float, ...]
    err_w: np.ndarray
    err_z: np.ndarray
    signed_w: np.ndarray
    signed_z: np.ndarray
    fit_w: RateFit
    fit_z: RateFit
    expected: Optional[ExpectedRates] = None
    oracle_name: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def fitted_slope_W(self) -> float:
        return self.fit_w.slope

    @property
    def fitted_slope_Z(self) -> float:
        return self.fit_z.slope

    @property
    def expected_slope(self) -> Optional[float]:
        return self.expected.w if self.expected else None


def check_nested(hs: Sequence[float]) -> tuple[float, ...]:
    """Sort steps coarsest first and require each to be an integer multiple of the next.

    Raises:
        ArgumentError: If the sequence is empty, non-positive or not nested.
    """
    ordered = tuple(sorted((float(h) for h in hs), reverse=True))
    if not ordered or any(not h > 0 for h in ordered):
        raise ArgumentError(f"steps must be positive, got {list(hs)}")
    for coarse, fine in zip(ordered, ordered[1:]):
        ratio = coarse / fine
        if abs(ratio - round(ratio)) > NEST_TOL * ratio or round(ratio) < 2:
            raise ArgumentError(f"steps are not nested: {coarse:g} / {fine:g} = {ratio:.6g} is not an integer >= 2")
    return ordered


def dyadic_steps(coarsest_exponent: int, finest_exponent: int) -> tuple[float, ...]:
    """2^-coarsest, ..., 2^-finest."""
    if finest_exponent < coarsest_exponent:
        raise ArgumentError("finest exponent must be >= coarsest exponent")
    return tuple(2.0 ** -k for k in range(coarsest_exponent, finest_exponent + 1))


def fit_rate(hs: Sequence[float], errs: Sequence[float], exact_tol: float = 0.0) -> RateFit:
    """
    Slope of log err against log h.

    Errors at or below ``exact_tol`` mark the method exact and no slope is
    fitted. While r^2 < 0.98 the coarsest point is dropped, at most twice and
    never below three points.

    Args:
        hs: Steps, any order
        errs: Nonnegative errors matching hs
        exact_tol: Errors at or below this mark the method exact

    Returns:
        RateFit with slope, intercept, r^2 and the number of dropped points.

    Raises:
        ArgumentError: With fewer than three points or a negative error.
    """
    h_arr = np.asarray(hs, dtype=float)
    e_arr = np.asarray(errs, dtype=float)
    if len(h_arr) != len(e_arr) or len(h_arr) < 3:
        raise ArgumentError("fit_rate needs at least three (h, err) pairs")
    if np.any(e_arr < 0) or not np.all(np.isfinite(e_arr)):
        raise ArgumentError("errors must be finite and >= 0")
    if np.any(e_arr <= exact_tol):
        return RateFit(slope=math.nan, intercept=math.nan, r2=math.nan, exact=True)

    order = np.argsort(-h_arr)
    h_arr, e_arr = h_arr[order], e_arr[order]
    dropped = 0
    while True:
        x, y = np.log(h_arr[dropped:]), np.log(e_arr[dropped:])
        slope, intercept = np.polyfit(x, y, 1)
        fitted = slope * x + intercept
        total = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum((y - fitted) ** 2)) / total if total > 0 else 1.0
        if r2 >= MIN_R2 or dropped >= MAX_DROPS or len(x) - 1 < 3:
            break
        logger.debug("r2=%.4f below %.2f, dropping h=%g", r2, MIN_R2, h_arr[dropped])
        dropped += 1
    return RateFit(slope=float(slope), intercept=float(intercept), r2=r2, dropped=dropped)


def rate_expectation(triplet: LevyTriplet, diagnostics: Optional[SmallJumpDiagnostics] = None) -> ExpectedRates:
    """Predicted orders of Delta_W and Delta_Z.

    Raises:
        AssumptionCheckError: If kappa(0) = inf and no exponent in (1, 2) is available.
    """
    path_class = classify_paths(triplet.measure)
    if path_class is PathClass.BM_ONLY:
        return ExpectedRates(w=2.0, z=1.0)
    if triplet.measure.kappa_zero_finite:
        return ExpectedRates(w=1.0, z=1.0)
    diagnostics = diagnostics or small_jump_diagnostics(triplet.measure)
    eps = diagnostics.epsilon_estimate
    if eps is None or not diagnostics.assumption_ok:
        raise AssumptionCheckError(
            f"no usable small-jump exponent (fitted {eps}); the rate for kappa(0) = inf needs one in (1, 2)"
        )
    return ExpectedRates(w=2.0 - eps, z=2.0 - eps)


def max_relative_error(values: Sequence[float], reference: Sequence[float]) -> float:
    """max_i |v_i - r_i| / |r_i|."""
    v, r = np.asarray(values, dtype=float), np.asarray(reference, dtype=float)
    if v.shape != r.shape or not len(r):
        raise ArgumentError("values and reference must be nonempty and of equal length")
    if np.any(r == 0):
        raise ArgumentError("reference contains zeros")
    return float(np.max(np.abs(v - r) / np.abs(r)))


def _sweep_point(triplet: LevyTriplet, q: float, K: tuple[float, ...], h: float, oracle: Oracle,
                 compensated: bool) -> tuple[np.ndarray, np.ndarray]:
    table = compute_table(triplet, h, q, max(K), compensated)
    signed_w = np.array([oracle.W(x) - evaluate_W_at(table, x) for x in K])
    if oracle.Z is None:
        signed_z = np.full(len(K), math.nan)
    else:
        signed_z = np.array([oracle.Z(x) - evaluate_Z_at(table, x) for x in K])
    logger.info("sweep %s h=%g errW=%.3e", triplet.label, h, np.max(np.abs(signed_w)))
    return signed_w, signed_z


def error_sweep(triplet: LevyTriplet, q: float, K: Sequence[float] = DEFAULT_K, hs: Sequence[float] = DEFAULT_HS,
                oracle: Optional[Oracle] = None, threads: int = 1, compensated: bool = False,
                expected: Optional[ExpectedRates] = None) -> SweepReport:
    """
    Delta_W^K(h) and Delta_Z^K(h) for each h, plus fitted slopes.

    Steps run on a thread pool; results are collected in step order, so the
    report does not depend on ``threads``.

    Args:
        triplet: Levy triplet
        q: Killing rate
        K: Evaluation points, on every grid
        hs: Nested steps
        oracle: Closed form or fine-grid benchmark
        threads: Worker count
        compensated: Use fsum accumulation in the recursions
        expected: Predicted orders; derived from the triplet when omitted

    Returns:
        SweepReport with signed and max-abs errors per step and the two fits.

    Raises:
        ArgumentError: If the steps are not nested or K is not on every grid.
        OracleResolutionError: If a benchmark oracle is not strictly finer than min(hs).
    """
    ordered = check_nested(hs)
    K = tuple(float(x) for x in K)
    if not K or any(x <= 0 for x in K):
        raise ArgumentError("K must be a nonempty set of positive points")
    for h in ordered:
        for x in K:
            ratio = x / h
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ArgumentError(f"x={x} is not on the grid of step h={h}")
    if oracle is None:
        raise ArgumentError("an oracle is required")
    if oracle.h_bench is not None:
        finest = ordered[-1]
        if not oracle.h_bench < finest:
            raise OracleResolutionError(
                f"benchmark step {oracle.h_bench:g} is not finer than the finest sweep step {finest:g}"
            )
        if finest / oracle.h_bench < BENCHMARK_RATIO * (1 - 1e-9):
            warnings.warn(
                f"benchmark step is only {finest / oracle.h_bench:.3g}x finer than the sweep; "
                f"{BENCHMARK_RATIO}x is recommended",
                ScaleKitWarning,
                stacklevel=2,
            )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda h: _sweep_point(triplet, q, K, h, oracle, compensated), ordered))
    signed_w = np.array([r[0] for r in results])
    signed_z = np.array([r[1] for r in results])
    err_w = np.max(np.abs(signed_w), axis=1)
    err_z = np.max(np.abs(signed_z), axis=1)

    scale_w = max(1.0, max(abs(oracle.W(x)) for x in K))
    fit_w = _safe_fit(ordered, err_w, 1e-12 * scale_w)
    fit_z = _safe_fit(ordered, err_z, 1e-12) if oracle.Z is not None else RateFit(math.nan, math.nan, math.nan)
    if expected is None:
        try:
            expected = rate_expectation(triplet)
        except AssumptionCheckError as exc:
            logger.warning("no rate expectation: %s", exc)
    return SweepReport(
        triplet_id=triplet.label, q=q, K=K, hs=ordered, err_w=err_w, err_z=err_z,
        signed_w=signed_w, signed_z=signed_z, fit_w=fit_w, fit_z=fit_z,
        expected=expected, oracle_name=oracle.name,
    )


def _safe_fit(hs: Sequence[float], errs: np.ndarray, exact_tol: float) -> RateFit:
    if len(hs) < 3 or not np.all(np.isfinite(errs)):
        return RateFit(slope=math.nan, intercept=math.nan, r2=math.nan)
    return fit_rate(hs, errs, exact_tol)


def asymptotic_ratios(report: SweepReport, x: float, order: float, limit: float, quantity: str = "W") -> np.ndarray:
    """
    (Delta(x, h) / h^order) / limit at each step of the report.

    Raises:
        ArgumentError: If x is not one of the report's points.
    """
    matches = [j for j, k in enumerate(report.K) if math.isclose(k, x, rel_tol=1e-12)]
    if not matches:
        raise ArgumentError(f"x={x} is not among the sweep points {report.K}")
    signed = report.signed_w if quantity == "W" else report.signed_z
    column = signed[:, matches[0]]
    return column / np.power(np.asarray(report.hs), order) / limit
