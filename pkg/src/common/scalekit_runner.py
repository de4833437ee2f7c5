"""Command execution behind the CLI: one manifest in, CSV tables out.

Every command computes all of its results before the first file is written,
so a failing run leaves no partial output behind.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from src.common.applications import DeficitDensityRequest, cbi_k, deficit_total_mass, ruin_deficit_density
from src.common.chain_discretizer import build_chain, depth_for, max_admissible_h
from src.common.convergence_lab import Oracle, asymptotic_ratios, error_sweep, max_relative_error, rate_expectation
from src.common.levy_model import DEFAULT_DELTAS, LevyTriplet, small_jump_diagnostics
from src.common.reference_solutions import (
    BmClosedForm,
    SharpnessCase,
    bm_W,
    bm_Z,
    cp_unit_atom_W,
    cp_unit_atom_Z,
    exp_jumps_W,
    sharpness_limit,
    stable_W,
)
from src.common.scale_engine import (
    ScaleTable,
    compute_table,
    evaluate_W_at,
    evaluate_Z_at,
    ide_recursion_W,
    z_from_w,
)
from src.common.scalekit_exceptions import ArgumentError, AssumptionCheckError, ConfigError, InadmissibleStepError
from src.common.scalekit_config import DEFAULT_CANDIDATES, RunConfig, TripletSpec
from src.common.scalekit_utils import output_path, write_csv
from src.common.triplet_presets import lognormal_claim_density

logger = logging.getLogger(__name__)

SCALE_HEADER = ("x", "W_h(x-delta0*h)", "Z_h(x)")
SWEEP_HEADER = ("q", "h", "errW", "errZ")
SWEEP_SUMMARY_HEADER = ("q", "oracle", "slope_W", "r2_W", "slope_Z", "r2_Z", "expected_W", "expected_Z")


@dataclass
class CsvTable:
    suffix: str
    header: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)


@dataclass
class CommandResult:
    """Tables to write plus a short (label, value) summary for the console."""
    command: str
    tables: list[CsvTable]
    summary: list[tuple[str, str]] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)


def _on_grid_points(table: ScaleTable, start: int) -> list[float]:
    return [m * table.h for m in range(start, table.n + 1)]


def _tables_per_q(triplet: LevyTriplet, config: RunConfig, x_max: float, threads: int) -> list[ScaleTable]:
    compensated = config.flags.compensated_summation
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(lambda q: compute_table(triplet, config.h, q, x_max, compensated), config.q))


def _suffix(base: str, config: RunConfig, i: int) -> str:
    return base if len(config.q) == 1 else f"{base}_q{i}"


def run_scale(config: RunConfig, threads: int = 1) -> CommandResult:
    """W_h(x - delta0 h) and Z_h(x) for x = delta0 h, ..., x_max, one table per q."""
    triplet = config.triplet.to_triplet()
    x_max = config.x_max + triplet.delta0 * config.h
    tables = _tables_per_q(triplet, config, x_max, threads)
    result = CommandResult(command="scale", tables=[])
    for i, table in enumerate(tables):
        xs = [x for x in _on_grid_points(table, triplet.delta0) if x <= config.x_max * (1 + 1e-12)]
        rows = [(x, evaluate_W_at(table, x), evaluate_Z_at(table, x)) for x in xs]
        result.tables.append(CsvTable(_suffix("scale", config, i), SCALE_HEADER, rows))
        result.summary.append((f"q={table.q:g}", f"{len(rows)} rows, W(x_max)={rows[-1][1]:.6g}" if rows else "0 rows"))
        if config.flags.cross_check:
            result.summary.extend(_cross_check(triplet, table))
    return result


def _cross_check(triplet: LevyTriplet, table: ScaleTable) -> list[tuple[str, str]]:
    chain = build_chain(triplet, table.h, depth_for(table.n * table.h, table.h))
    ide = ide_recursion_W(chain, table.q, table.n)
    z_alt = z_from_w(table)
    w_gap = max_relative_error(ide, table.W)
    z_gap = max_relative_error(z_alt, table.Z)
    logger.info("cross-check q=%g: W %.3e, Z %.3e", table.q, w_gap, z_gap)
    return [(f"q={table.q:g} W vs rearranged recursion", f"{w_gap:.3e}"),
            (f"q={table.q:g} Z vs summed W", f"{z_gap:.3e}")]


def closed_form_oracle(spec: TripletSpec, triplet: LevyTriplet, q: float) -> Oracle:
    """Closed-form W (and Z) for the triplets that have one.

    Raises:
        ConfigError: If the triplet has no closed form at this q.
    """
    name = spec.preset.name if spec.preset else None
    params = spec.preset.params if spec.preset else {}
    if name == "brownian" or (name is None and triplet.sigma2 > 0 and triplet.measure.is_zero):
        form = BmClosedForm(sigma2=triplet.sigma2, mu=triplet.mu, q=q)
        return Oracle.closed_form(lambda x: bm_W(form, x), lambda x: bm_Z(form, x), name="brownian")
    if name == "unit-atom":
        return Oracle.closed_form(lambda x: cp_unit_atom_W(q, x), lambda x: cp_unit_atom_Z(q, x), name="unit-atom")
    if name == "exp-jumps" and q == 0:
        a, rho = params.get("a", 1.0), params.get("rho", 1.0)
        return Oracle.closed_form(lambda x: exp_jumps_W(a, rho, triplet.mu, x), lambda x: 1.0, name="exp-jumps")
    if name == "stable" and q == 0:
        beta = params.get("beta", 1.5)
        if math.isclose(triplet.mu, 1.0 / (beta - 1.0), rel_tol=1e-12):
            return Oracle.closed_form(lambda x: stable_W(beta, x), lambda x: 1.0, name="stable")
    raise ConfigError(f"no closed form for {triplet.label} at q={q:g}; use a benchmark oracle")


def _sweep_oracle(config: RunConfig, triplet: LevyTriplet, q: float) -> Oracle:
    if config.oracle.kind == "benchmark":
        return Oracle.benchmark(triplet, q, config.K, 2.0 ** -config.oracle.benchmark_exponent)
    return closed_form_oracle(config.triplet, triplet, q)


def run_sweep(config: RunConfig, threads: int = 1) -> CommandResult:
    """Error sweep per q with fitted slopes; optional sharpness ratios."""
    triplet = config.triplet.to_triplet()
    hs = config.sweep.hs()
    sharp = config.oracle.sharpness
    header = SWEEP_HEADER + (("ratio_to_limit",) if sharp else ())
    errors = CsvTable("sweep", header)
    summary = CsvTable("sweep_summary", SWEEP_SUMMARY_HEADER)
    result = CommandResult(command="sweep", tables=[errors, summary])
    try:
        expected = rate_expectation(triplet)
    except AssumptionCheckError as exc:
        logger.warning("no rate expectation: %s", exc)
        expected = None

    for q in config.q:
        oracle = _sweep_oracle(config, triplet, q)
        report = error_sweep(triplet, q, config.K, hs, oracle, threads,
                             config.flags.compensated_summation, expected)
        ratios = None
        if sharp:
            case = SharpnessCase(sharp.case)
            order = 2.0 if case is SharpnessCase.BM_W else 1.0
            limit = sharpness_limit(case, q, sharp.x, sigma2=triplet.sigma2 or 1.0, mu=triplet.mu)
            quantity = "W" if case in (SharpnessCase.BM_W, SharpnessCase.CP_W) else "Z"
            ratios = asymptotic_ratios(report, sharp.x, order, limit, quantity) if limit else None
        for i, h in enumerate(report.hs):
            row = (q, h, report.err_w[i], report.err_z[i])
            if sharp:
                row += (ratios[i] if ratios is not None else math.nan,)
            errors.rows.append(row)
        exp_w = report.expected.w if report.expected else math.nan
        exp_z = report.expected.z if report.expected else math.nan
        summary.rows.append((q, report.oracle_name, report.fit_w.slope, report.fit_w.r2,
                             report.fit_z.slope, report.fit_z.r2, exp_w, exp_z))
        slope = "exact" if report.fit_w.exact else f"{report.fit_w.slope:.4f}"
        result.summary.append((f"q={q:g} slope W", slope))
        if not math.isnan(report.fit_z.slope):
            result.summary.append((f"q={q:g} slope Z", f"{report.fit_z.slope:.4f}"))
    return result


def _claim_density(config: RunConfig) -> Callable[[float], float]:
    if config.ruin.claims == "lognormal":
        return lognormal_claim_density
    rate = config.ruin.claim_rate
    return lambda y: rate * math.exp(-rate * y) if y > 0 else 0.0


def run_ruin(config: RunConfig, threads: int = 1) -> CommandResult:
    """Deficit-at-ruin density on the manifest's y grid, one column set per q."""
    triplet = config.triplet.to_triplet()
    spec = config.ruin
    tables = _tables_per_q(triplet, config, spec.a, threads)
    request = DeficitDensityRequest(x=spec.x, a=spec.a, y_grid=tuple(spec.y_grid), claim_density=_claim_density(config))
    table = CsvTable("ruin", ("q", "y", "k_h(y)"))
    result = CommandResult(command="ruin", tables=[table])
    for scale in tables:
        densities = ruin_deficit_density(scale, request)
        table.rows.extend((scale.q, y, densities[y]) for y in spec.y_grid)
        result.summary.append((f"q={scale.q:g} deficit mass on grid", f"{deficit_total_mass(densities):.6g}"))
    return result


def run_cbi(config: RunConfig, threads: int = 1) -> CommandResult:
    """Levy density k_h of the CBI limit law at the manifest's points."""
    triplet = config.triplet.to_triplet()
    spec = config.cbi
    tables = _tables_per_q(triplet, config, max(spec.xs), threads)
    immigration = spec.immigration()
    table = CsvTable("cbi", ("q", "x", "k_h(x)"))
    result = CommandResult(command="cbi", tables=[table])
    for scale in tables:
        values = cbi_k(scale, spec.b, immigration, spec.xs)
        table.rows.extend((scale.q, x, values[x]) for x in spec.xs)
        result.summary.append((f"q={scale.q:g} points", str(len(spec.xs))))
    return result


def run_diagnose(config: RunConfig, threads: int = 1) -> CommandResult:
    """Small-jump functionals, exponent fit, largest admissible step and expected rates."""
    triplet = config.triplet.to_triplet()
    spec = config.diagnose
    deltas = tuple(spec.deltas) if spec and spec.deltas else DEFAULT_DELTAS
    candidates = tuple(spec.candidates) if spec else DEFAULT_CANDIDATES
    diag = small_jump_diagnostics(triplet.measure, deltas)
    functionals = CsvTable("diagnose", ("delta", "kappa", "xi", "zeta", "gamma"))
    functionals.rows = list(zip(diag.deltas, diag.kappa, diag.xi, diag.zeta, diag.gamma_small))

    try:
        h_max = max_admissible_h(triplet, candidates)
    except InadmissibleStepError as exc:
        logger.warning("%s", exc)
        h_max = math.nan
    try:
        expected = rate_expectation(triplet, diag)
        rates = (expected.w, expected.z)
    except AssumptionCheckError as exc:
        logger.warning("%s", exc)
        rates = (math.nan, math.nan)

    eps = diag.epsilon_estimate if diag.epsilon_estimate is not None else math.nan
    report = CsvTable("diagnose_summary", ("key", "value"))
    report.rows = [
        ("path_class", diag.path_class.value),
        ("kappa_zero_finite", str(diag.kappa_zero_finite).lower()),
        ("delta0", triplet.delta0),
        ("epsilon", eps),
        ("assumption_ok", str(diag.assumption_ok).lower()),
        ("max_admissible_h", h_max),
        ("expected_rate_W", rates[0]),
        ("expected_rate_Z", rates[1]),
    ]
    summary = [(key, value if isinstance(value, str) else f"{value:g}") for key, value in report.rows]
    return CommandResult(command="diagnose", tables=[functionals, report], summary=summary)


COMMANDS: dict[str, Callable[[RunConfig, int], CommandResult]] = {
    "scale": run_scale,
    "sweep": run_sweep,
    "ruin": run_ruin,
    "cbi": run_cbi,
    "diagnose": run_diagnose,
}


def run(config: RunConfig, out_prefix: str, threads: int = 1, command: Optional[str] = None) -> CommandResult:
    """
    Run ``command`` (default: the manifest's) and write its CSV files under ``out_prefix``.

    Args:
        config: Validated manifest
        out_prefix: Output prefix; see output_path
        threads: Worker count for sweeps and multi-q tables
        command: Command to run instead of the manifest's own

    Returns:
        CommandResult with the summary rows and the files written.

    Raises:
        ArgumentError: If ``command`` differs from the manifest's and the manifest lacks its sections.
        ScaleKitError: Whatever the command raises; no file is written in that case.
    """
    name = command or config.command
    if name != config.command:
        try:
            config = RunConfig.model_validate({**config.model_dump(), "command": name})
        except ValueError as exc:
            raise ArgumentError(f"manifest cannot run '{name}': {exc}") from exc
    result = COMMANDS[name](config, threads)
    for table in result.tables:
        result.files.append(write_csv(output_path(out_prefix, table.suffix), table.header, table.rows))
    logger.info("%s wrote %d file(s)", name, len(result.files))
    return result
