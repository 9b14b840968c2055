"""
Pipeline orchestration: rootdata -> gkm -> stable -> connection -> pcurv.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from . import __version__
from .cache import StabCache, cache_roundtrip
from .config import RunConfig
from .connection import ConnectionBuilder, ConnectionOperator, DivisorClass, flatness_check, integrality_check
from .errors import ConfigError, ConventionError
from .exactring import format_value, is_linear_form, parse_poly
from .gkm import GkmModel, build_gkm
from .linalg import Mat, format_matrix
from .pcurv import (
    PASS,
    PROVENANCE,
    SKIPPED,
    CheckResult,
    PCurvMatrix,
    PCurvReport,
    additivity_check,
    charpoly_shift_check,
    check_q0,
    check_t0,
    cross_basis_check,
    discriminant_checks,
    ev_prediction_check,
    failed,
    h_expansion_checks,
    horizontality_check,
    lift_shift_check,
    p_curvature,
    passed,
    resolve_ev_normalization,
    skipped,
    steenrod_output,
)
from .rootdata import RootSystem, build_root_system, optional_weight, parse_root_system
from .stable import MINUS, PLUS, StabBasis, change_basis_inverse, relabel_check, verify_duality, verify_stab_basis

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("roots", "stab", "connection", "pcurv", "steenrod")


@dataclass
class PipelineContext:
    """Everything built from one config before the checks run."""

    config: RunConfig
    system: RootSystem
    model: GkmModel
    plus: StabBasis
    minus: StabBasis
    builder: ConnectionBuilder
    divisor: DivisorClass
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def literal(self) -> bool:
        return self.config.weyl_mode == "literal"


def parse_shift(text: str, model: GkmModel) -> Any:
    """
    A constant shift such as "h" or "l1 + 2*h" as a polynomial.

    Raises:
        ConfigError: If the text is not a t-free linear form
    """
    try:
        shift = parse_poly(text, model.ring)
    except ValueError as e:
        raise ConfigError(f"Cannot parse lift shift '{text}': {e}") from e
    if not is_linear_form(model.ring, shift):
        raise ConfigError(f"Lift shift '{text}' must be a linear form in the lambdas and h")
    return shift


def build_system(config: RunConfig) -> RootSystem:
    return build_root_system(parse_root_system(config.system, config.max_rank))


def build_context(config: RunConfig) -> PipelineContext:
    """
    Build the fixed-point model, both stable bases and the connection builder.

    Raises:
        ConfigError: For invalid systems or divisors
        DegeneracyError: If the prime or chamber is degenerate
    """
    system = build_system(config)
    timings: Dict[str, float] = {}
    start = time.perf_counter()
    model = build_gkm(system, config.prime, config.torus, config.h_sign_value, config.chamber or None)
    cache = StabCache(config.cache_path) if config.cache_path else None
    plus = cache_roundtrip(cache, model, PLUS)
    minus = cache_roundtrip(cache, model, MINUS)
    timings["stable"] = time.perf_counter() - start
    builder = ConnectionBuilder(model, plus, minus, config.truncation, config.weyl_mode, config.nabla_sign_value)
    shift = parse_shift(config.lift_shift, model)
    divisor = DivisorClass(optional_weight(config.divisor, system), shift if shift else None)
    logger.info("Context ready: %s, p = %d, N = %d, torus %s, dim %d", system.spec.name, config.prime, config.truncation, model.lattice.kind, model.dim)
    return PipelineContext(config, system, model, plus, minus, builder, divisor, timings)


class _Runner:
    """Runs enabled checks in order, timing each one."""

    def __init__(self, ctx: PipelineContext, report: PCurvReport):
        self.ctx = ctx
        self.report = report

    def run(self, name: str, fn: Callable[[], CheckResult]) -> Optional[CheckResult]:
        if not self.ctx.config.enabled(name):
            return None
        start = time.perf_counter()
        result = fn()
        elapsed = time.perf_counter() - start
        self.ctx.timings[result.name] = elapsed
        logger.info("%s: %s (%.2fs)", result.name, result.status, elapsed)
        return self.report.add(result)


def _problems(name: str, problems: List[str], hard: bool = True) -> CheckResult:
    if problems:
        more = f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""
        return failed(name, problems[0] + more, hard)
    return passed(name, hard)


def _duality(ctx: PipelineContext) -> CheckResult:
    result = verify_duality(ctx.model, ctx.plus, ctx.minus)
    return _problems("duality", result.failures)


def _stab_axioms(ctx: PipelineContext) -> CheckResult:
    return _problems("stab_axioms", verify_stab_basis(ctx.model, ctx.plus) + verify_stab_basis(ctx.model, ctx.minus))


def _relabel(ctx: PipelineContext) -> CheckResult:
    problems = relabel_check(ctx.model, ctx.plus, ctx.minus)
    if problems is None:
        return skipped("relabel", "chamber is not fixed by -w0")
    return _problems("relabel", problems)


def _weyl_gates(ctx: PipelineContext) -> CheckResult:
    ctx.builder.weyl_operators()
    return _problems("weyl_gates", ctx.builder.gates.failures, hard=not ctx.literal)


def _flatness(ctx: PipelineContext, fundamentals: List[ConnectionOperator]) -> CheckResult:
    if len(fundamentals) < 2:
        return skipped("flatness", "vacuous at rank 1")
    for i in range(len(fundamentals)):
        for j in range(i + 1, len(fundamentals)):
            result = flatness_check(fundamentals[i], fundamentals[j])
            if not result.ok:
                return failed("flatness", f"(varpi_{i + 1}, varpi_{j + 1}): {result.witness}", hard=not ctx.literal)
    return passed("flatness", hard=not ctx.literal)


def _integrality(op: ConnectionOperator) -> CheckResult:
    return _problems("integrality", integrality_check(op).witnesses)


def _lift_shifts(ctx: PipelineContext, pc: PCurvMatrix, runner: _Runner) -> None:
    if not ctx.config.enabled("lift_shift"):
        return
    for text in ctx.config.lift_shift_tests:
        shift = parse_shift(text, ctx.model)
        start = time.perf_counter()
        result = runner.report.add(lift_shift_check(ctx.builder, pc, shift, ctx.config.seed))
        ctx.timings[result.name] = time.perf_counter() - start


def run_checks(ctx: PipelineContext) -> Tuple[PCurvReport, PCurvMatrix, ConnectionOperator]:
    """Run every enabled check against one context."""
    config = ctx.config
    report = PCurvReport()
    runner = _Runner(ctx, report)
    runner.run("duality", lambda: _duality(ctx))
    runner.run("stab_axioms", lambda: _stab_axioms(ctx))
    runner.run("relabel", lambda: _relabel(ctx))
    runner.run("weyl_gates", lambda: _weyl_gates(ctx))

    start = time.perf_counter()
    op = ctx.builder.quantum_mult_matrix(ctx.divisor)
    fundamentals = [ctx.builder.quantum_mult_matrix(d) for d in ctx.builder.fundamental_divisors()]
    ctx.timings["connection"] = time.perf_counter() - start
    runner.run("flatness", lambda: _flatness(ctx, fundamentals))
    runner.run("integrality", lambda: _integrality(op))

    start = time.perf_counter()
    pc = p_curvature(op, config.seed)
    ctx.timings["p_curvature"] = time.perf_counter() - start
    runner.run("check_t0", lambda: check_t0(pc, op))
    runner.run("check_q0", lambda: check_q0(pc, ctx.builder.cup_matrix(ctx.divisor)))
    runner.run("h_expansion", lambda: h_expansion_checks(pc, op))
    runner.run("charpoly_shift", lambda: charpoly_shift_check(pc, config.lambda_slice, config.seed, config.charpoly_hard, config.slice_points))
    runner.run("ev_prediction", lambda: ev_prediction_check(pc, op, resolve_ev_normalization()))
    _lift_shifts(ctx, pc, runner)
    runner.run("discriminant", lambda: discriminant_checks(pc, op, ctx.model, config.discriminant_max_dim, config.seed, config.slice_points))
    runner.run("horizontality", lambda: horizontality_check(pc, fundamentals))
    runner.run("additivity", lambda: additivity_check(ctx.builder, pc, config.seed))
    runner.run("cross_basis", lambda: cross_basis_check(ctx.builder, pc, config.cross_basis_max_dim, config.seed))
    return report, pc, op


def build_report(ctx: PipelineContext, report: PCurvReport, pc: PCurvMatrix, op: ConnectionOperator) -> Dict[str, Any]:
    """The JSON document: config, version, checks and optional matrices."""
    document: Dict[str, Any] = {
        "config": ctx.config.to_dict(),
        "version": __version__,
        "system": ctx.system.spec.name,
        "torus": ctx.model.lattice.kind,
        "dimension": ctx.model.dim,
        "truncation": ctx.config.truncation,
        "provenance": f"Steenrod operation reported as {PROVENANCE}",
        "verdict": 0 if report.ok else 1,
    }
    document.update(report.to_dict())
    if ctx.config.report_matrices:
        document["matrices"] = {
            "stab_plus": format_matrix(stab_matrix(ctx.model, ctx.plus)),
            "stab_minus": format_matrix(stab_matrix(ctx.model, ctx.minus)),
            "B": format_matrix(op.B),
            "F": format_matrix(pc.F),
        }
    return document


def run_verify(config: RunConfig) -> Tuple[Dict[str, Any], int, PipelineContext]:
    """
    Full verification run.

    Returns:
        (report document, verdict 0 or 1, context with timings)

    Raises:
        QSteenrodError: Configuration, degeneracy and hard errors, each with its exit code
    """
    ctx = build_context(config)
    report, pc, op = run_checks(ctx)
    document = build_report(ctx, report, pc, op)
    return document, document["verdict"], ctx


def dump_report(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


# Emission


def stab_matrix(model: GkmModel, basis: StabBasis) -> Mat:
    return Mat(basis.rows, model.ring.zero, model.ring.one, "stable")


def _header(ctx: PipelineContext, what: str) -> List[str]:
    elements = ", ".join(str(w) for w in ctx.model.elements)
    return [f"# {what}", f"# system {ctx.system.spec.name}, p = {ctx.config.prime}, torus {ctx.model.lattice.kind}", f"# order {elements}"]


def _in_basis(ctx: PipelineContext, m: Mat) -> Mat:
    if ctx.config.basis == "fixed-point":
        return change_basis_inverse(ctx.model, m, ctx.plus, ctx.minus)
    return m


def _require_gates(ctx: PipelineContext) -> None:
    duality = verify_duality(ctx.model, ctx.plus, ctx.minus)
    if not duality.ok:
        raise ConventionError(f"Refusing to emit the Steenrod operation: duality fails ({duality.failures[0]})")
    ops = [ctx.builder.quantum_mult_matrix(d) for d in ctx.builder.fundamental_divisors()]
    flat = _flatness(ctx, ops)
    if flat.status not in (PASS, SKIPPED):
        raise ConventionError(f"Refusing to emit the Steenrod operation: connection is not flat ({flat.witness})")


def emit(subcommand: str, config: RunConfig) -> str:
    """
    Canonical text of one pipeline object.

    Args:
        subcommand: roots, stab, connection, pcurv or steenrod
        config: Validated configuration
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"Unknown subcommand: {subcommand}")
    if subcommand == "roots":
        return "\n".join(build_system(config).describe()) + "\n"
    ctx = build_context(config)
    chi = list(ctx.divisor.chi.coords)
    if subcommand == "stab":
        lines = _header(ctx, "Stab+ restrictions, row w, column v")
        lines.append(format_matrix(stab_matrix(ctx.model, ctx.plus)))
        return "\n".join(lines) + "\n"
    op = ctx.builder.quantum_mult_matrix(ctx.divisor)
    if subcommand == "connection":
        lines = _header(ctx, f"quantum multiplication by b = {chi}, N = {config.truncation}, {config.basis} basis")
        lines.append(format_matrix(_in_basis(ctx, op.B)))
        return "\n".join(lines) + "\n"
    pc = p_curvature(op, config.seed)
    if subcommand == "pcurv":
        lines = _header(ctx, f"p-curvature of b = {chi}, N = {config.truncation}, {config.basis} basis")
        lines.append(format_matrix(_in_basis(ctx, pc.F)))
        return "\n".join(lines) + "\n"
    _require_gates(ctx)
    vector = steenrod_output(pc, ctx.model, ctx.plus, ctx.minus, basis=config.basis)
    lines = _header(ctx, f"{vector.label}: Sigma_b(1) for b = {chi}, N = {config.truncation}, {vector.basis} basis")
    labels = [f"Stab+({w})" if vector.basis == "stable" else str(w) for w in ctx.model.elements]
    lines.extend(f"{label}: {format_value(value)}" for label, value in zip(labels, vector.entries))
    return "\n".join(lines) + "\n"
