"""One runner per command: config in, ResultTable out."""
from __future__ import annotations

import logging
import math
from contextlib import contextmanager
from typing import Callable, Dict, Iterator, Optional

import numpy as np

from pathmeasure.core.errors import DomainError
from pathmeasure.core.expressions import body_cylinder, parse_body
from pathmeasure.core.feynman import feynman_cross_check, feynman_integral
from pathmeasure.core.kernels import heat_kernel_for, make_space, spectral_drift, total_mass
from pathmeasure.core.model import (
    Command,
    ConfigSpace,
    ExperimentConfig,
    PerturbationSeriesSpec,
    PinnedMeasureSpec,
    PowerPotential,
    RadialParams,
    RegularizationSchedule,
    ResultTable,
)
from pathmeasure.core.radial.bessel import check_recurrences
from pathmeasure.core.radial.propagator import (
    damped_k_integral,
    p_closed_form,
    propagator_lambda_integral,
    q_function,
)
from pathmeasure.core.radial.series import perturbation_series
from pathmeasure.core.settings import setting_or

logger = logging.getLogger(__name__)

RECURRENCE_TOLERANCE = 1e-9
K_INTEGRAL_TOLERANCE = 1e-4
BOUND_VIOLATION = "exceeds its declared bound"


@contextmanager
def attributed(config: ExperimentConfig, key: str, match: Optional[str] = None) -> Iterator[None]:
    """Re-raise bare DomainErrors as coming from `key` of the config.

    With `match`, only errors whose message contains it are re-keyed.
    """
    try:
        yield
    except DomainError as e:
        if e.key is not None or (match is not None and match not in e.message):
            raise
        raise DomainError(e.message, key=key, line=config.source_lines.get(key)) from e


def build_space(config: ExperimentConfig) -> ConfigSpace:
    return make_space(config.space, config.length, config.a, config.b, config.boundary,
                      config.cutoff, config.nodes)


def _schedule(config: ExperimentConfig) -> RegularizationSchedule:
    return RegularizationSchedule(config.eps0, config.ratio, config.steps)


# ---- wiener ----

def run_wiener(config: ExperimentConfig) -> ResultTable:
    space = build_space(config)
    terms = setting_or(config.spectral_terms, "spectral_terms")
    f = body_cylinder(config.body, config.times, config.bound)

    kernels = {m: heat_kernel_for(space, m) for m in (terms, 2 * terms)}

    with attributed(config, "bound", match=BOUND_VIOLATION):
        drift = spectral_drift(kernels.__getitem__, terms, config.start_point, f,
                               config.start_time, config.horizon)

    table = ResultTable(f"wiener {space.kind.value}", ["spectral_terms", "re", "im", "mass"])
    for m, value in ((terms, drift.value), (2 * terms, drift.refined)):
        spec = PinnedMeasureSpec(kernels[m], config.start_point, config.start_time, config.horizon)
        mass = total_mass(spec, config.times).real
        table.add_row(m, value.real, value.imag, mass)

    kernel = kernels[terms]
    table.summary.update({
        "kernel": kernel.label,
        "positivity_verified": kernel.positivity_flag,
        "integral": drift.value,
        "spectral_drift": drift.drift,
        "drift_flagged": drift.flagged,
    })
    return table


# ---- feynman ----

def run_feynman(config: ExperimentConfig) -> ResultTable:
    space = build_space(config)
    schedule = _schedule(config)
    body = parse_body(config.body, len(config.times), config.bound)
    kwargs = dict(tolerance=config.tolerance, start_time=config.start_time, bound=config.bound,
                  spectral_terms=config.spectral_terms, horizon=config.horizon, workers=config.workers)

    with attributed(config, "bound", match=BOUND_VIOLATION):
        if config.eps0_alt is not None or config.ratio_alt is not None:
            alternate = RegularizationSchedule(config.eps0_alt or config.eps0,
                                               config.ratio_alt or config.ratio, config.steps)
            check = feynman_cross_check(space, schedule, alternate, config.times, body,
                                        config.start_point, **kwargs)
            report = check.primary
        else:
            check = None
            report = feynman_integral(space, schedule, config.times, body, config.start_point, **kwargs)

    table = ResultTable(f"feynman {space.kind.value}", ["k", "eps", "re", "im", "cauchy_gap"],
                        converged=report.converged)
    gaps = (math.nan,) + report.cauchy_gaps
    for k, (eps, value, gap) in enumerate(zip(report.epsilons, report.values, gaps)):
        table.add_row(k, eps, value.real, value.imag, gap)

    table.summary.update({
        "limit_estimate": report.limit_estimate,
        "converged": report.converged,
        "converged_at": report.converged_at,
        "tolerance": report.tolerance,
        "observed_order": report.observed_order,
        "richardson_depth": report.richardson_depth,
        "final_gap": report.cauchy_gaps[-1],
    })
    if check is not None:
        table.summary["alternate_limit"] = check.alternate.limit_estimate
        table.summary["schedule_distance"] = check.distance
    return table


# ---- bessel-check ----

def run_bessel_check(config: ExperimentConfig) -> ResultTable:
    grid = np.linspace(config.grid_min, config.grid_max, config.grid_points + 1)[1:]
    table = ResultTable("bessel recurrences",
                        ["order", "derivative_residual", "three_term_residual", "finite_difference_residual"])
    worst = 0.0
    for order in config.orders:
        with attributed(config, "orders"):
            residuals = check_recurrences(order, grid)
        table.add_row(order, residuals.derivative_identity, residuals.three_term, residuals.finite_difference)
        worst = max(worst, residuals.derivative_identity, residuals.three_term)

    table.summary.update({
        "grid": f"({config.grid_min:g}, {config.grid_max:g}] with {config.grid_points} points",
        "max_recurrence_residual": worst,
        "within_tolerance": worst <= RECURRENCE_TOLERANCE,
    })
    return table


# ---- propagator ----

def k_integral_agreement(config: ExperimentConfig, params: RadialParams) -> float:
    """Largest relative error of the damped k-integral against p over the (t, lambda) grid."""
    worst = 0.0
    for t in config.t_grid or (config.t,):
        for lam in config.lambda_grid or (config.lam,):
            closed = p_closed_form(config.r, t, lam, params)
            numeric = damped_k_integral(config.r, t, lam, params).limit
            error = abs(numeric - closed) / abs(closed)
            logger.debug("k-integral t=%g lambda=%g: relative error %.3e", t, lam, error)
            worst = max(worst, error)
    return worst


def run_propagator(config: ExperimentConfig) -> ResultTable:
    params = RadialParams(config.n, config.nu)
    columns = ["pv_cut", "closed_re", "closed_im", "pv_re", "pv_im", "discrepancy",
               "conj_pv_re", "conj_pv_im", "conj_discrepancy"]
    table = ResultTable("propagator", columns)

    discrepancies = []
    for j in range(config.pv_halvings + 1):
        cut = config.pv_cut * 0.5 ** j
        result = propagator_lambda_integral(config.r, config.s, config.t, config.u, params, cut)
        table.add_row(cut, result.closed_form.real, result.closed_form.imag,
                      result.principal_value.real, result.principal_value.imag, result.discrepancy,
                      result.conjugate_principal_value.real, result.conjugate_principal_value.imag,
                      result.conjugate_discrepancy)
        discrepancies.append(result.discrepancy)

    finite = [d for d in discrepancies if math.isfinite(d) and d > 0.0]
    spread = max(finite) / min(finite) - 1.0 if finite else 0.0
    agreement = k_integral_agreement(config, params)
    q_over_p = q_function(config.r, config.t, params) / p_closed_form(config.r, config.t, 0.0, params)
    table.summary.update({
        "order": params.order,
        "closed_form": result.closed_form,
        "discrepancy_spread": spread,
        "discrepancy_stable": spread <= 0.2,
        "k_integral_max_relative_error": agreement,
        "k_integral_within_tolerance": agreement <= K_INTEGRAL_TOLERANCE,
        "q_over_p": q_over_p,
    })
    return table


# ---- series ----

def run_series(config: ExperimentConfig) -> ResultTable:
    spec = PerturbationSeriesSpec(RadialParams(config.n, config.nu),
                                  PowerPotential(config.exponent, config.tail_cutoff),
                                  config.t, tuple(config.series_times), config.u, config.r, config.s)
    result = perturbation_series(spec, config.k_max)

    table = ResultTable("perturbation series", ["k", "re", "im", "abs", "weight"])
    weights = (math.nan,) + result.weights
    for k, (value, weight) in enumerate(zip(result.partial_sums, weights)):
        table.add_row(k, value.real, value.imag, abs(value), weight)

    moduli = [abs(v) for v in result.partial_sums]
    table.summary.update({
        "head": result.head,
        "final_sum": result.partial_sums[-1],
        "monotone_modulus": all(b >= a for a, b in zip(moduli, moduli[1:])),
        "tail_flags": list(result.tail_flags),
    })
    return table


RUNNERS: Dict[Command, Callable[[ExperimentConfig], ResultTable]] = {
    Command.WIENER: run_wiener,
    Command.FEYNMAN: run_feynman,
    Command.BESSEL_CHECK: run_bessel_check,
    Command.PROPAGATOR: run_propagator,
    Command.SERIES: run_series,
}


def run_experiment(config: ExperimentConfig) -> ResultTable:
    logger.info("running %s", config.command.value)
    table = RUNNERS[config.command](config)
    logger.info("%s: %d rows", table.title, len(table.rows))
    return table
