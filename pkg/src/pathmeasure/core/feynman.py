"""Feynman integrals as limits of cylinder integrals against regularized kernels.

The Schrodinger fundamental solution is approached by heat kernels at
complex time eps + i(u - t); every eps in a `RegularizationSchedule` gives
one complex cylinder integral and the limit is Richardson-extrapolated
assuming first-order convergence in eps.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from pathmeasure.core.complex_measures import complex_cylinder_integral
from pathmeasure.core.errors import DomainError
from pathmeasure.core.kernels import space_heat
from pathmeasure.core.model import (
    ConfigSpace,
    ConvergenceReport,
    CrossCheck,
    CylinderFunction,
    NormCheck,
    PinnedMeasureSpec,
    RegularizationSchedule,
    SpaceKind,
    TransitionKernel,
)
from pathmeasure.core.quadrature import integrate_1d, richardson_depth, richardson_extrapolate
from pathmeasure.core.settings import setting_or

logger = logging.getLogger(__name__)


def schrodinger_kernel_regularized(space: ConfigSpace, eps: float,
                                   spectral_terms: Optional[int] = None) -> TransitionKernel:
    """Heat kernel of `space` continued to complex time eps + i(u - t)."""
    if not eps > 0.0:
        raise DomainError("regularization must be positive")
    spectral_terms = setting_or(spectral_terms, "spectral_terms")

    def evaluate(t: float, u: float, x: Any, y: Any) -> np.ndarray:
        if u < t:
            raise DomainError("kernel requires t <= u")
        return space_heat(space, complex(eps, u - t), x, y, spectral_terms)

    return TransitionKernel(evaluate, f"schrodinger({space.kind.value}, eps={eps:.6g})", False, space)


def modulus_bound(space: ConfigSpace, eps: float, spectral_terms: int) -> float:
    """Sum of the term moduli: a bound on |K_eps| that ignores u - t."""
    if space.kind is not SpaceKind.CIRCLE:
        raise DomainError("modulus bound is only tabulated for the circle")
    m = np.arange(1, spectral_terms + 1)
    return float((1.0 + 2.0 * np.exp(-((2.0 * np.pi * m / space.length) ** 2) * eps).sum()) / space.length)


def observed_order(gaps: Sequence[float], ratio: float) -> float:
    """Convergence order in eps read off the last two Cauchy gaps."""
    if len(gaps) < 2 or gaps[-1] <= 0.0 or gaps[-2] <= 0.0:
        return math.nan
    return math.log(gaps[-2] / gaps[-1]) / math.log(1.0 / ratio)


def _first_settled(gaps: Sequence[float], tolerance: float) -> Optional[int]:
    for k in range(len(gaps) + 1):
        if all(g <= tolerance for g in gaps[k:]):
            return k
    return None


def build_report(epsilons: Sequence[float], values: Sequence[complex], ratio: float,
                 tolerance: float) -> ConvergenceReport:
    gaps = [abs(b - a) for a, b in zip(values, values[1:])]
    # gaps at rounding level count as settled whichever way they wiggle
    noise = 64.0 * np.finfo(float).eps * max((abs(v) for v in values), default=0.0)
    decreasing = len(gaps) < 2 or gaps[-1] <= gaps[-2] or gaps[-1] <= noise
    converged = bool(gaps) and gaps[-1] <= tolerance and decreasing
    # ratios near 1 get a shallower table, bounded noise gain
    depth = richardson_depth(len(values), 1, 1.0 / ratio)
    limit = richardson_extrapolate(values, order=1, step_ratio=1.0 / ratio, depth=depth)
    return ConvergenceReport(
        epsilons=tuple(float(e) for e in epsilons),
        values=tuple(complex(v) for v in values),
        cauchy_gaps=tuple(gaps),
        limit_estimate=limit,
        converged=converged,
        tolerance=tolerance,
        observed_order=observed_order(gaps, ratio),
        converged_at=_first_settled(gaps, tolerance) if converged else None,
        richardson_depth=depth,
    )


def feynman_integral(space: ConfigSpace, schedule: RegularizationSchedule, partition: Sequence[float],
                     body: Callable[..., Any], start: float, tolerance: Optional[float] = None,
                     start_time: float = 0.0, bound: float = 1.0, spectral_terms: Optional[int] = None,
                     horizon: float = 1.0, workers: int = 1) -> ConvergenceReport:
    """Feynman integral of `body` over the slot times `partition`.

    `partition` holds t_1, ..., t_n (after `start_time`); equal times are
    collapsed before integrating. The eps sweep may run on `workers`
    threads; values are ordered by k before gaps are taken.
    """
    tolerance = setting_or(tolerance, "tolerance")
    f = CylinderFunction(tuple(float(t) for t in partition), body, bound)
    epsilons = schedule.epsilons()

    def one(eps: float) -> complex:
        kernel = schrodinger_kernel_regularized(space, float(eps), spectral_terms)
        spec = PinnedMeasureSpec(kernel, start, start_time, horizon)
        return complex_cylinder_integral(kernel, spec, f)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, epsilons))
    else:
        values = [one(eps) for eps in epsilons]

    report = build_report(epsilons, values, schedule.ratio, tolerance)
    logger.info("feynman limit %.12g%+.12gi, final gap %.3e, order %.3f, converged=%s",
                report.limit_estimate.real, report.limit_estimate.imag,
                report.cauchy_gaps[-1], report.observed_order, report.converged)
    if not report.converged:
        logger.warning("schedule exhausted without convergence (tolerance %.1e)", tolerance)
    return report


def feynman_cross_check(space: ConfigSpace, schedule: RegularizationSchedule,
                        alternate: RegularizationSchedule, partition: Sequence[float],
                        body: Callable[..., Any], start: float, **kwargs: Any) -> CrossCheck:
    """The same Feynman integral along two schedules, and how far apart the limits land."""
    primary = feynman_integral(space, schedule, partition, body, start, **kwargs)
    second = feynman_integral(space, alternate, partition, body, start, **kwargs)
    return CrossCheck(primary, second, abs(primary.limit_estimate - second.limit_estimate))


def trigonometric_wave(coefficients: Mapping[int, complex], length: float) -> Callable[[Any], np.ndarray]:
    """psi(x) = sum_m c_m exp(2 pi i m x / L)."""
    items = sorted(coefficients.items())

    def psi(x: Any) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return sum(c * np.exp(2j * np.pi * m * x / length) for m, c in items)

    return psi


def evolve_mode_norm(space: ConfigSpace, schedule: RegularizationSchedule, coefficients: Mapping[int, complex],
                     t: float, start_time: float = 0.0, spectral_terms: Optional[int] = None,
                     horizon: float = 1.0) -> NormCheck:
    """Evolve a trigonometric wavefunction through the Feynman limit at every
    grid point and compare its squared norm before and after."""
    if space.kind is not SpaceKind.CIRCLE:
        raise DomainError("mode evolution needs the circle")
    psi = trigonometric_wave(coefficients, space.length)
    bound = float(sum(abs(c) for c in coefficients.values()))
    rule = space.rule

    evolved = np.array([
        feynman_integral(space, schedule, (t,), psi, float(x0), tolerance=math.inf, start_time=start_time,
                         bound=bound, spectral_terms=spectral_terms, horizon=horizon).limit_estimate
        for x0 in rule.nodes
    ])
    initial = integrate_1d(lambda x: np.abs(psi(x)) ** 2, rule).real
    final = float(np.sum(np.abs(evolved) ** 2 * rule.weights))
    return NormCheck(initial, final, abs(final - initial))
