"""Quadrature on the configuration spaces, their powers and the half-line.

Two base rules: composite Gauss-Legendre on intervals and the periodic
trapezoid rule on the circle. Tensor integrals contract one axis at a
time, last axis first, with the same weighted sum `integrate_1d` uses, so
a tensor integral and the matching nested 1-D integrals add up in the
same order.
"""
from __future__ import annotations

import logging
import math
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy import special

from pathmeasure.core.errors import DomainError, NumericalError
from pathmeasure.core.model import (
    DampedLimit,
    DampedResult,
    QuadratureRule,
    RegularizationSchedule,
    RuleKind,
    TensorRule,
)
from pathmeasure.core.settings import get_setting, setting_or

logger = logging.getLogger(__name__)

# bound on how much the Richardson table may amplify noise in its inputs
MAX_RICHARDSON_GAIN = 1.0e3


# ---- rules ----

def gauss_legendre_composite(a: float, b: float, panels: int, points: int,
                             grade_left: int = 0) -> QuadratureRule:
    """`panels` equal panels of `points` Gauss nodes each on [a, b].

    With `grade_left` > 0 the first panel is split dyadically towards `a`
    that many times, for integrands with an endpoint singularity at `a`.
    """
    if not b > a:
        raise DomainError("empty integration interval")
    if panels < 1 or points < 1:
        raise DomainError("rule needs at least one panel and one point")

    edges = np.linspace(a, b, panels + 1)
    if grade_left > 0:
        first = edges[1] - a
        graded = a + first * 0.5 ** np.arange(grade_left, 0, -1)
        edges = np.concatenate(([a], graded, edges[1:]))

    x, w = special.roots_legendre(points)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureRule(RuleKind.GAUSS_LEGENDRE_COMPOSITE, nodes, weights, (a, b), points)


def trapezoid_periodic(a: float, b: float, nodes: int) -> QuadratureRule:
    if not b > a:
        raise DomainError("empty integration interval")
    if nodes < 1:
        raise DomainError("rule needs at least one node")
    h = (b - a) / nodes
    x = a + h * np.arange(nodes)
    return QuadratureRule(RuleKind.TRAPEZOID_PERIODIC, x, np.full(nodes, h), (a, b), 1)


def tensor_rule(factors: Sequence[QuadratureRule], max_nodes: Optional[int] = None) -> TensorRule:
    rule = TensorRule(tuple(factors))
    limit = setting_or(max_nodes, "max_tensor_nodes")
    if rule.node_count > limit:
        raise NumericalError("tensor grid too large", node=rule.shape)
    return rule


def oscillatory_rule(a: float, b: float, chirp: float = 0.0, frequency: float = 0.0,
                     points: Optional[int] = None, grade_left: int = 0) -> QuadratureRule:
    """Composite Gauss rule fine enough for a phase chirp*k^2 + frequency*k.

    Panels are sized so each spans at most `panel_phase` radians at the
    fastest point of the interval.
    """
    points = setting_or(points, "gauss_points")
    panel_phase = get_setting("panel_phase")
    rate = 2.0 * abs(chirp) * max(abs(a), abs(b)) + abs(frequency) + 1.0
    panels = max(1, math.ceil((b - a) * rate / panel_phase))
    return gauss_legendre_composite(a, b, panels, points, grade_left)


# ---- integration ----

def _weighted_sum(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return (values * weights).sum(axis=-1)


def _check_finite(values: np.ndarray, grids: Sequence[np.ndarray]) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        index = np.unravel_index(int(np.argmax(bad)), values.shape)
        node = tuple(float(np.ravel(g)[i]) for g, i in zip(grids, index))
        raise NumericalError("non-finite integrand", node=node if len(node) > 1 else node[0])


def integrate_1d(f: Callable[[np.ndarray], Any], rule: QuadratureRule) -> complex:
    values = np.broadcast_to(np.asarray(f(rule.nodes)), rule.nodes.shape)
    _check_finite(values, [rule.nodes])
    return complex(_weighted_sum(values, rule.weights))


def integrate_grid(values: Any, rule: TensorRule) -> complex:
    """Integrate integrand values already sampled on the tensor grid."""
    values = np.broadcast_to(np.asarray(values), rule.shape)
    _check_finite(values, [r.nodes for r in rule.factors])
    for factor in reversed(rule.factors):
        values = _weighted_sum(values, factor.weights)
    return complex(values)


def integrate_nd(f: Callable[..., Any], rule: TensorRule) -> complex:
    return integrate_grid(f(*rule.open_grids()), rule)


def damped_cutoff(damping: float, tail: Optional[float] = None) -> float:
    """Where exp(-damping k^2) falls below `tail`."""
    if not damping > 0.0:
        raise DomainError("damping must be positive to choose a cutoff")
    tail = setting_or(tail, "tail_threshold")
    if not 0.0 < tail < 1.0:
        raise DomainError("tail threshold must lie in (0, 1)")
    return math.sqrt(-math.log(tail) / damping)


def integrate_halfline_damped(f: Callable[[np.ndarray], Any], damping: float, cutoff: float,
                              rule: QuadratureRule,
                              tail_tolerance: Optional[float] = None) -> DampedResult:
    """Integrate f(k) exp(-damping k^2) over (0, cutoff).

    The magnitude of the last panel's contribution is returned as the tail
    estimate; above `tail_tolerance` the result is flagged, not rejected.
    """
    if damping < 0.0:
        raise DomainError("damping must be nonnegative")
    lo, hi = rule.domain
    if lo != 0.0 or not math.isclose(hi, cutoff):
        raise DomainError("rule must cover (0, cutoff)")

    k = rule.nodes
    values = np.broadcast_to(np.asarray(f(k)), k.shape) * np.exp(-damping * k * k)
    _check_finite(values, [k])
    weighted = values * rule.weights
    tail = float(abs(weighted[-rule.panel_size:].sum()))
    flagged = tail_tolerance is not None and tail > tail_tolerance
    if flagged:
        logger.warning("half-line tail %.3e above tolerance %.3e (damping %g, cutoff %g)",
                       tail, tail_tolerance, damping, cutoff)
    return DampedResult(complex(weighted.sum()), tail, flagged)


def damped_limit(f: Callable[[np.ndarray], Any], schedule: RegularizationSchedule,
                 chirp: float = 0.0, frequency: float = 0.0, grade_left: int = 0) -> DampedLimit:
    """Damped half-line integrals along `schedule`, extrapolated to zero damping.

    The damped value is analytic in the damping, so the Richardson table
    assumes an expansion in integer powers of it.
    """
    dampings = schedule.epsilons()
    values = []
    max_tail = 0.0
    for damping in dampings:
        cutoff = damped_cutoff(float(damping))
        rule = oscillatory_rule(0.0, cutoff, chirp, frequency, grade_left=grade_left)
        result = integrate_halfline_damped(f, float(damping), cutoff, rule)
        logger.debug("damping %.4e cutoff %.2f nodes %d -> %r", damping, cutoff, rule.size, result.value)
        values.append(result.value)
        max_tail = max(max_tail, result.tail_estimate)
    step_ratio = 1.0 / schedule.ratio
    depth = richardson_depth(len(values), 1, step_ratio)
    limit = richardson_extrapolate(values, order=1, step_ratio=step_ratio, depth=depth)
    return DampedLimit(tuple(float(d) for d in dampings), tuple(values), limit, max_tail)


def richardson_depth(n: int, order: int = 1, step_ratio: float = 2.0,
                     max_gain: float = MAX_RICHARDSON_GAIN) -> int:
    """Columns of the Richardson table worth building on `n` values.

    Column j can multiply noise in the values by (f + 1) / (f - 1) with
    f = step_ratio**(order*j). Columns are added while the running product
    stays under `max_gain`; the first one always is.
    """
    gain = 1.0
    for j in range(1, n):
        factor = step_ratio ** (order * j)
        gain *= (factor + 1.0) / (factor - 1.0)
        if j > 1 and gain > max_gain:
            return j - 1
    return max(1, n - 1)


def richardson_extrapolate(values: Sequence[complex], order: int = 1, step_ratio: float = 2.0,
                           depth: Optional[int] = None) -> complex:
    """Richardson table on approximations whose step shrinks by `step_ratio`.

    Assumes an error expansion in powers order, 2*order, ..., depth*order
    of the step; the full table when `depth` is None.
    """
    n = len(values)
    if n < 2:
        raise ValueError("richardson_extrapolate requires at least two values")
    depth = n - 1 if depth is None else min(depth, n - 1)
    if depth < 1:
        raise ValueError("richardson depth must be at least 1")

    table = [complex(v) for v in values]
    for j in range(1, depth + 1):
        factor = step_ratio ** (order * j)
        for k in range(n - 1, j - 1, -1):
            table[k] = (factor * table[k] - table[k - 1]) / (factor - 1.0)
    return table[-1]
