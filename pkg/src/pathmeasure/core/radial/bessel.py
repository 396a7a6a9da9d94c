"""Bessel functions of the first kind, real order, real nonnegative argument.

Power series below a crossover argument, Hankel's asymptotic expansion
above it. Both branches come with their own analytic derivative so the
recurrences can be checked without using them to compute anything.
"""
from __future__ import annotations

import logging
import math
from typing import Any, Sequence, Tuple

import numpy as np
from scipy import special

from pathmeasure.core.errors import DomainError
from pathmeasure.core.model import RecurrenceResiduals

logger = logging.getLogger(__name__)

SERIES_CROSSOVER = 12.0
SERIES_MAX_TERMS = 300
ASYMPTOTIC_MAX_TERMS = 80
FD_STEP = 1e-4


def _check_args(order: float, x: np.ndarray) -> None:
    if order < 0.0:
        raise DomainError("bessel order must be nonnegative")
    if np.any(x < 0.0):
        raise DomainError("bessel_j needs x >= 0")


def _crossover(order: float) -> float:
    return max(SERIES_CROSSOVER, 2.0 * order)


def _series(order: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Series value and derivative; the derivative is meaningful for x > 0."""
    half = 0.5 * x
    term = np.power(half, order) / special.gamma(order + 1.0)
    value = term.copy()
    # d/dx of (x/2)^(2m+o) is (2m+o)/x times it
    slope = order * term
    quarter = half * half
    for m in range(1, SERIES_MAX_TERMS):
        term = -term * quarter / (m * (m + order))
        value = value + term
        slope = slope + (2 * m + order) * term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(value), 1e-300)) and m > np.max(half, initial=0.0):
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        derivative = np.where(x > 0.0, slope / np.where(x > 0.0, x, 1.0), _derivative_at_zero(order))
    return value, derivative


def _derivative_at_zero(order: float) -> float:
    if order == 1.0:
        return 0.5
    if order == 0.0 or order > 1.0:
        return 0.0
    return math.inf


def _asymptotic(order: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Hankel expansion J = sqrt(2/(pi x)) (P cos chi - Q sin chi).

    Terms are added while they shrink (or before the turning index where
    they start shrinking); the series is truncated at its smallest term.
    """
    mu = 4.0 * order * order
    turn = 0.5 * (math.sqrt(mu) + 1.0)
    c = np.ones_like(x)
    p, q = np.ones_like(x), np.zeros_like(x)
    dp, dq = np.zeros_like(x), np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, ASYMPTOTIC_MAX_TERMS):
        nxt = c * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if k > turn:
            active &= np.abs(nxt) <= np.abs(c)
        if not np.any(active):
            break
        c = np.where(active, nxt, c)
        add = np.where(active, nxt, 0.0)
        # d c_k / dx = -k c_k / x
        dadd = -k * add / x
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p, dp = p + sign * add, dp + sign * dadd
        else:
            q, dq = q + sign * add, dq + sign * dadd
        if np.all(np.abs(add) < 1e-18):
            break

    chi = x - (0.5 * order + 0.25) * math.pi
    amp = np.sqrt(2.0 / (math.pi * x))
    cos, sin = np.cos(chi), np.sin(chi)
    value = amp * (p * cos - q * sin)
    derivative = amp * ((dp - q) * cos - (p + dq) * sin) - value / (2.0 * x)
    return value, derivative


def _evaluate(order: float, x: np.ndarray, use_series: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    value = np.empty_like(x)
    derivative = np.empty_like(x)
    if np.any(use_series):
        value[use_series], derivative[use_series] = _series(order, x[use_series])
    far = ~use_series
    if np.any(far):
        value[far], derivative[far] = _asymptotic(order, x[far])
    return value, derivative


def _unwrap(x_in: Any, out: np.ndarray) -> Any:
    return float(out) if np.ndim(x_in) == 0 else out


def bessel_j(order: float, x: Any) -> Any:
    """J_order(x); scalar in, float out, array in, array out."""
    xs = np.asarray(x, dtype=float)
    _check_args(order, xs)
    flat = np.atleast_1d(xs)
    value, _ = _evaluate(order, flat, flat < _crossover(order))
    return _unwrap(x, value.reshape(xs.shape))


def bessel_j_derivative(order: float, x: Any) -> Any:
    """d/dx J_order(x), differentiated term by term in whichever branch applies."""
    xs = np.asarray(x, dtype=float)
    _check_args(order, xs)
    flat = np.atleast_1d(xs)
    _, derivative = _evaluate(order, flat, flat < _crossover(order))
    return _unwrap(x, derivative.reshape(xs.shape))


def central_difference(order: float, x: Any, step: float = FD_STEP) -> np.ndarray:
    """Central difference of J_order at x, both sides on the branch x itself uses."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= step):
        raise DomainError("finite difference needs x > step")
    branch = xs < _crossover(order)
    upper, _ = _evaluate(order, xs + step, branch)
    lower, _ = _evaluate(order, xs - step, branch)
    return (upper - lower) / (2.0 * step)


def check_recurrences(order: float, grid: Sequence[float]) -> RecurrenceResiduals:
    """Largest residuals of 2J' = J_(o-1) - J_(o+1) and (2o/x)J = J_(o-1) + J_(o+1)."""
    if order < 1.0:
        raise DomainError("recurrence check needs order >= 1")
    x = np.asarray(grid, dtype=float)
    if x.size == 0 or np.any(x <= 0.0):
        raise DomainError("recurrence grid must be positive")

    j = bessel_j(order, x)
    below = bessel_j(order - 1.0, x)
    above = bessel_j(order + 1.0, x)
    slope = bessel_j_derivative(order, x)

    derivative_identity = float(np.max(np.abs(2.0 * slope - below + above)))
    three_term = float(np.max(np.abs(2.0 * order / x * j - below - above)))
    fd_points = x[x > 10.0 * FD_STEP]
    finite_difference = 0.0
    if fd_points.size:
        finite_difference = float(np.max(np.abs(
            bessel_j_derivative(order, fd_points) - central_difference(order, fd_points))))
    logger.debug("order %g: derivative %.2e, three-term %.2e, fd %.2e",
                 order, derivative_identity, three_term, finite_difference)
    return RecurrenceResiduals(order, derivative_identity, three_term, finite_difference)
