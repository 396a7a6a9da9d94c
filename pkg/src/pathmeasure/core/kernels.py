"""Pinned product measures from transition kernels, and their cylinder integrals.

Every configuration space has one heat function h(z, x, y) defined for
complex z with Re z > 0. The heat kernels evaluate it at the real time gap
z = u - t; the regularized Schrodinger kernels (see `feynman`) at
z = eps + i(u - t).
"""
from __future__ import annotations

import logging
import math
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from pathmeasure.core.cylinder import canonicalize_times, check_bound, constant_cylinder
from pathmeasure.core.errors import DomainError
from pathmeasure.core.model import (
    Boundary,
    ConfigSpace,
    CylinderFunction,
    PinnedMeasureSpec,
    SpaceKind,
    SpectralDrift,
    TransitionKernel,
)
from pathmeasure.core.quadrature import gauss_legendre_composite, integrate_grid, tensor_rule, trapezoid_periodic
from pathmeasure.core.settings import get_setting, setting_or

logger = logging.getLogger(__name__)

# exp(-POSITIVITY_DECAY) bounds the dropped spectral tail at the smallest
# gap on which positivity is verified
POSITIVITY_DECAY = 32.3


# ---- spaces ----

def circle_space(length: float = 1.0, nodes: Optional[int] = None) -> ConfigSpace:
    if not length > 0.0:
        raise DomainError("circumference must be positive")
    rule = trapezoid_periodic(0.0, length, setting_or(nodes, "nodes_per_axis"))
    return ConfigSpace(SpaceKind.CIRCLE, 0.0, length, rule)


def _gauss_for(a: float, b: float, nodes: Optional[int], points: Optional[int]):
    nodes = setting_or(nodes, "nodes_per_axis")
    points = setting_or(points, "space_gauss_points")
    if nodes < 1 or points < 1:
        raise DomainError("rule needs at least one node")
    points = min(points, nodes)
    return gauss_legendre_composite(a, b, max(1, nodes // points), points)


def interval_space(a: float, b: float, boundary: Boundary = Boundary.NEUMANN,
                   nodes: Optional[int] = None, points: Optional[int] = None) -> ConfigSpace:
    if not a < b:
        raise DomainError("interval needs a < b")
    return ConfigSpace(SpaceKind.INTERVAL, a, b, _gauss_for(a, b, nodes, points), boundary)


def halfline_space(cutoff: float, boundary: Boundary = Boundary.DIRICHLET,
                   nodes: Optional[int] = None, points: Optional[int] = None) -> ConfigSpace:
    if not cutoff > 0.0:
        raise DomainError("half-line cutoff must be positive")
    return ConfigSpace(SpaceKind.HALFLINE, 0.0, cutoff, _gauss_for(0.0, cutoff, nodes, points), boundary)


def make_space(kind: SpaceKind, length: float = 1.0, a: float = 0.0, b: float = 1.0,
               boundary: Boundary = Boundary.NEUMANN, cutoff: float = 10.0,
               nodes: Optional[int] = None) -> ConfigSpace:
    """Space of the given kind; only the parameters of that kind are read."""
    if kind is SpaceKind.CIRCLE:
        return circle_space(length, nodes)
    if kind is SpaceKind.INTERVAL:
        return interval_space(a, b, boundary, nodes)
    return halfline_space(cutoff, boundary, nodes)


def space_heat(space: ConfigSpace, z: complex, x: Any, y: Any, spectral_terms: int) -> np.ndarray:
    """Heat function of `space` at (possibly complex) time z."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.arange(1, spectral_terms + 1, dtype=float)
    ell = space.length

    if space.kind is SpaceKind.CIRCLE:
        decay = np.exp(-((2.0 * np.pi * m / ell) ** 2) * z)
        modes = np.cos(2.0 * np.pi * (x - y)[..., None] * m / ell)
        return (1.0 + 2.0 * (modes @ decay)) / ell

    if space.kind is SpaceKind.INTERVAL:
        decay = np.exp(-((np.pi * m / ell) ** 2) * z)
        xs = np.pi * (x - space.lower)[..., None] * m / ell
        ys = np.pi * (y - space.lower)[..., None] * m / ell
        if space.boundary is Boundary.DIRICHLET:
            return 2.0 * ((np.sin(xs) * np.sin(ys)) @ decay) / ell
        return (1.0 + 2.0 * ((np.cos(xs) * np.cos(ys)) @ decay)) / ell

    # half-line: free Gaussian plus its mirror image
    root = np.sqrt(4.0 * np.pi * z)
    direct = np.exp(-((x - y) ** 2) / (4.0 * z))
    image = np.exp(-((x + y) ** 2) / (4.0 * z))
    sign = -1.0 if space.boundary is Boundary.DIRICHLET else 1.0
    return (direct + sign * image) / root


# ---- heat kernels ----

def _spectral_gap_scale(space: ConfigSpace, spectral_terms: int) -> float:
    """Smallest time gap at which the truncated spectral sum is resolved."""
    if space.kind is SpaceKind.CIRCLE:
        top = 2.0 * math.pi * (spectral_terms + 1) / space.length
    elif space.kind is SpaceKind.INTERVAL:
        top = math.pi * (spectral_terms + 1) / space.length
    else:
        return 1e-3 * space.length ** 2
    return POSITIVITY_DECAY / top ** 2


def _verify_positive(space: ConfigSpace, spectral_terms: int, min_gap: float) -> bool:
    slack = get_setting("positivity_slack")
    grid = np.linspace(space.lower, space.upper, 33)
    gaps = np.geomspace(min_gap, max(space.length ** 2, 2.0 * min_gap), 12)
    for gap in gaps:
        values = space_heat(space, float(gap), grid[:, None], grid[None, :], spectral_terms)
        if np.min(values) < -slack:
            return False
    return True


def _heat_kernel(space: ConfigSpace, spectral_terms: int, label: str,
                 min_gap: Optional[float]) -> TransitionKernel:
    if spectral_terms < 1:
        raise DomainError("need at least one spectral term")
    if min_gap is None:
        min_gap = _spectral_gap_scale(space, spectral_terms)
    elif not min_gap > 0.0:
        raise DomainError("positivity check needs a positive smallest gap")
    positive = _verify_positive(space, spectral_terms, min_gap)
    if not positive:
        logger.warning("%s: truncated kernel goes negative on the verification grid", label)

    def evaluate(t: float, u: float, x: Any, y: Any) -> np.ndarray:
        if not u > t:
            raise DomainError("kernel requires t < u")
        values = space_heat(space, u - t, x, y, spectral_terms)
        return np.maximum(values, 0.0) if positive else values

    return TransitionKernel(evaluate, label, positive, space)


def heat_kernel_circle(length: float = 1.0, spectral_terms: Optional[int] = None,
                       nodes: Optional[int] = None, min_gap: Optional[float] = None) -> TransitionKernel:
    spectral_terms = setting_or(spectral_terms, "spectral_terms")
    space = circle_space(length, nodes)
    return _heat_kernel(space, spectral_terms, f"heat(circle L={length:g}, M={spectral_terms})", min_gap)


def heat_kernel_interval(a: float, b: float, boundary: Boundary = Boundary.NEUMANN,
                         spectral_terms: Optional[int] = None, nodes: Optional[int] = None,
                         min_gap: Optional[float] = None) -> TransitionKernel:
    spectral_terms = setting_or(spectral_terms, "spectral_terms")
    space = interval_space(a, b, boundary, nodes)
    label = f"heat(interval [{a:g}, {b:g}] {boundary.value}, M={spectral_terms})"
    return _heat_kernel(space, spectral_terms, label, min_gap)


def heat_kernel_halfline(cutoff: float, boundary: Boundary = Boundary.DIRICHLET,
                         nodes: Optional[int] = None) -> TransitionKernel:
    space = halfline_space(cutoff, boundary, nodes)
    return _heat_kernel(space, 1, f"heat(halfline <{cutoff:g} {boundary.value})", None)


def heat_kernel_for(space: ConfigSpace, spectral_terms: Optional[int] = None) -> TransitionKernel:
    """Heat kernel on an already built space."""
    spectral_terms = setting_or(spectral_terms, "spectral_terms")
    return _heat_kernel(space, spectral_terms, f"heat({space.kind.value}, M={spectral_terms})", None)


# ---- cylinder integrals ----

def chain_factors(kernels: Sequence[TransitionKernel], start_point: float, start_time: float,
                  times: Sequence[float], grids: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Kernel factor of every slot, sampled on the open tensor grids."""
    factors = []
    previous_t, previous_x = start_time, np.asarray(start_point, dtype=float)
    for kernel, t, grid in zip(kernels, times, grids):
        factors.append(np.asarray(kernel(previous_t, t, previous_x, grid)))
        previous_t, previous_x = t, grid
    return factors


def body_on_grid(f: CylinderFunction, collapse_map: Sequence[int], grids: Sequence[np.ndarray]) -> np.ndarray:
    return check_bound(f.body(*(grids[j] for j in collapse_map)), f.bound)


def check_after_pin(spec: PinnedMeasureSpec, times: Sequence[float]) -> None:
    if times[0] <= spec.start_time:
        raise DomainError("time precedes pin")


def integrate_chain(kernels: Sequence[TransitionKernel], spec: PinnedMeasureSpec,
                    f: CylinderFunction) -> complex:
    """Cylinder integral with a possibly different kernel in every slot.

    `kernels` has one entry per distinct time of `f`.
    """
    collapsed = canonicalize_times(f.times, spec.horizon)
    check_after_pin(spec, collapsed.unique_sorted)
    if len(kernels) != collapsed.size:
        raise DomainError("one kernel per distinct time required")

    rule = tensor_rule([k.space.rule for k in kernels])
    grids = rule.open_grids()
    integrand = body_on_grid(f, collapsed.collapse_map, grids)
    for factor in chain_factors(kernels, spec.start_point, spec.start_time, collapsed.unique_sorted, grids):
        integrand = integrand * factor
    return integrate_grid(integrand, rule)


def cylinder_integral(spec: PinnedMeasureSpec, f: CylinderFunction) -> complex:
    """Integral of f against the pinned product measure of `spec.kernel`.

    Duplicate times are collapsed first; the start point is the pinned
    value at the start time.
    """
    slots = len(set(f.times))
    return integrate_chain([spec.kernel] * slots, spec, f)


def total_mass(spec: PinnedMeasureSpec, times: Sequence[float]) -> complex:
    return cylinder_integral(spec, constant_cylinder(times))


def spectral_drift(build: Callable[[int], TransitionKernel], spectral_terms: int, start_point: float,
                   f: CylinderFunction, start_time: float = 0.0, horizon: float = 1.0) -> SpectralDrift:
    """The cylinder integral at M and 2M spectral terms, and their distance."""
    tolerance = get_setting("drift_tolerance")
    value = cylinder_integral(PinnedMeasureSpec(build(spectral_terms), start_point, start_time, horizon), f)
    refined = cylinder_integral(PinnedMeasureSpec(build(2 * spectral_terms), start_point, start_time, horizon), f)
    drift = abs(refined - value)
    flagged = drift > tolerance
    if flagged:
        logger.warning("spectral truncation drift %.3e exceeds %.1e at M=%d", drift, tolerance, spectral_terms)
    return SpectralDrift(value, refined, drift, flagged)


def chapman_kolmogorov_error(kernel: TransitionKernel, s: float, t: float, points: int = 16,
                             start: float = 0.0) -> float:
    """max |∫K(start,s,x,y)K(s,t,y,z)dy - K(start,t,x,z)| over an (x, z) grid."""
    space = kernel.space
    rule = space.rule
    grid = np.linspace(space.lower, space.upper, points, endpoint=space.kind is not SpaceKind.CIRCLE)
    x = grid[:, None, None]
    y = rule.nodes[None, :, None]
    z = grid[None, None, :]
    inner = np.asarray(kernel(start, s, x, y)) * np.asarray(kernel(s, t, y, z))
    left = np.einsum("xyz,y->xz", inner, rule.weights)
    right = np.asarray(kernel(start, t, grid[:, None], grid[None, :]))
    return float(np.max(np.abs(left - right)))
