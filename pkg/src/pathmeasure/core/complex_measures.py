"""Complex kernels split into four nonnegative kernels, and their cylinder integrals.

With several time slots the four-part integral is expanded slot by slot:
the product of (k+ - k- + i(j+ - j-)) over the slots is a signed, phased
sum of 4^n products of nonnegative kernels, each one an ordinary pinned
product measure. For a single slot this is exactly the four-measure
combination m(Re+) - m(Re-) + i(m(Im+) - m(Im-)).
"""
from __future__ import annotations

import itertools
import logging
import math
from typing import Any, Callable, List, Tuple, Union

import numpy as np

from pathmeasure.core.cylinder import canonicalize_times
from pathmeasure.core.errors import NumericalError
from pathmeasure.core.kernels import body_on_grid, chain_factors, check_after_pin, cylinder_integral
from pathmeasure.core.model import CylinderFunction, PinnedMeasureSpec, SignedKernelParts, TransitionKernel
from pathmeasure.core.quadrature import integrate_grid, tensor_rule
from pathmeasure.core.settings import get_setting

logger = logging.getLogger(__name__)


def _part(k: TransitionKernel, pick: Callable[[np.ndarray], np.ndarray], name: str) -> TransitionKernel:
    def evaluate(t: float, u: float, x: Any, y: Any) -> np.ndarray:
        return np.maximum(0.0, pick(np.asarray(k(t, u, x, y))))

    return TransitionKernel(evaluate, f"{name}[{k.label}]", True, k.space)


def decompose_kernel(k: TransitionKernel) -> SignedKernelParts:
    """max{0, ±Re k} and max{0, ±Im k} as four positive kernels."""
    return SignedKernelParts(
        re_plus=_part(k, np.real, "re+"),
        re_minus=_part(k, lambda v: -np.real(v), "re-"),
        im_plus=_part(k, np.imag, "im+"),
        im_minus=_part(k, lambda v: -np.imag(v), "im-"),
    )


def recombine(re_plus: Any, re_minus: Any, im_plus: Any, im_minus: Any) -> np.ndarray:
    """re+ - re- + i(im+ - im-), real and imaginary parts written separately."""
    real = np.asarray(re_plus) - np.asarray(re_minus)
    imag = np.asarray(im_plus) - np.asarray(im_minus)
    out = np.empty(np.broadcast(real, imag).shape, dtype=complex)
    out.real = real
    out.imag = imag
    return out


def reconstruct(parts: SignedKernelParts, t: float, u: float, x: Any, y: Any) -> np.ndarray:
    return recombine(parts.re_plus(t, u, x, y), parts.re_minus(t, u, x, y),
                     parts.im_plus(t, u, x, y), parts.im_minus(t, u, x, y))


def abs_kernel(k: TransitionKernel) -> TransitionKernel:
    """|k| as a positive kernel; bounds the complex integral of any body."""
    def evaluate(t: float, u: float, x: Any, y: Any) -> np.ndarray:
        return np.abs(np.asarray(k(t, u, x, y)))

    return TransitionKernel(evaluate, f"|{k.label}|", True, k.space)


def four_part_integral(parts: SignedKernelParts, spec: PinnedMeasureSpec, f: CylinderFunction) -> complex:
    """The complex cylinder integral assembled from positive product measures."""
    collapsed = canonicalize_times(f.times, spec.horizon)
    check_after_pin(spec, collapsed.unique_sorted)
    rule = tensor_rule([parts.re_plus.space.rule] * collapsed.size)
    grids = rule.open_grids()
    body = body_on_grid(f, collapsed.collapse_map, grids)
    guard = get_setting("mass_guard")

    # factors per part, per slot; parts vanishing on the grid are dropped
    weighted = parts.weighted()
    per_part = [chain_factors([kernel] * collapsed.size, spec.start_point, spec.start_time,
                              collapsed.unique_sorted, grids) for _, kernel in weighted]
    slot_choices: List[List[Tuple[complex, np.ndarray]]] = []
    for slot in range(collapsed.size):
        active = [(coef, factors[slot]) for (coef, _), factors in zip(weighted, per_part)
                  if np.any(factors[slot] != 0.0)]
        slot_choices.append(active)

    total = 0j
    for combo in itertools.product(*slot_choices):
        coefficient = complex(math.prod(coef for coef, _ in combo))
        measure = np.ones(rule.shape)
        for _, factor in combo:
            measure = measure * factor
        mass = integrate_grid(measure, rule).real
        if not math.isfinite(mass) or mass > guard:
            raise NumericalError("non-finite signed part", node=mass)
        total += coefficient * integrate_grid(body * measure, rule)
    return total


def complex_cylinder_integral(kernel_or_parts: Union[TransitionKernel, SignedKernelParts],
                              spec: PinnedMeasureSpec, f: CylinderFunction,
                              method: str = "direct") -> complex:
    """Cylinder integral against a complex kernel.

    `method="direct"` integrates the complex kernel as it is; `"parts"`
    goes through the four nonnegative parts. Both give the same value up
    to rounding.
    """
    if method == "direct":
        if isinstance(kernel_or_parts, SignedKernelParts):
            raise ValueError("direct integration needs the kernel, not its parts")
        return cylinder_integral(PinnedMeasureSpec(kernel_or_parts, spec.start_point,
                                                   spec.start_time, spec.horizon), f)
    if method == "parts":
        parts = (kernel_or_parts if isinstance(kernel_or_parts, SignedKernelParts)
                 else decompose_kernel(kernel_or_parts))
        return four_part_integral(parts, spec, f)
    raise ValueError(f"unknown method {method!r}")
