"""Cylinder functions on path space: time canonicalization, evaluation, products"""
from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from pathmeasure.core.errors import DomainError
from pathmeasure.core.model import CollapsedTimes, CylinderFunction, Path


def canonicalize_times(times: Sequence[float], horizon: float = 1.0) -> CollapsedTimes:
    """Sort and deduplicate a time tuple, remembering where each entry went.

    (0.5, 0.2, 0.5) -> unique (0.2, 0.5), map (1, 0, 1).
    """
    if len(times) == 0:
        raise DomainError("empty time tuple")
    values = [float(t) for t in times]
    for t in values:
        if not 0.0 <= t <= horizon:
            raise DomainError("time outside I")

    unique_sorted = tuple(sorted(set(values)))
    position = {t: j for j, t in enumerate(unique_sorted)}
    return CollapsedTimes(unique_sorted, tuple(position[t] for t in values))


def collapse_body(f: CylinderFunction, collapsed: CollapsedTimes) -> CylinderFunction:
    """The same cylinder function written over the distinct times only."""
    body = f.body

    def collapsed_body(*xs: Any) -> Any:
        return body(*collapsed.expand(xs))

    return CylinderFunction(collapsed.unique_sorted, collapsed_body, f.bound)


def check_bound(values: Any, bound: float) -> np.ndarray:
    """`values` as an array, or a DomainError if any exceeds `bound` in modulus."""
    values = np.asarray(values)
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    if peak > bound * (1.0 + 1e-12) + 1e-300:
        raise DomainError(f"body exceeds its declared bound ({peak:.6g} > {bound:.6g})")
    return values


def evaluate_cylinder(f: CylinderFunction, path: Path) -> complex:
    values = [path(t) for t in f.times]
    return complex(check_bound(f.body(*values), f.bound))


def product_cylinder(f: CylinderFunction, g: CylinderFunction) -> CylinderFunction:
    """Pointwise product on the concatenated time tuple."""
    split = f.arity
    f_body, g_body = f.body, g.body

    def body(*xs: Any) -> Any:
        return f_body(*xs[:split]) * g_body(*xs[split:])

    return CylinderFunction(f.times + g.times, body, f.bound * g.bound)


def constant_cylinder(times: Sequence[float], value: complex = 1.0) -> CylinderFunction:
    """The cylinder function that ignores the path."""
    def body(*xs: Any) -> Any:
        return np.full(np.broadcast(*xs).shape, value)

    return CylinderFunction(tuple(float(t) for t in times), body, abs(value))
