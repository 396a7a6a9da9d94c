"""The perturbation series of the radial propagator in powers of the potential weight."""
from __future__ import annotations

import logging
import math
from typing import Any, List, Optional, Sequence

import numpy as np
from scipy import special

from pathmeasure.core.errors import DomainError, NumericalError
from pathmeasure.core.model import (
    PerturbationSeriesSpec,
    PowerPotential,
    RadialParams,
    SeriesResult,
    WeightResult,
)
from pathmeasure.core.quadrature import oscillatory_rule
from pathmeasure.core.radial.bessel import bessel_j
from pathmeasure.core.radial.propagator import q_function
from pathmeasure.core.settings import get_setting

logger = logging.getLogger(__name__)

# below HEAD_FRACTION * sqrt(8|t|) the Bessel factor is replaced by its leading power
HEAD_FRACTION = 1e-4


def weight_integrand(t: float, params: RadialParams, potential: PowerPotential) -> Any:
    """x -> |q(x, t)|^2 V(x) = pi^2/(4|t|) x^(2-n) J_(o/2)^2(x^2/(8|t|)) x^e."""
    if t == 0.0:
        raise DomainError("singular time")
    scale = math.pi ** 2 / (4.0 * abs(t))
    half_order = 0.5 * params.order

    def integrand(x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        j = bessel_j(half_order, x * x / (8.0 * abs(t)))
        return scale * x ** (2.0 - params.n) * j * j * potential(x)

    return integrand


def head_exponent(params: RadialParams, potential: PowerPotential) -> float:
    """Power p of the integral of the weight integrand from 0 to x, which grows like x^p."""
    return 3.0 - params.n + 2.0 * params.order + potential.exponent


def weight_head(t: float, params: RadialParams, potential: PowerPotential, x: float) -> float:
    """Integral of the weight integrand over (0, x) from the leading power of J near 0."""
    power = head_exponent(params, potential)
    if not power > 0.0:
        raise DomainError("inadmissible potential")
    o = params.order
    coefficient = (math.pi ** 2 / (4.0 * abs(t)) * (16.0 * abs(t)) ** (-o)
                   / special.gamma(0.5 * o + 1.0) ** 2)
    return coefficient * x ** power / power


def weight_integral(t: float, params: RadialParams, potential: PowerPotential) -> WeightResult:
    """Integral of |q(x, t)|^2 V(x) over (0, tail_cutoff).

    Analytic head near 0, graded Gauss-Legendre after it. The tail estimate
    is what the last decade (x above tail_cutoff / 10) contributes; above
    `weight_tail_fraction` of the value the result is flagged.
    """
    if t == 0.0:
        raise DomainError("singular time")
    cutoff = potential.tail_cutoff
    x_head = min(HEAD_FRACTION * math.sqrt(8.0 * abs(t)), cutoff)
    head = weight_head(t, params, potential, x_head)
    if x_head >= cutoff:
        return WeightResult(head, 0.0, False)

    chirp = 1.0 / (4.0 * abs(t))
    coarse = oscillatory_rule(x_head, cutoff, chirp=chirp)
    first_panel = (cutoff - x_head) * coarse.panel_size / coarse.size
    levels = max(0, math.ceil(math.log2(first_panel / x_head)))
    rule = oscillatory_rule(x_head, cutoff, chirp=chirp, grade_left=levels)

    weighted = np.asarray(weight_integrand(t, params, potential)(rule.nodes)) * rule.weights
    if not np.all(np.isfinite(weighted)):
        raise NumericalError("non-finite integrand", node=float(rule.nodes[np.argmax(~np.isfinite(weighted))]))
    value = float(head + weighted.sum())
    tail = float(abs(weighted[rule.nodes >= 0.1 * cutoff].sum()))
    flagged = tail > get_setting("weight_tail_fraction") * abs(value)
    if flagged:
        logger.warning("weight at t=%g: last decade carries %.3g of %.3g (cutoff %g)", t, tail, value, cutoff)
    return WeightResult(value, tail, flagged)


def partial_sums(head: complex, weights: Sequence[float]) -> List[complex]:
    """S_k = head * sum over i <= k of w_1 ... w_i; S_0 = head."""
    sums = [complex(head)]
    product = 1.0
    total = 1.0
    for w in weights:
        product *= w
        total += product
        sums.append(complex(head) * total)
    return sums


def perturbation_series(spec: PerturbationSeriesSpec, k_max: Optional[int] = None) -> SeriesResult:
    """Partial sums S_0 ... S_k_max with head q(r,t) conj(q(s,u)) and weights at t_1 ... t_k_max."""
    k_max = len(spec.inner_times) if k_max is None else k_max
    if not 0 <= k_max <= len(spec.inner_times):
        raise DomainError(f"k_max must lie in [0, {len(spec.inner_times)}]")

    head = q_function(spec.r, spec.t, spec.params) * np.conj(q_function(spec.s, spec.u, spec.params))
    results = [weight_integral(tj, spec.params, spec.potential) for tj in spec.inner_times[:k_max]]
    weights = [w.value for w in results]
    sums = partial_sums(complex(head), weights)
    logger.info("series S_0=%.6g%+.6gi, S_%d=%.6g%+.6gi", sums[0].real, sums[0].imag, k_max,
                sums[-1].real, sums[-1].imag)
    return SeriesResult(complex(head), tuple(sums), tuple(weights), tuple(w.flagged for w in results))
