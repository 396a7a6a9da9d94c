import math

import numpy as np
import pytest
from scipy import integrate

from pathmeasure.core.errors import DomainError
from pathmeasure.core.model import PerturbationSeriesSpec, PowerPotential, RadialParams
from pathmeasure.core.radial.propagator import q_function
from pathmeasure.core.radial.series import (
    head_exponent,
    partial_sums,
    perturbation_series,
    weight_head,
    weight_integral,
    weight_integrand,
)

PARAMS = RadialParams(3.0, 0.0)


def series_spec(inner_times, exponent=0.5, tail_cutoff=20.0, params=PARAMS):
    return PerturbationSeriesSpec(params, PowerPotential(exponent, tail_cutoff), -1.0, tuple(inner_times), 1.0, 1.0, 1.0)


def test_head_exponent():
    assert head_exponent(PARAMS, PowerPotential(0.5)) == pytest.approx(1.5)


def test_head_matches_direct_quadrature():
    potential = PowerPotential(0.5)
    x = 1e-2
    direct, _ = integrate.quad(weight_integrand(0.5, PARAMS, potential), 0.0, x, epsabs=0.0, epsrel=1e-12)
    assert weight_head(0.5, PARAMS, potential, x) == pytest.approx(direct, rel=1e-6)


def test_inadmissible_potential():
    with pytest.raises(DomainError, match="inadmissible potential"):
        PowerPotential(-1.5)
    # order 0: the weight integrand is not integrable at the origin for e <= 0
    with pytest.raises(DomainError, match="inadmissible potential"):
        weight_integral(0.5, RadialParams(3.0, -0.25), PowerPotential(-0.5))


def test_weight_is_even_in_time():
    potential = PowerPotential(0.5)
    assert weight_integral(0.5, PARAMS, potential) == weight_integral(-0.5, PARAMS, potential)


def test_weight_scaling_law():
    e = 0.5
    small = weight_integral(0.5, PARAMS, PowerPotential(e, 10.0)).value
    large = weight_integral(2.0, PARAMS, PowerPotential(e, 20.0)).value
    assert large / small == pytest.approx(2.0 ** (1.0 - PARAMS.n + e), rel=1e-8)


def test_weight_continuous_in_exponent():
    values = []
    for e in np.arange(-0.9, 2.0 + 1e-9, 0.1):
        result = weight_integral(0.5, PARAMS, PowerPotential(float(e)))
        assert math.isfinite(result.value)
        assert result.value > 0.0
        values.append(result.value)
    ratios = [b / a for a, b in zip(values, values[1:])]
    assert max(max(ratios), 1.0 / min(ratios)) <= 10.0


def test_doubling_the_cutoff_moves_less_than_the_tail_estimate():
    short = weight_integral(0.5, PARAMS, PowerPotential(-0.5, 20.0))
    long = weight_integral(0.5, PARAMS, PowerPotential(-0.5, 40.0))
    assert abs(long.value - short.value) <= short.tail_estimate


def test_tiny_cutoff_leaves_only_the_head():
    result = weight_integral(0.5, PARAMS, PowerPotential(3.0, 1e-6))
    assert result.tail_estimate == 0.0
    assert result.value < 1e-20


def test_partial_sums_of_equal_weights_are_geometric():
    head, w = 0.3 + 0.4j, 0.7
    sums = partial_sums(head, [w] * 6)
    for k, value in enumerate(sums):
        expected = head * (1.0 - w ** (k + 1)) / (1.0 - w)
        assert abs(value - expected) <= 1e-12 * abs(expected)


def test_series_head_is_the_q_product():
    result = perturbation_series(series_spec([-0.5, 0.5]), k_max=0)
    head = q_function(1.0, -1.0, PARAMS) * np.conj(q_function(1.0, 1.0, PARAMS))
    assert result.partial_sums == (pytest.approx(head, rel=1e-14),)
    assert result.weights == ()


def test_equal_time_moduli_give_a_geometric_series():
    result = perturbation_series(series_spec([-0.5, 0.5]))
    w1, w2 = result.weights
    assert w1 == w2
    assert result.partial_sums[2] == pytest.approx(result.head * (1.0 + w1 + w1 * w1), rel=1e-12)
    moduli = [abs(s) for s in result.partial_sums]
    assert moduli == sorted(moduli)


def test_vanishing_weights_freeze_the_series():
    result = perturbation_series(series_spec([-0.5, 0.5], exponent=3.0, tail_cutoff=1e-6))
    for value in result.partial_sums:
        assert value == pytest.approx(result.head, rel=1e-12)


@pytest.mark.parametrize("inner, message", [
    ([0.5, -0.5], "time ordering violated"),
    ([-0.5, 0.0], "singular time"),
    ([1.5], "time ordering violated"),
])
def test_bad_time_chains(inner, message):
    with pytest.raises(DomainError, match=message):
        series_spec(inner)


def test_k_max_bounds():
    with pytest.raises(DomainError, match="k_max"):
        perturbation_series(series_spec([-0.5]), k_max=2)
