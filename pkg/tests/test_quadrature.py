import math

import numpy as np
import pytest

from pathmeasure.core.errors import DomainError, NumericalError
from pathmeasure.core.model import RegularizationSchedule, RuleKind
from pathmeasure.core.quadrature import (
    damped_cutoff,
    damped_limit,
    gauss_legendre_composite,
    integrate_1d,
    integrate_grid,
    integrate_halfline_damped,
    integrate_nd,
    oscillatory_rule,
    richardson_depth,
    richardson_extrapolate,
    tensor_rule,
    trapezoid_periodic,
)


def test_gauss_composite_is_exact_on_polynomials():
    rule = gauss_legendre_composite(-1.0, 2.0, panels=3, points=4)
    assert rule.kind is RuleKind.GAUSS_LEGENDRE_COMPOSITE
    assert rule.size == 12
    assert integrate_1d(lambda x: x ** 7 - 2 * x ** 3, rule).real == pytest.approx((2 ** 8 - 1) / 8 - (2 ** 4 - 1) / 2, rel=1e-13)


def test_graded_rule_handles_endpoint_singularity():
    rule = gauss_legendre_composite(0.0, 1.0, panels=4, points=16, grade_left=30)
    assert integrate_1d(np.sqrt, rule).real == pytest.approx(2.0 / 3.0, rel=1e-10)
    assert rule.nodes.min() > 0.0


def test_trapezoid_is_exact_for_low_trigonometric_modes():
    rule = trapezoid_periodic(0.0, 2.0, nodes=16)
    value = integrate_1d(lambda x: np.cos(2 * np.pi * 3 * x / 2.0) ** 2 + 1.0, rule)
    assert value.real == pytest.approx(3.0, abs=1e-14)


@pytest.mark.parametrize("args", [(1.0, 1.0, 2, 4), (0.0, 1.0, 0, 4)])
def test_gauss_rule_rejects_bad_arguments(args):
    with pytest.raises(DomainError):
        gauss_legendre_composite(*args)


def test_rules_are_read_only():
    rule = trapezoid_periodic(0.0, 1.0, 8)
    with pytest.raises(ValueError):
        rule.nodes[0] = 3.0


def test_tensor_rule_matches_nested_integrals():
    a = gauss_legendre_composite(0.0, 1.0, 2, 5)
    b = trapezoid_periodic(0.0, 1.0, 12)
    rule = tensor_rule([a, b])

    def f(x, y):
        return np.exp(x) * np.cos(2 * np.pi * y) ** 2

    nested = integrate_1d(lambda x: np.array([integrate_1d(lambda y: f(xi, y), b) for xi in x]), a)
    assert integrate_nd(f, rule) == pytest.approx(nested, rel=1e-13)
    assert integrate_nd(f, rule).real == pytest.approx(0.5 * (math.e - 1.0), rel=1e-12)


def test_tensor_rule_refuses_huge_grids():
    rule = trapezoid_periodic(0.0, 1.0, 100)
    with pytest.raises(NumericalError, match="tensor grid too large"):
        tensor_rule([rule] * 3, max_nodes=10_000)


def test_non_finite_integrand_names_the_node():
    rule = trapezoid_periodic(0.0, 1.0, 4)
    with pytest.raises(NumericalError) as info:
        integrate_1d(lambda x: 1.0 / (x - 0.5), rule)
    assert info.value.node == 0.5


def test_integrate_grid_broadcasts_values():
    rule = tensor_rule([trapezoid_periodic(0.0, 1.0, 4)] * 2)
    assert integrate_grid(2.0, rule) == pytest.approx(2.0)


def test_damped_cutoff_meets_tail():
    cutoff = damped_cutoff(0.5, tail=1e-10)
    assert math.exp(-0.5 * cutoff ** 2) == pytest.approx(1e-10)
    with pytest.raises(DomainError):
        damped_cutoff(0.0)


def test_halfline_gaussian():
    cutoff = damped_cutoff(1.0)
    rule = gauss_legendre_composite(0.0, cutoff, panels=8, points=16)
    result = integrate_halfline_damped(lambda k: np.ones_like(k), 1.0, cutoff, rule)
    assert result.value.real == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-13)
    assert not result.flagged


def test_halfline_flags_large_tails():
    rule = oscillatory_rule(0.0, 1.0)
    result = integrate_halfline_damped(lambda k: np.ones_like(k), 0.0, 1.0, rule, tail_tolerance=1e-6)
    assert result.flagged
    assert result.value.real == pytest.approx(1.0)


def test_halfline_rule_must_cover_the_cutoff():
    rule = oscillatory_rule(0.0, 2.0)
    with pytest.raises(DomainError, match="rule must cover"):
        integrate_halfline_damped(lambda k: k, 1.0, 3.0, rule)


def test_damped_limit_of_fresnel_integral():
    schedule = RegularizationSchedule(0.1, 0.5, 4)
    result = damped_limit(lambda k: np.exp(-1j * k * k), schedule, chirp=1.0)
    exact = math.sqrt(math.pi) / 2.0 * np.exp(-1j * math.pi / 4.0)
    assert abs(result.limit - exact) <= 1e-4
    assert len(result.values) == 4


def test_richardson_removes_polynomial_error():
    h = np.array([1.0, 0.5, 0.25])
    values = 1.0 + h + h ** 2
    assert richardson_extrapolate(values, order=1, step_ratio=2.0) == pytest.approx(1.0, abs=1e-14)


def test_richardson_needs_two_values():
    with pytest.raises(ValueError):
        richardson_extrapolate([1.0])


def test_richardson_depth_limits_the_table():
    h = 0.1 * 0.95 ** np.arange(12)
    values = 1.0 + h + h ** 2 + h ** 3
    # two columns clear the h and h^2 terms; h^3 is left over
    shallow = richardson_extrapolate(values, order=1, step_ratio=1 / 0.95, depth=2)
    assert abs(shallow - 1.0) <= 1e-3
    assert richardson_depth(12, 1, 1 / 0.95) == 2
    assert richardson_depth(12, 1, 2.0) == 11


def test_richardson_depth_must_be_positive():
    with pytest.raises(ValueError):
        richardson_extrapolate([1.0, 2.0], depth=0)


@pytest.mark.parametrize("points, nominal", [(1, 2), (2, 4), (3, 6)])
def test_gauss_refinement_converges_at_the_nominal_order(points, nominal):
    exact = math.e - 1.0
    errors = [abs(integrate_1d(np.exp, gauss_legendre_composite(0.0, 1.0, panels, points)).real - exact)
              for panels in (1, 2, 4, 8)]
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert all(abs(order - nominal) <= 0.5 for order in orders)


@pytest.mark.parametrize("build", [
    lambda: gauss_legendre_composite(-2.0, 3.0, 3, 5),
    lambda: gauss_legendre_composite(0.0, 1.0, 2, 7, grade_left=4),
    lambda: trapezoid_periodic(0.0, 2.0, 17),
    lambda: oscillatory_rule(0.0, 10.0, chirp=1.0),
])
def test_nonnegative_integrands_integrate_nonnegative(build, rng):
    rule = build()
    for _ in range(20):
        c, s = rng.uniform(-3.0, 3.0), rng.uniform(0.1, 5.0)
        value = integrate_1d(lambda x: (x - c) ** 2 * np.exp(-s * x * x), rule)
        assert value.real >= -1e-14 * s


def test_damped_cutoff_needs_a_proper_tail():
    with pytest.raises(DomainError, match="tail threshold"):
        damped_cutoff(1.0, tail=0.0)
