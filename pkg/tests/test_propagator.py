import cmath
import math

import numpy as np
import pytest
from scipy import special

from pathmeasure.core.errors import DomainError
from pathmeasure.core.model import RadialParams
from pathmeasure.core.radial.propagator import (
    damped_k_integral,
    p_closed_form,
    principal_value_exp_over_lambda,
    propagator_closed_form,
    propagator_lambda_integral,
    q_function,
)

PARAMS = RadialParams(3.0, 0.0)


def test_order_from_dimension_and_strength():
    assert PARAMS.order == pytest.approx(0.5)
    assert RadialParams(4.0, 3.0).order == pytest.approx(2.0)
    with pytest.raises(DomainError, match="complex"):
        RadialParams(3.0, -0.5)


@pytest.mark.parametrize("r, t", [(1.0, 0.5), (2.0, -0.3), (0.5, 1.5)])
def test_p_modulus(r, t):
    expected = (math.sqrt(math.pi) * r ** (1.0 - PARAMS.n / 2.0)
                * abs(special.jv(0.25, r * r / (8.0 * abs(t)))) / (2.0 * math.sqrt(abs(t))))
    assert abs(p_closed_form(r, t, 0.7, PARAMS)) == pytest.approx(expected, rel=1e-10)


def test_time_reversal_conjugates_p():
    assert p_closed_form(1.0, -0.5, 2.0, PARAMS) == pytest.approx(np.conj(p_closed_form(1.0, 0.5, 2.0, PARAMS)),
                                                                  rel=1e-14)


def test_lambda_enters_as_a_phase():
    ratio = p_closed_form(1.0, 0.5, 2.0, PARAMS) / p_closed_form(1.0, 0.5, 0.0, PARAMS)
    assert ratio == pytest.approx(cmath.exp(1j * 0.5 * 2.0), rel=1e-14)


@pytest.mark.parametrize("r", [0.3, 1.0, 2.5])
def test_q_over_p_at_zero_lambda(r):
    assert q_function(r, 0.4, PARAMS) / p_closed_form(r, 0.4, 0.0, PARAMS) == pytest.approx(math.sqrt(math.pi))


def test_q_modulus_squared():
    r, t = 1.5, -0.8
    expected = math.pi ** 2 / (4.0 * abs(t)) * r ** (2.0 - PARAMS.n) * special.jv(0.25, r * r / (8.0 * abs(t))) ** 2
    assert abs(q_function(r, t, PARAMS)) ** 2 == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("call, message", [
    (lambda: p_closed_form(1.0, 0.0, 1.0, PARAMS), "singular time"),
    (lambda: q_function(0.0, 1.0, PARAMS), "radius must be positive"),
    (lambda: propagator_closed_form(1.0, 1.0, 0.5, 0.0, PARAMS), "singular time"),
    (lambda: principal_value_exp_over_lambda(1.0, 1.0, 0.0), "pv_cut must be positive"),
])
def test_bad_arguments(call, message):
    with pytest.raises(DomainError, match=message):
        call()


@pytest.mark.parametrize("t", [0.3, 0.5, 1.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_damped_k_integral_matches_closed_form(t, lam):
    closed = p_closed_form(1.0, t, lam, PARAMS)
    numeric = damped_k_integral(1.0, t, lam, PARAMS).limit
    assert abs(numeric - closed) <= 1e-4 * abs(closed)


def test_closed_form_modulus_and_sign():
    r, s, t, u = 1.0, 0.5, 1.0, 0.7
    value = propagator_closed_form(r, s, t, u, PARAMS)
    modulus = (math.pi ** 2 * (r * s) ** (1.0 - PARAMS.n / 2.0)
               * special.jv(0.25, r * r / (8.0 * t)) * special.jv(0.25, s * s / (8.0 * u))
               / (4.0 * math.sqrt(t * u)))
    assert abs(value) == pytest.approx(abs(modulus), rel=1e-10)
    swapped = propagator_closed_form(s, r, u, t, PARAMS)
    assert swapped == pytest.approx(-np.conj(value), rel=1e-12)
    assert propagator_closed_form(r, s, 0.5, 0.5, PARAMS) == 0


@pytest.mark.parametrize("omega", [1.0, -0.4, 2.5])
def test_principal_value_against_sine_integral(omega):
    amplitude, cut = 0.3 - 0.7j, 0.1
    si, _ = special.sici(abs(omega) * cut)
    expected = 2j * amplitude * math.copysign(1.0, omega) * (math.pi / 2.0 - si)
    value = principal_value_exp_over_lambda(amplitude, omega, cut)
    assert abs(value - expected) <= 1e-5 * abs(amplitude) * math.pi


def test_principal_value_without_oscillation_vanishes():
    assert principal_value_exp_over_lambda(1.0 + 1j, 0.0, 0.1) == 0


def test_lambda_integral_diagnostics():
    params = RadialParams(3.0, 0.0)
    results = [propagator_lambda_integral(1.0, 1.0, 0.5, -0.5, params, cut) for cut in (0.1, 0.05, 0.025)]
    closed = results[0].closed_form
    assert all(r.closed_form == closed for r in results)
    # t + u = 0: the literal integrand has no oscillation left and the PV vanishes
    assert all(r.principal_value == 0 for r in results)
    assert all(r.discrepancy == pytest.approx(1.0) for r in results)
    discrepancies = [r.conjugate_discrepancy for r in results]
    assert max(discrepancies) / min(discrepancies) - 1.0 <= 0.2


def test_conjugated_integral_tends_to_a_quarter_turn():
    result = propagator_lambda_integral(1.0, 1.0, 0.5, -0.5, PARAMS, 1e-3)
    assert result.conjugate_principal_value / result.closed_form == pytest.approx(1j, abs=2e-3)
    assert result.conjugate_discrepancy == pytest.approx(math.sqrt(2.0), abs=2e-3)
