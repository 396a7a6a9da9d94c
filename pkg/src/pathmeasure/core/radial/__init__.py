"""Radial Bessel problem: special functions, propagators, perturbation series"""
from pathmeasure.core.radial.bessel import bessel_j, bessel_j_derivative, check_recurrences
from pathmeasure.core.radial.propagator import (
    damped_k_integral,
    p_closed_form,
    propagator_closed_form,
    propagator_lambda_integral,
    q_function,
)
from pathmeasure.core.radial.series import partial_sums, perturbation_series, weight_integral

__all__ = [
    'bessel_j',
    'bessel_j_derivative',
    'check_recurrences',
    'damped_k_integral',
    'p_closed_form',
    'propagator_closed_form',
    'propagator_lambda_integral',
    'q_function',
    'partial_sums',
    'perturbation_series',
    'weight_integral',
]
