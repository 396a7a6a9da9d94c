import numpy as np
import pytest

from pathmeasure.core.complex_measures import (
    abs_kernel,
    complex_cylinder_integral,
    decompose_kernel,
    reconstruct,
)
from pathmeasure.core.errors import NumericalError
from pathmeasure.core.feynman import schrodinger_kernel_regularized
from pathmeasure.core.kernels import circle_space, cylinder_integral, heat_kernel_circle, total_mass
from pathmeasure.core.model import CylinderFunction, PinnedMeasureSpec, TransitionKernel


@pytest.fixture
def kernel():
    return schrodinger_kernel_regularized(circle_space(1.0, nodes=16), 0.05, spectral_terms=6)


def test_parts_are_nonnegative_and_reconstruct_exactly(kernel, rng):
    parts = decompose_kernel(kernel)
    t = rng.uniform(0.0, 0.5, size=10_000)
    u = t + rng.uniform(0.0, 0.5, size=10_000)
    x = rng.uniform(0.0, 1.0, size=10_000)
    y = rng.uniform(0.0, 1.0, size=10_000)
    for (t_i, u_i, x_i, y_i) in zip(t, u, x, y):
        rebuilt = reconstruct(parts, t_i, u_i, x_i, y_i)
        assert rebuilt == kernel(t_i, u_i, x_i, y_i)
    for _, part in parts.weighted():
        assert part.positivity_flag
        assert np.all(part(0.0, 0.3, x[:, None], y[None, :100]) >= 0.0)


def test_four_parts_agree_with_direct_integration(kernel, rng):
    for _ in range(20):
        arity = int(rng.integers(1, 3))
        times = tuple(sorted(float(t) for t in rng.uniform(0.05, 1.0, size=arity)))
        k = rng.integers(-2, 3, size=arity)

        def body(*xs, k=k):
            return np.exp(2j * np.pi * sum(kj * x for kj, x in zip(k, xs)))

        f = CylinderFunction(times, body, 1.0)
        spec = PinnedMeasureSpec(kernel, float(rng.uniform(0.0, 1.0)))
        direct = complex_cylinder_integral(kernel, spec, f)
        four = complex_cylinder_integral(kernel, spec, f, method="parts")
        scale = total_mass(PinnedMeasureSpec(abs_kernel(kernel), spec.start_point), times).real
        assert abs(direct - four) <= 1e-12 * max(abs(direct), scale)


def test_abs_kernel_bounds_the_complex_integral(kernel):
    f = CylinderFunction((0.4,), lambda x: np.exp(2j * np.pi * x), 1.0)
    spec = PinnedMeasureSpec(kernel, 0.3)
    bound = total_mass(PinnedMeasureSpec(abs_kernel(kernel), 0.3), (0.4,)).real
    assert abs(complex_cylinder_integral(kernel, spec, f)) <= bound * (1.0 + 1e-12)


def test_direct_method_needs_the_kernel(kernel):
    f = CylinderFunction((0.4,), lambda x: np.ones_like(x), 1.0)
    spec = PinnedMeasureSpec(kernel, 0.3)
    with pytest.raises(ValueError, match="needs the kernel"):
        complex_cylinder_integral(decompose_kernel(kernel), spec, f)
    with pytest.raises(ValueError, match="unknown method"):
        complex_cylinder_integral(kernel, spec, f, method="mystery")


def test_parts_method_accepts_ready_made_parts(kernel):
    f = CylinderFunction((0.4,), lambda x: np.cos(2 * np.pi * x), 1.0)
    spec = PinnedMeasureSpec(kernel, 0.3)
    from_parts = complex_cylinder_integral(decompose_kernel(kernel), spec, f, method="parts")
    assert from_parts == pytest.approx(complex_cylinder_integral(kernel, spec, f), abs=1e-13)


def test_mass_guard_stops_runaway_parts(kernel, override_settings):
    override_settings(mass_guard=1e-30)
    f = CylinderFunction((0.4,), lambda x: np.ones_like(x), 1.0)
    with pytest.raises(NumericalError, match="non-finite signed part"):
        complex_cylinder_integral(kernel, PinnedMeasureSpec(kernel, 0.3), f, method="parts")


@pytest.mark.parametrize("theta", [0.3, 1.0, -2.2, np.pi])
@pytest.mark.parametrize("times", [(0.2,), (0.1, 0.35), (0.1, 0.2, 0.5)])
@pytest.mark.parametrize("method", ["direct", "parts"])
def test_constant_phase_factors_out_of_every_slot(theta, times, method):
    heat = heat_kernel_circle(1.0, spectral_terms=20, nodes=16)
    phased = TransitionKernel(lambda t, u, x, y: heat(t, u, x, y) * np.exp(1j * theta), "phased heat", False,
                              heat.space)
    f = CylinderFunction(times, lambda *xs: np.cos(2 * np.pi * xs[-1]) * np.cos(np.pi * xs[0]) ** 2, 1.0)

    positive = cylinder_integral(PinnedMeasureSpec(heat, 0.15), f)
    value = complex_cylinder_integral(phased, PinnedMeasureSpec(phased, 0.15), f, method=method)
    expected = np.exp(1j * len(times) * theta) * positive
    assert abs(value - expected) <= 1e-12 * max(abs(expected), 1.0)
