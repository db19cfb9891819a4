"""
Tests for the Lax-Friedrichs solver of the effective equation
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.cell import EffectiveHamiltonianTable
from src.effective import (
    ClosedFormHamiltonian,
    EffectiveProblem,
    TableHamiltonian,
    closed_form_for,
    constant_force_hamiltonian,
    dissipation,
    lax_friedrichs_step,
    lf_cfl_limit,
    solve_effective,
    zero_hamiltonian,
)
from src.errors import (
    CoverageError,
    InvalidArgumentError,
    MonotonicityViolationError,
    PreconditionError,
    RejectedStepError,
)
from src.flow import cone
from src.grid import GridFunction, GridSpec
from src.operator import ConstantForce


def hopf_lax_forced_cone(x, t):
    """u_t = sqrt(1 + u_x^2) from -|x|: the linear part -|x| + sqrt(2) t outside the rarefied apex"""
    x = np.abs(x)
    return np.where(x >= t / np.sqrt(2.0), -x + np.sqrt(2.0) * t, np.sqrt(np.maximum(t * t - x * x, 0.0)))


def _sqrt_table(P: float, samples: int) -> EffectiveHamiltonianTable:
    axis = np.linspace(-P, P, samples)
    return EffectiveHamiltonianTable(1, P, samples, -np.sqrt(1.0 + axis ** 2), np.zeros(samples))


def test_closed_form_selection():
    assert closed_form_for(None, 1).label == "zero"
    assert closed_form_for(ConstantForce(0.0), 1).label == "zero"
    constant = closed_form_for(ConstantForce(2.0, n=2), 2)
    assert constant(np.array([[0.0, 0.0]]))[0] == pytest.approx(-2.0)
    assert_allclose(constant.slope_bounds(), [2.0, 2.0])


def test_dissipation_and_time_step():
    ham = constant_force_hamiltonian(1.0)
    theta = dissipation(ham)
    assert_allclose(theta, [1.2])
    spec = GridSpec.box(1, 100, 1.0)
    assert lf_cfl_limit(spec, theta) == pytest.approx(0.9 * 0.02 / 1.2)
    assert lf_cfl_limit(spec, np.zeros(1)) == float("inf")


def test_step_rejects_small_dissipation():
    u = GridSpec.box(1, 32, 1.0).constant(0.0)
    with pytest.raises(MonotonicityViolationError):
        lax_friedrichs_step(u, 1e-3, constant_force_hamiltonian(1.0), theta=[0.5])


def test_step_rejects_large_dt():
    u = GridSpec.box(1, 32, 1.0).constant(0.0)
    with pytest.raises(RejectedStepError):
        lax_friedrichs_step(u, 1.0, constant_force_hamiltonian(1.0))


def test_step_on_flat_data_with_constant_force():
    u = GridSpec.box(1, 32, 1.0).constant(0.0)
    new = lax_friedrichs_step(u, 0.01, constant_force_hamiltonian(1.0))
    assert_allclose(new.values, 0.01, atol=1e-15)


def test_step_detects_clamping():
    spec = GridSpec.box(1, 32, 1.0)
    steep = spec.sample(lambda x: 5.0 * x[..., 0])
    ham = TableHamiltonian(_sqrt_table(2.0, 21))
    dt = 0.5 * lf_cfl_limit(spec, dissipation(ham))
    with pytest.raises(CoverageError):
        lax_friedrichs_step(steep, dt, ham)


def test_zero_hamiltonian_keeps_data():
    spec = GridSpec.box(1, 64, 2.0, slope_cap=1.0)
    u0 = cone(spec)
    trace = solve_effective(EffectiveProblem(zero_hamiltonian(1), u0, 1.0, lipschitz_bound=1.0))
    assert_allclose(trace.final.values, u0.values)
    assert trace.times == [0.0, 1.0]


def test_forced_cone_matches_hopf_lax():
    spec = GridSpec.box(1, 400, 2.0, slope_cap=1.0)
    u0 = spec.sample(lambda x: -np.abs(x[..., 0]))
    problem = EffectiveProblem(constant_force_hamiltonian(1.0), u0, 0.5, lipschitz_bound=1.0,
                               snapshot_times=[0.25])
    trace = solve_effective(problem)
    x = spec.axis()
    away = (np.abs(x) > 0.7) & (np.abs(x) < 1.5)
    assert_allclose(trace.final.values[away], hopf_lax_forced_cone(x, 0.5)[away], atol=1e-10)
    apex = trace.final.origin_value
    assert abs(apex - 0.5) < 0.05
    assert trace.at(0.25).origin_value < apex


def test_table_agrees_with_closed_form():
    spec = GridSpec.box(1, 128, 2.0, slope_cap=1.0)
    u0 = cone(spec, sign=-1.0)
    exact = solve_effective(EffectiveProblem(constant_force_hamiltonian(1.0), u0, 0.3, lipschitz_bound=1.0,
                                             theta=[1.2]))
    table = TableHamiltonian(_sqrt_table(3.0, 241))
    tabulated = solve_effective(EffectiveProblem(table, u0, 0.3, lipschitz_bound=1.0, theta=[1.2]))
    assert_allclose(tabulated.final.values, exact.final.values, atol=2e-3)


def test_lax_friedrichs_is_monotone():
    spec = GridSpec.box(1, 64, 2.0, slope_cap=1.0)
    x = spec.axis()
    low = GridFunction(spec, -np.abs(x) + 0.05 * np.sin(3.0 * x))
    high = low + spec.sample(lambda y: 0.1 * np.exp(-y[..., 0] ** 2))
    ham = constant_force_hamiltonian(1.0)
    a = solve_effective(EffectiveProblem(ham, low, 0.5, lipschitz_bound=1.3))
    b = solve_effective(EffectiveProblem(ham, high, 0.5, lipschitz_bound=1.3))
    # the bump reaches the edges, so the two runs freeze different ghost offsets
    inner = spec.window_mask(1.0)
    assert np.all(a.final.values[inner] <= b.final.values[inner] + 1e-12)


def test_problem_requires_table_coverage():
    u0 = cone(GridSpec.box(1, 64, 2.0, slope_cap=1.0))
    with pytest.raises(PreconditionError):
        solve_effective(EffectiveProblem(TableHamiltonian(_sqrt_table(1.5, 11)), u0, 0.1, lipschitz_bound=1.0))


def test_problem_rejects_steep_data():
    spec = GridSpec.box(1, 64, 2.0)
    u0 = spec.sample(lambda x: 3.0 * x[..., 0])
    with pytest.raises(InvalidArgumentError):
        solve_effective(EffectiveProblem(zero_hamiltonian(1), u0, 0.1, lipschitz_bound=1.0))


def test_problem_rejects_dimension_mismatch():
    u0 = GridSpec.box(2, 16, 1.0).constant(0.0)
    with pytest.raises(InvalidArgumentError):
        solve_effective(EffectiveProblem(zero_hamiltonian(1), u0, 0.1))


def test_closed_form_hamiltonian_custom():
    ham = ClosedFormHamiltonian(lambda P: 0.5 * P[..., 0] ** 2, [2.0], 1, "quadratic")
    values, clamped = ham.evaluate(np.array([[1.0], [2.0]]))
    assert_allclose(values, [0.5, 2.0])
    assert clamped == 0
    assert ham.coverage == float("inf")


def test_forced_cone_converges_at_first_order():
    errors, spacings = [], []
    for m in (100, 200, 400, 800):
        spec = GridSpec.box(1, m, 2.0, slope_cap=1.0)
        u0 = spec.sample(lambda x: -np.abs(x[..., 0]))
        trace = solve_effective(EffectiveProblem(constant_force_hamiltonian(1.0), u0, 0.5, lipschitz_bound=1.0))
        x = spec.axis()
        inner = np.abs(x) <= 1.0
        errors.append(float(np.max(np.abs(trace.final.values - hopf_lax_forced_cone(x, 0.5))[inner])))
        spacings.append(spec.h)
    assert np.all(np.diff(errors) < 0.0), errors
    order = np.polyfit(np.log(spacings), np.log(errors), 1)[0]
    # the rarefied apex adds a log(1/h) factor to the first-order error
    assert 0.65 <= order <= 1.3, order
