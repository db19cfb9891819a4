"""
Tests for the explicit parabolic solver
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.config import InitialSection
from src.errors import (
    InvalidArgumentError,
    IterationLimitError,
    RejectedStepError,
    ResolutionError,
)
from src.flow import (
    ParabolicProblem,
    cfl_limit,
    comparison_check,
    cone,
    evolve,
    flow_operator,
    front_speed,
    initial_from_config,
    lipschitz_of_kind,
    sine,
    solve_epsilon_problem,
    step,
    write_trace,
)
from src.grid import GridFunction, GridSpec, edge_increments, pad
from src.operator import ConstantForce, TrigonometricForce


def _curvature_update(values, h, dt):
    """w + dt w_xx / (1 + w_x^2) with periodic central differences"""
    up, down = np.roll(values, -1), np.roll(values, 1)
    wx = (up - down) / (2.0 * h)
    wxx = (up - 2.0 * values + down) / (h * h)
    return values + dt * wxx / (1.0 + wx * wx)


def test_step_matches_stencil_arithmetic():
    spec = GridSpec.torus(1, 128)
    w = sine(spec, 1.0, [1])
    dt = 0.5 * cfl_limit(w)
    new = step(w, dt)
    assert_allclose(new.values, _curvature_update(w.values, spec.h, dt), atol=1e-13)


def test_step_with_constant_force_on_flat_data(torus_64, unit_force):
    w = torus_64.constant(0.0)
    new = step(w, 1e-4, force=unit_force)
    assert_allclose(new.values, 1e-4, atol=1e-15)


def test_cfl_limit_formula(torus_64):
    w = torus_64.constant(0.0)
    h = torus_64.h
    assert cfl_limit(w) == pytest.approx(min(0.9 * h * h / 2.0, h / 1.0))
    op = flow_operator(torus_64, ConstantForce(2.0))
    assert op.cfl_limit(3.0) == pytest.approx(min(0.9 * h * h / 2.0, h / (2.0 * np.sqrt(10.0) + 1.0)))


def test_step_rejects_large_dt(torus_64):
    w = sine(torus_64, 0.1, [1])
    with pytest.raises(RejectedStepError) as info:
        step(w, 2.0 * cfl_limit(w))
    assert info.value.dt_max == pytest.approx(cfl_limit(w))


def test_evolve_lands_on_snapshots_and_horizon(unit_force):
    spec = GridSpec.torus(1, 32)
    trace = evolve(ParabolicProblem(
        initial=spec.constant(0.0), horizon=0.1, force=unit_force, snapshot_times=[0.025, 0.05],
    ))
    assert trace.times == [0.0, 0.025, 0.05, 0.1]
    assert_allclose(trace.final.values, 0.1, atol=1e-12)
    assert trace.at(0.05).origin_value == pytest.approx(0.05, abs=1e-12)
    assert len(trace.probe_values) == trace.steps + 1
    assert trace.probe_at(0.1) == pytest.approx(0.1, abs=1e-12)
    assert all(dt > 0 for dt in trace.monitors.dt)


def test_additive_shift_is_preserved():
    spec = GridSpec.torus(1, 32)
    w0 = sine(spec, 0.1, [1])
    dt = 0.5 * cfl_limit(w0)
    low = evolve(ParabolicProblem(initial=w0, horizon=0.05, dt=dt))
    high = evolve(ParabolicProblem(initial=w0 + 1.0, horizon=0.05, dt=dt))
    assert_allclose(high.final.values - low.final.values, 1.0, atol=1e-12)
    result = comparison_check(low, high)
    assert result.ordered
    assert result.worst_violation == pytest.approx(-1.0, abs=1e-12)


def _compact_bump(distance: np.ndarray, radius: float, amplitude: float) -> np.ndarray:
    """amplitude (1 - (d/r)^2)^2 inside d < r, zero outside"""
    s = np.clip(1.0 - (distance / radius) ** 2, 0.0, None)
    return amplitude * s * s


def _ordered_pair(spec: GridSpec, rng: np.random.Generator):
    """
    Random smooth data and a copy raised by a compactly supported bump.

    On boxes the bump stays away from the edges, so both extensions agree
    outside the box and the pair is ordered on the whole space.
    """
    x = spec.coordinates()
    base = np.zeros(spec.shape)
    for _ in range(3):
        k = rng.integers(-1, 2, size=spec.n)
        base += rng.uniform(-0.02, 0.02) * np.sin(2.0 * np.pi * (x @ k) + rng.uniform(0, 2 * np.pi))
    if spec.is_torus:
        center = rng.uniform(0.0, 1.0, size=spec.n)
        offset = np.abs(x - center)
        distance = np.linalg.norm(np.minimum(offset, 1.0 - offset), axis=-1)
        radius = rng.uniform(0.15, 0.4)
    else:
        center = rng.uniform(-0.2, 0.2, size=spec.n)
        distance = np.linalg.norm(x - center, axis=-1)
        radius = rng.uniform(0.2, 0.35)
    bump = _compact_bump(distance, radius, rng.uniform(0.005, 0.03))
    return GridFunction(spec, base), GridFunction(spec, base + bump)


COMPARISON_GRIDS = {
    "torus-1d": GridSpec.torus(1, 32),
    "box-1d": GridSpec.box(1, 32, 1.0),
    "torus-2d": GridSpec.torus(2, 16),
    "box-2d": GridSpec.box(2, 24, 1.0),
}


@pytest.mark.parametrize("name", list(COMPARISON_GRIDS))
def test_ordered_pairs_stay_ordered_at_every_step(name):
    spec = COMPARISON_GRIDS[name]
    wavevector = [1] if spec.n == 1 else [1, 0]
    amplitude = 0.5 if spec.n == 1 else 0.1
    force = TrigonometricForce.sinusoid(1.0, amplitude, wavevector, delta=0.1)
    dt = 0.5 * flow_operator(spec, force).cfl_limit(2.0)
    options = dict(horizon=20 * dt, force=force, dt=dt, snapshot_every=1)

    rng = np.random.default_rng(7)
    failures = []
    for seed in range(100):
        low0, high0 = _ordered_pair(spec, rng)
        low = evolve(ParabolicProblem(initial=low0, **options))
        high = evolve(ParabolicProblem(initial=high0, **options))
        assert low.steps == 20
        result = comparison_check(low, high)
        if not result.ordered:
            failures.append((seed, result.worst_violation, result.time))
    assert failures == []


def test_box_edge_update_is_monotone_in_the_neighbour(laminated_force):
    spec = GridSpec.box(1, 64, 2.0)
    u0 = cone(spec)
    frozen = edge_increments(u0.values, spec)
    dt = 0.5 * flow_operator(spec, laminated_force).cfl_limit(2.0)
    raised = u0.values.copy()
    raised[-2] += 1e-3
    a = step(u0, dt, laminated_force, edge_offsets=frozen)
    b = step(u0.with_values(raised), dt, laminated_force, edge_offsets=frozen)
    assert np.all(b.values >= a.values - 1e-15)
    assert b.values[-1] > a.values[-1]


def test_frozen_offsets_reproduce_the_linear_extension():
    spec = GridSpec.box(2, 16, 1.0, slope_cap=1.0)
    u = spec.sample(lambda x: 0.3 * x[..., 0] - 0.2 * x[..., 1] + 0.1 * x[..., 0] * x[..., 1])
    assert_allclose(pad(u.values, spec, increments=edge_increments(u.values, spec)), pad(u.values, spec))
    assert edge_increments(u.values, GridSpec.torus(2, 16)) is None


def test_affine_far_field_is_kept_on_the_box(unit_force):
    spec = GridSpec.box(1, 64, 2.0, slope_cap=1.0)
    u0 = spec.sample(lambda x: 0.5 * x[..., 0])
    trace = evolve(ParabolicProblem(initial=u0, horizon=0.05, force=unit_force, lipschitz_bound=0.5))
    assert_allclose(trace.final.values - u0.values, 0.05 * np.sqrt(1.25), atol=1e-12)


@pytest.mark.parametrize("force, shift", [
    (None, 5),
    (TrigonometricForce.sinusoid(1.0, 0.5, [2], delta=0.1), 16),
])
def test_torus_shift_commutes_with_the_flow(force, shift):
    spec = GridSpec.torus(1, 32)
    w0 = sine(spec, 0.1, [1]) + spec.sample(lambda y: 0.05 * np.cos(6.0 * np.pi * y[..., 0]))
    shifted = w0.with_values(np.roll(w0.values, shift))
    dt = 0.5 * flow_operator(spec, force).cfl_limit(2.0)
    a = evolve(ParabolicProblem(initial=w0, horizon=0.02, force=force, dt=dt))
    b = evolve(ParabolicProblem(initial=shifted, horizon=0.02, force=force, dt=dt))
    assert_allclose(b.final.values, np.roll(a.final.values, shift), atol=1e-12)


def test_comparison_check_requires_shared_schedule():
    spec = GridSpec.torus(1, 32)
    w0 = spec.constant(0.0)
    a = evolve(ParabolicProblem(initial=w0, horizon=0.01))
    b = evolve(ParabolicProblem(initial=w0, horizon=0.01, dt=1e-4))
    with pytest.raises(InvalidArgumentError):
        comparison_check(a, b)


def test_evolve_validates_inputs(torus_64):
    with pytest.raises(InvalidArgumentError):
        evolve(ParabolicProblem(initial=torus_64.constant(0.0), horizon=0.0))
    with pytest.raises(InvalidArgumentError):
        evolve(ParabolicProblem(initial=sine(torus_64, 1.0, [1]), horizon=0.1, lipschitz_bound=1.0))


def test_evolve_step_budget(torus_64):
    with pytest.raises(IterationLimitError):
        evolve(ParabolicProblem(initial=torus_64.constant(0.0), horizon=1.0, max_steps=5))


def test_evolve_rejects_fixed_dt_above_limit(torus_64):
    with pytest.raises(RejectedStepError):
        evolve(ParabolicProblem(initial=sine(torus_64, 0.1, [1]), horizon=0.01, dt=0.01))


def test_epsilon_problem_needs_resolved_fast_scale():
    spec = GridSpec.box(1, 32, 1.0, slope_cap=1.0)
    with pytest.raises(ResolutionError):
        solve_epsilon_problem(None, cone(spec), 0.25, 0.1)


def test_epsilon_problem_rejects_unknown_method():
    spec = GridSpec.box(1, 64, 1.0, slope_cap=1.0)
    with pytest.raises(InvalidArgumentError):
        solve_epsilon_problem(None, cone(spec), 0.5, 0.01, method="implicit")


def test_direct_and_rescaled_epsilon_solves_agree(laminated_force):
    spec = GridSpec.box(1, 64, 1.0, slope_cap=1.0)
    u0 = cone(spec)
    options = dict(lipschitz_bound=1.0, snapshot_times=[0.01])
    direct = solve_epsilon_problem(laminated_force, u0, 0.5, 0.02, method="direct", **options)
    rescaled = solve_epsilon_problem(laminated_force, u0, 0.5, 0.02, method="rescaled", **options)
    assert rescaled.times == pytest.approx(direct.times, abs=1e-14)
    assert rescaled.final.spec == spec
    assert_allclose(rescaled.final.values, direct.final.values, atol=1e-9)
    assert_allclose(rescaled.at(0.01).values, direct.at(0.01).values, atol=1e-9)


def test_constant_force_epsilon_solution_is_t(unit_force):
    spec = GridSpec.box(1, 128, 1.0, slope_cap=0.0)
    trace = solve_epsilon_problem(unit_force, spec.constant(0.0), 0.25, 0.05, lipschitz_bound=0.0)
    assert_allclose(trace.final.values, 0.05, atol=1e-12)


def test_front_speed_needs_torus(box_256):
    with pytest.raises(InvalidArgumentError):
        front_speed(None, box_256, 1.0)


def test_front_speed_constant_force(unit_force):
    spec = GridSpec.torus(1, 16)
    speed = front_speed(unit_force, spec, 0.5, slope=[0.75])
    assert speed == pytest.approx(np.sqrt(1.0 + 0.75 ** 2), rel=1e-9)


def test_write_trace(tmp_path, unit_force):
    spec = GridSpec.torus(1, 16)
    trace = evolve(ParabolicProblem(initial=spec.constant(0.0), horizon=0.01, force=unit_force,
                                    snapshot_times=[0.005]))
    paths = write_trace(trace, tmp_path / "trace")
    assert len(paths) == 4
    assert paths[-1].name == "monitors.csv"
    header = paths[-1].read_text().splitlines()[0]
    assert header == "t,sup_wt,lipschitz,max_hessian_norm"
    table = np.loadtxt(paths[-1], delimiter=",", skiprows=1, ndmin=2)
    assert table.shape == (trace.steps, 4)


def test_initial_data_from_config():
    spec = GridSpec.box(1, 64, 2.0)
    section = InitialSection(kind="cone")
    u0 = initial_from_config(section, spec)
    assert u0.origin_value == pytest.approx(spec.h)
    assert lipschitz_of_kind(section, 1) == 1.0

    affine = InitialSection(kind="affine", slope=[0.5], value=1.0)
    assert initial_from_config(affine, spec).origin_value == pytest.approx(1.0)
    assert lipschitz_of_kind(affine, 1) == pytest.approx(0.5)

    wave = InitialSection(kind="sine", amplitude=0.2, wavevector=[1])
    assert lipschitz_of_kind(wave, 2) == pytest.approx(0.4 * np.pi * np.sqrt(2.0))
    assert lipschitz_of_kind(InitialSection(kind="flat"), 1) == 0.0
