"""Time stepping, the implicit activity solve, and relaxation fits."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from agenet import (AgeGrid, AmbiguousActivityError, ConstantRate,
                    DegenerateInputError, ModelInconsistencyError,
                    SimulationConfig, SmoothSaturatingRate, StepRate,
                    DelayKernel, decay_fit, kappa0, preset_density, run,
                    solve_activity_implicit, step, stepper_equilibrium)


def _grid(dx=0.01, x_max=4.0):
    return AgeGrid(dx=dx, n_cells=int(round(x_max / dx)))


# ---------------------------------------------------------------------------
# rest-rate mass

def test_kappa0_closed_forms():
    grid = _grid()
    uni = preset_density(grid, "uniform01")
    assert kappa0(ConstantRate(k0=2.0), grid, uni) == pytest.approx(2.0,
                                                                    abs=1e-12)
    # uniform01 mass above the resting threshold 0.5 is exactly half
    step_model = StepRate(sigma_plus=0.5, sigma_minus=0.25)
    assert kappa0(step_model, grid, uni) == pytest.approx(0.5, abs=1e-12)
    spike = preset_density(grid, "spike")
    assert kappa0(step_model, grid, spike) == 0.0


# ---------------------------------------------------------------------------
# implicit activity

def test_activity_uncoupled_lands_in_one_iteration():
    grid = _grid()
    f = preset_density(grid, "uniform01")
    sol = solve_activity_implicit(ConstantRate(k0=2.0, lam=0.0), grid,
                                  f.values)
    assert sol.iterations == 1
    assert sol.method == "fixed-point"
    assert sol.m == pytest.approx(2.0, abs=1e-12)


def test_activity_at_the_discrete_equilibrium():
    # the stepper equilibrium is by construction an exact fixed point of
    # the midpoint-quadrature activity map
    grid = _grid(dx=1e-3, x_max=10.0)
    model = SmoothSaturatingRate(k0=0.5, k1=2.0, lam=0.1)
    eq = stepper_equilibrium(model, grid)
    sol = solve_activity_implicit(model, grid, eq.F)
    assert abs(sol.m - eq.M) < 1e-9


def test_activity_residual_over_random_weak_draws():
    rng = np.random.default_rng(42)
    grid = _grid(dx=0.02, x_max=10.0)
    mids = grid.midpoints
    for _ in range(25):
        f = rng.gamma(2.0, size=grid.n_cells) + 1e-3
        f /= f.sum() * grid.dx
        model = SmoothSaturatingRate(
            k0=float(rng.uniform(0.3, 1.0)),
            k1=float(rng.uniform(1.2, 2.5)),
            lam=float(rng.uniform(0.0, 0.3)),
            mu_scale=float(rng.uniform(0.8, 1.5)))
        sol = solve_activity_implicit(model, grid, f)
        residual = float(np.dot(model.rate(mids, sol.m), f)) * grid.dx - sol.m
        assert abs(residual) < 1e-10


def test_activity_bracket_validation():
    grid = _grid()
    f = preset_density(grid, "uniform01")
    with pytest.raises(ValueError):
        solve_activity_implicit(ConstantRate(k0=1.0), grid, f.values,
                                bracket=(0.5, 0.2))


def test_ambiguous_activity_reports_both_roots():
    # a threshold map with two stable plateaus puts two exact fixed
    # points on the quadrature staircase: G = 0.85 on [0.6, 0.9) and
    # G = 0.95 on [0.9, 1]
    def sigma(u):
        if u < 0.3:
            return 0.5
        if u < 0.6:
            return 0.9
        if u < 0.9:
            return 0.15
        return 0.05

    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=1.0, decay=1.0,
                     sigma=sigma, sigma_modulus=10.0)
    grid = AgeGrid(dx=0.01, n_cells=200)
    f = preset_density(grid, "uniform01")
    with pytest.raises(AmbiguousActivityError) as exc_info:
        solve_activity_implicit(model, grid, f.values)
    roots = sorted(exc_info.value.roots)
    assert len(roots) == 2
    assert roots[0] == pytest.approx(0.85, abs=1e-12)
    assert roots[1] == pytest.approx(0.95, abs=1e-12)


def test_inconsistent_activity_raises():
    # an increasing threshold map makes G jump downward across the
    # diagonal: G = 0.8 below m = 0.5 and G = 0.2 above, no fixed point
    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=1.0, decay=1.0,
                     sigma=lambda u: 0.2 if u < 0.5 else 0.8,
                     sigma_modulus=10.0)
    grid = AgeGrid(dx=0.01, n_cells=200)
    f = preset_density(grid, "uniform01")
    with pytest.raises(ModelInconsistencyError):
        solve_activity_implicit(model, grid, f.values)


# ---------------------------------------------------------------------------
# single transport step

def test_step_pure_transport_below_threshold():
    # a spike younger than the resting threshold never fires: the step
    # is an exact index shift with zero discharge
    grid = _grid()
    config = SimulationConfig(grid=grid,
                              model=StepRate(sigma_plus=0.5,
                                             sigma_minus=0.25))
    state = preset_density(grid, "spike")
    new, p = step(state, 0.0, config)
    assert p == 0.0
    assert new.values[0] == 0.0
    assert new.values[1] == state.values[0]
    assert new.mass == pytest.approx(1.0, abs=1e-14)


def test_step_constant_rate_discharge_formula():
    grid = _grid()
    model = ConstantRate(k0=2.0)
    config = SimulationConfig(grid=grid, model=model)
    state = preset_density(grid, "uniform01")
    dt = grid.dx
    new, p = step(state, 0.7, config)
    survived = state.values * math.exp(-2.0 * dt)
    expected_p = ((state.values.sum() - survived.sum()) * grid.dx
                  + survived[-1] * grid.dx) / dt
    assert p == pytest.approx(expected_p, rel=1e-13)
    assert np.allclose(new.values[1:], survived[:-1], rtol=1e-14, atol=0.0)
    assert new.values[0] == pytest.approx(p, rel=1e-14)


# ---------------------------------------------------------------------------
# full runs

def test_run_conserves_mass_and_records_on_schedule():
    grid = _grid()
    cfg = SimulationConfig(grid=grid, model=ConstantRate(k0=1.0), t_end=1.0,
                           record_every=10)
    trace = run(cfg, preset_density(grid, "uniform01"))
    assert trace.times.size == 11
    assert trace.times[0] == 0.0 and trace.times[-1] == pytest.approx(1.0)
    assert np.max(np.abs(trace.mass_series - 1.0)) < 1e-12
    assert trace.kappa0 == pytest.approx(1.0, abs=1e-12)
    assert np.all(trace.m_series >= 0.0)
    assert np.all(trace.m_series <= cfg.model.k1 * (1.0 + 1e-12))


def test_run_accepts_callable_and_array_inputs():
    grid = _grid()
    cfg = SimulationConfig(grid=grid, model=ConstantRate(k0=1.0), t_end=0.5)
    t1 = run(cfg, lambda x: np.exp(-2.0 * x))
    t2 = run(cfg, np.exp(-2.0 * grid.midpoints))
    assert np.array_equal(t1.m_series, t2.m_series)
    assert np.array_equal(t1.final_state.values, t2.final_state.values)


def test_run_distance_to_equilibrium_decreases():
    grid = _grid(dx=0.01, x_max=6.0)
    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=0.05)
    eq = stepper_equilibrium(model, grid)
    cfg = SimulationConfig(grid=grid, model=model, t_end=8.0, record_every=50)
    trace = run(cfg, preset_density(grid, "uniform01"), steady=eq)
    d = trace.l1_dist_to_F
    assert d is not None and d[0] > 0.0
    assert d[-1] < 1e-3 * d[0]
    # monotone after the initial transient has cleared the threshold
    late = trace.times >= 2.0
    assert np.all(np.diff(d[late]) <= 1e-12)


def test_run_with_distributed_delay():
    grid = _grid()
    cfg = SimulationConfig(grid=grid, model=StepRate(sigma_plus=0.5,
                                                     sigma_minus=0.25,
                                                     lam=0.05),
                           kernel=DelayKernel.exponential(theta=2.0),
                           t_end=0.5, record_every=5)
    trace = run(cfg, preset_density(grid, "uniform01"))
    assert np.max(np.abs(trace.mass_series - 1.0)) < 1e-12
    assert np.all(np.isfinite(trace.m_series))
    # the constant pre-history keeps the early activity near its start
    assert abs(trace.m_series[1] - trace.m_series[0]) < 5e-3


def test_run_refuses_zero_rest_mass_in_strong_regime():
    # all mass below the resting threshold and a coupling beyond the
    # strong-regime knee: the discharge floor argument is void
    grid = _grid()
    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=40.0)
    cfg = SimulationConfig(grid=grid, model=model, t_end=1.0)
    with pytest.raises(DegenerateInputError):
        run(cfg, preset_density(grid, "spike"))
    cfg_ok = SimulationConfig(grid=grid, model=model, t_end=1.0,
                              allow_zero_kappa0=True)
    trace = run(cfg_ok, preset_density(grid, "spike"))
    assert np.max(np.abs(trace.mass_series - 1.0)) < 1e-12


def test_run_rejects_too_short_horizon():
    grid = _grid()
    cfg = SimulationConfig(grid=grid, model=ConstantRate(k0=1.0),
                           t_end=0.001)
    with pytest.raises(ValueError):
        run(cfg, preset_density(grid, "uniform01"))


def test_simulation_config_validation():
    grid = _grid()
    model = ConstantRate(k0=1.0)
    with pytest.raises(ValueError):
        SimulationConfig(grid=grid, model=model, t_end=-1.0)
    with pytest.raises(ValueError):
        SimulationConfig(grid=grid, model=model, record_every=0)
    with pytest.raises(ValueError):
        SimulationConfig(grid=grid, model=model, fixed_point_tol=0.0)
    with pytest.raises(ValueError):
        SimulationConfig(grid=grid, model=model, q=-1.0)
    assert SimulationConfig(grid=grid, model=model).dt == grid.dx


# ---------------------------------------------------------------------------
# decay fits

def _synthetic_trace(alpha, C, t_end=10.0, n=101):
    t = np.linspace(0.0, t_end, n)
    return SimpleNamespace(times=t, l1_dist_to_F=C * np.exp(alpha * t))


def test_decay_fit_recovers_exact_exponential():
    fit = decay_fit(_synthetic_trace(-0.5, 1.0), (0.0, 10.0))
    assert fit.alpha == pytest.approx(-0.5, abs=1e-9)
    assert fit.C == pytest.approx(1.0, abs=1e-9)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    fit2 = decay_fit(_synthetic_trace(-0.2, 3.0), (2.0, 8.0))
    assert fit2.alpha == pytest.approx(-0.2, abs=1e-9)
    assert fit2.C == pytest.approx(3.0, abs=1e-6)
    assert fit2.window == (2.0, 8.0)


def test_decay_fit_cuts_the_rounding_floor():
    trace = _synthetic_trace(-3.0, 1.0, t_end=12.0, n=241)
    floored = np.maximum(trace.l1_dist_to_F, 9e-14)
    trace = SimpleNamespace(times=trace.times, l1_dist_to_F=floored)
    with pytest.warns(UserWarning, match="rounding floor"):
        fit = decay_fit(trace, (0.0, 12.0))
    assert fit.alpha == pytest.approx(-3.0, abs=1e-6)
    assert fit.window[1] < 12.0


def test_decay_fit_error_paths():
    trace = _synthetic_trace(-0.5, 1.0)
    with pytest.raises(ValueError):
        decay_fit(trace, (5.0, 5.0))
    with pytest.raises(ValueError):
        decay_fit(trace, (9.9, 10.0))  # two samples only
    flat = SimpleNamespace(times=trace.times,
                           l1_dist_to_F=np.full(trace.times.size, 1e-14))
    with pytest.raises(ValueError):
        decay_fit(flat, (0.0, 10.0))
    no_ref = SimpleNamespace(times=trace.times, l1_dist_to_F=None)
    with pytest.raises(ValueError):
        decay_fit(no_ref, (0.0, 10.0))


# ---------------------------------------------------------------------------
# discrete equilibrium

def test_stepper_equilibrium_constant_rate():
    grid = _grid(dx=1e-3, x_max=10.0)
    eq = stepper_equilibrium(ConstantRate(k0=2.0), grid)
    assert eq.M == pytest.approx(2.0, abs=1e-12)
    ratio = math.exp(-2.0 * grid.dx)
    geometric = ratio ** np.arange(grid.n_cells)
    geometric /= geometric.sum() * grid.dx
    assert np.max(np.abs(eq.F - geometric)) < 1e-12
    assert eq.residual_activity < 1e-12


def test_stepper_equilibrium_tracks_the_cell_exact_solver():
    from agenet import solve_steady_state
    grid = _grid(dx=0.01, x_max=10.0)
    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=0.05)
    eq = stepper_equilibrium(model, grid)
    ss = solve_steady_state(model, grid)
    # the two references differ by the first-order scheme bias
    assert abs(eq.M - ss.M) < 5.0 * grid.dx
    assert grid.l1_distance(eq.F, ss.F) < 10.0 * grid.dx
