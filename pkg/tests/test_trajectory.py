import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from behavtune import (KuramotoConfig, NonFiniteState, TimeGrid, Trajectory, integrate,
                       make_kuramoto, make_scalar_linear, output_trajectory,
                       sample_inputs, InputEnsembleSpec, evaluate_signal)
from conftest import ONE, ZERO, blowup_family, exp_decay_family


def decay_error(dt):
    x = integrate(exp_decay_family(), [1.0], ZERO, TimeGrid(1.0, dt))
    return abs(x.values[-1, 0] - np.exp(-1.0))


def test_exp_decay_accuracy():
    assert decay_error(0.01) <= 1e-7


def test_rk4_fourth_order():
    errs = [decay_error(dt) for dt in (0.02, 0.01, 0.005)]
    assert errs[0] / errs[1] >= 14
    assert errs[1] / errs[2] >= 14


def test_richardson_self_convergence():
    # successive differences of the end state shrink by ~2^4
    sys = make_scalar_linear(1.0)
    sig = sample_inputs(InputEnsembleSpec(n_modes=2, seed=3), 1)[0]
    ends = [integrate(sys, [2.0], sig, TimeGrid(1.0, dt)).values[-1, 0]
            for dt in (0.04, 0.02, 0.01)]
    ratio = abs(ends[0] - ends[1]) / abs(ends[1] - ends[2])
    assert 12 < ratio < 20


def test_diffusive_origin_is_fixed_point(diffusive10, grid):
    x = integrate(diffusive10, np.linspace(0.5, 3, 10), ZERO, grid)
    assert np.all(x.values == 0.0)
    o = output_trajectory(diffusive10, np.ones(10), ZERO, grid)
    assert np.all(o.values == 0.0)


def test_kuramoto_equilibrium(grid):
    k = make_kuramoto(KuramotoConfig(4))
    o = output_trajectory(k, np.ones(k.param_dim), ZERO, grid)
    assert np.all(o.values == 0.0)


def test_scalar_linear_step_response():
    o = output_trajectory(make_scalar_linear(1.0), [1.0], ONE, TimeGrid(1.0, 0.01))
    assert o.values[-1, 0] == pytest.approx(np.exp(-1.0), abs=1e-6)
    t = o.times
    assert np.max(np.abs(o.values[:, 0] - np.exp(-t))) < 1e-6


def test_deterministic(diffusive10, grid):
    sig = sample_inputs(InputEnsembleSpec(seed=5), 1)[0]
    a = integrate(diffusive10, np.full(10, 0.7), sig, grid).values
    b = integrate(diffusive10, np.full(10, 0.7), sig, grid).values
    assert a.tobytes() == b.tobytes()


def test_output_uses_state_at_same_grid_point(diffusive10, grid):
    sig = sample_inputs(InputEnsembleSpec(seed=6), 1)[0]
    p = np.linspace(0.3, 2.0, 10)
    x = integrate(diffusive10, p, sig, grid)
    o = output_trajectory(diffusive10, p, sig, grid)
    expected = evaluate_signal(sig, grid.times()) - x.values[:, 0]
    np.testing.assert_allclose(o.values[:, 0], expected, rtol=0, atol=1e-12)


def test_initial_state(diffusive10, grid):
    sig = sample_inputs(InputEnsembleSpec(seed=6), 1)[0]
    x = integrate(diffusive10, np.ones(10), sig, grid)
    assert np.all(x.values[0] == 0.0)
    assert x.values.shape == (grid.n_points, 10)


def test_non_finite_state_reports_step():
    with pytest.raises(NonFiniteState) as exc:
        integrate(blowup_family(), [1.0], ZERO, TimeGrid(3.0, 0.01))
    assert 90 <= exc.value.step < 300


def test_rejects_bad_params(diffusive10, grid):
    with pytest.raises(ValueError):
        integrate(diffusive10, np.ones(9), ZERO, grid)
    with pytest.raises(ValueError):
        integrate(diffusive10, -np.ones(10), ZERO, grid)


@given(st.floats(0.5, 50.0), st.sampled_from([0.1, 0.01, 0.005, 0.25]))
def test_grid_points_are_exact_multiples(t_final, dt):
    g = TimeGrid(t_final, dt)
    assert g.n_points == round(t_final / dt) + 1
    t = g.times()
    k = np.arange(g.n_points)
    assert np.array_equal(t, k * dt)


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(0.0, 0.01)
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0.0)


def test_trajectory_length_checked(grid):
    with pytest.raises(ValueError):
        Trajectory(grid, np.zeros(5))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=10, max_size=10))
def test_encode_decode_roundtrip(diffusive10, theta):
    theta = np.array(theta)
    p = diffusive10.decode(theta)
    assert np.all(p > 0)
    np.testing.assert_allclose(diffusive10.encode(p), theta, atol=1e-12)


def test_decode_clamps_log_parameters(diffusive10):
    theta = np.array([-50.0, -10.0, -1.0, 0.0, 3.0, 9.99, 10.0, 10.5, 40.0, 1e3])
    p = diffusive10.decode(theta)
    assert np.all(np.isfinite(p))
    assert p.min() == np.exp(-10.0) and p.max() == np.exp(10.0)
    jac = diffusive10.decode_jacobian(theta)
    np.testing.assert_array_equal(jac[[0, 7, 8, 9]], 0.0)
    np.testing.assert_allclose(jac[2:7], p[2:7])
