import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from behavtune import FourierSignal, InputEnsembleSpec, evaluate_signal, sample_inputs


def test_zero_amplitudes():
    sig = FourierSignal((0.0, 0.0, 0.0), (0.1, 2.0, 4.0))
    assert np.all(evaluate_signal(sig, np.linspace(0, 5, 50)) == 0.0)


def test_constant_mode():
    sig = FourierSignal((1.0, 0.0), (0.0, 1.0))
    np.testing.assert_allclose(evaluate_signal(sig, np.linspace(0, 3, 31)), 1.0)


def test_phase_quadrature():
    sig = FourierSignal((0.0, 2.0), (0.0, np.pi / 2))
    assert evaluate_signal(sig, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_period_one():
    sig = sample_inputs(InputEnsembleSpec(n_modes=5, seed=9), 1)[0]
    t = np.linspace(0, 1, 17)
    np.testing.assert_allclose(evaluate_signal(sig, t), evaluate_signal(sig, t + 1.0), atol=1e-12)


def test_phases_normalized():
    sig = FourierSignal((1.0, 1.0, 1.0), (-0.5, 7.0, 2 * np.pi))
    assert all(0.0 <= th < 2 * np.pi for th in sig.phases)
    assert evaluate_signal(sig, 0.3) == pytest.approx(
        np.cos(-0.5) + np.cos(2 * np.pi * 0.3 + 7.0) + np.cos(4 * np.pi * 0.3))


def test_length_mismatch():
    with pytest.raises(ValueError):
        FourierSignal((1.0, 2.0), (0.0,))


def test_sample_deterministic():
    spec = InputEnsembleSpec(n_modes=4, seed=1234)
    assert sample_inputs(spec, 10) == sample_inputs(spec, 10)
    assert sample_inputs(spec, 10) != sample_inputs(InputEnsembleSpec(n_modes=4, seed=1235), 10)


def test_sample_prefix_stable():
    spec = InputEnsembleSpec(n_modes=3, seed=5)
    assert sample_inputs(spec, 4) == sample_inputs(spec, 9)[:4]


def test_amplitude_mean():
    sigma = 0.8
    sample = sample_inputs(InputEnsembleSpec(n_modes=0, amplitude_sigma=sigma, seed=11), 10_000)
    a0 = np.array([s.amplitudes[0] for s in sample])
    assert abs(a0.mean()) <= 4 * sigma / np.sqrt(10_000)
    assert a0.std() == pytest.approx(sigma, rel=0.05)


def test_phase_uniformity():
    sample = sample_inputs(InputEnsembleSpec(n_modes=2, seed=12), 10_000)
    th = np.array([s.phases for s in sample])
    for col in th.T:
        assert abs(np.mean(col < np.pi) - 0.5) <= 0.02


def test_default_sigma_scales_with_modes():
    assert InputEnsembleSpec(n_modes=10).sigma == pytest.approx(1 / np.sqrt(11))


def test_spec_validation():
    with pytest.raises(ValueError):
        InputEnsembleSpec(amplitude_sigma=0.0)
    with pytest.raises(ValueError):
        InputEnsembleSpec(seed=-1)
    with pytest.raises(ValueError):
        sample_inputs(InputEnsembleSpec(), 0)


def test_json_roundtrip():
    sig = sample_inputs(InputEnsembleSpec(n_modes=3, seed=2), 1)[0]
    d = json.loads(json.dumps(sig.to_json()))
    assert set(d) == {"amplitudes", "phases"}
    assert FourierSignal.from_json(d) == sig


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), L=st.integers(0, 12),
       t=st.floats(0, 10), h=st.floats(1e-6, 0.5))
def test_lipschitz_bound(seed, L, t, h):
    sig = sample_inputs(InputEnsembleSpec(n_modes=L, seed=seed), 1)[0]
    assert len(sig.amplitudes) == len(sig.phases) == L + 1
    assert all(0 <= th < 2 * np.pi for th in sig.phases)
    diff = abs(evaluate_signal(sig, t + h) - evaluate_signal(sig, t))
    assert diff <= h * sig.lipschitz_bound() + 1e-12
