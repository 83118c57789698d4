import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from behavtune import (InputEnsembleSpec, JointParams, JointProblem, KuramotoConfig, TimeGrid,
                       barabasi_albert, integrate, kuramoto_frequencies, make_diffusive,
                       make_kuramoto, make_scalar_linear, output_trajectory,
                       random_initial_params, sample_inputs)
from behavtune.distance import DistanceConfig
from behavtune.models import check_adjacency, is_connected
from conftest import ONE, ZERO


def test_ba_triangle():
    A = barabasi_albert(3, 2, seed=123)
    np.testing.assert_array_equal(A, np.ones((3, 3)) - np.eye(3))


def test_ba_edge_count():
    A = barabasi_albert(10, 2, seed=0)
    assert A.sum() / 2 == 17


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 30), m=st.integers(1, 5), seed=st.integers(0, 2**32))
def test_ba_properties(n, m, seed):
    m = min(m, n - 1)
    A = barabasi_albert(n, m, seed)
    check_adjacency(A)
    assert is_connected(A)
    edges = A.sum() / 2
    assert A.sum(axis=1).sum() == 2 * edges
    assert edges == m * (m + 1) / 2 + (n - m - 1) * m
    np.testing.assert_array_equal(A, barabasi_albert(n, m, seed))


def test_ba_rejects_bad_m():
    with pytest.raises(ValueError):
        barabasi_albert(3, 3)


def test_diffusive_single_node():
    # n = 1: dx = -p x^3 - i
    sys = make_diffusive(np.zeros((1, 1)))
    g = TimeGrid(2.0, 0.01)
    x = integrate(sys, [1.0], ONE, g).values[:, 0]
    o = output_trajectory(sys, [1.0], ONE, g).values[:, 0]
    assert o[0] == 1.0
    assert np.all(np.diff(x) < 0)
    # the state tends to the root of -x^3 - 1 = 0
    assert x[-1] == pytest.approx(-1.0, abs=0.05)


def test_diffusive_automorphism():
    # star centred at node 1: leaves are interchangeable
    A = np.zeros((4, 4))
    A[0, 1:] = A[1:, 0] = 1
    sys = make_diffusive(A)
    sig = sample_inputs(InputEnsembleSpec(seed=4), 1)[0]
    g = TimeGrid(5.0, 0.01)
    p = np.array([0.5, 1.0, 2.0, 3.0])
    perm = np.array([0, 3, 1, 2])
    o1 = output_trajectory(sys, p, sig, g).values
    o2 = output_trajectory(sys, p[perm], sig, g).values
    np.testing.assert_allclose(o1, o2, rtol=0, atol=1e-12)


def test_diffusive_bounded():
    A = barabasi_albert(10, 2, 0)
    sys = make_diffusive(A)
    g = TimeGrid(10.0, 0.01)
    sample = sample_inputs(InputEnsembleSpec(seed=21), 100)
    for k, sig in enumerate(sample):
        p = random_initial_params(sys, 1000 + k)
        x = integrate(sys, p, sig, g).values
        assert np.max(np.abs(x)) < 1e3


def test_kuramoto_single_node_is_spec():
    cfg = KuramotoConfig(1)
    k1 = make_kuramoto(cfg)
    assert k1.param_dim == 1 and k1.state_dim == 2
    g = TimeGrid(1.0, 0.01)
    # phi' = 1 - e^-t, so phi(1) = e^-1 and o(1) = 1 - e^-1
    x = integrate(k1, [1.0], ONE, g).values
    o = output_trajectory(k1, [1.0], ONE, g).values[:, 0]
    assert x[-1, 0] == pytest.approx(np.exp(-1.0), abs=1e-6)
    assert x[-1, 1] == pytest.approx(1 - np.exp(-1.0), abs=1e-6)
    assert o[-1] == pytest.approx(1 - np.exp(-1.0), abs=1e-6)


def test_kuramoto_single_node_matches_network_of_one():
    sig = sample_inputs(InputEnsembleSpec(seed=8), 1)[0]
    g = TimeGrid(5.0, 0.01)
    a = make_kuramoto(KuramotoConfig(1, omegas=[0.0], spread=3.0, coupling=2.0))
    b = make_kuramoto(KuramotoConfig(1))
    oa = output_trajectory(a, [0.7], sig, g).values
    ob = output_trajectory(b, [0.7], sig, g).values
    assert oa.tobytes() == ob.tobytes()


def test_kuramoto_dimensions():
    k = make_kuramoto(KuramotoConfig(10, omega_seed=0))
    assert k.state_dim == 20
    assert k.param_dim == 10 + 45
    inner = make_kuramoto(KuramotoConfig(10, omega_seed=0, tunable_pairs="interior"))
    assert inner.param_dim == 10 + 28
    free = make_kuramoto(KuramotoConfig(1, tunable_omega=True))
    assert free.param_dim == 2 and free.positive == (True, False)


@given(n=st.integers(1, 30), seed=st.integers(0, 2**32), s=st.floats(0.1, 5))
def test_frequency_normalization(n, seed, s):
    cfg = KuramotoConfig(n, omega_seed=seed, spread=s)
    om = cfg.scaled_omegas
    assert om[0] == 0.0
    assert abs(om.mean()) < 1e-12


def test_frequencies_seeded():
    np.testing.assert_array_equal(kuramoto_frequencies(10, 3), kuramoto_frequencies(10, 3))


def test_scalar_linear():
    sys = make_scalar_linear(1.0)
    g = TimeGrid(4.0, 0.01)
    assert np.all(output_trajectory(sys, [1.0], ZERO, g).values == 0)
    o = output_trajectory(sys, [1.0], ONE, g).values[:, 0]
    np.testing.assert_allclose(o, np.exp(-g.times()), atol=1e-6)
    # x settles at 1/a, so the output tends to 1 - 1/a
    for a in (5.0, 50.0):
        end = output_trajectory(sys, [a], ONE, g).values[-1, 0]
        assert end == pytest.approx(1 - 1 / a, abs=1e-6)
    with pytest.raises(ValueError):
        make_scalar_linear(0.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-30, 30), min_size=3, max_size=3))
def test_positivity_of_decoded_params(theta):
    k = make_kuramoto(KuramotoConfig(2))
    p = k.decode(np.array(theta))
    assert np.all(p > 0)


@pytest.mark.parametrize("cfg", [
    KuramotoConfig(4, omega_seed=1, spread=2.0),
    KuramotoConfig(4, omega_seed=1, tunable_pairs="interior"),
    KuramotoConfig(3, omega_seed=2, tunable_omega=True),
])
def test_kuramoto_sensitivities(cfg):
    k = make_kuramoto(cfg)
    spec = make_kuramoto(KuramotoConfig(1, tunable_omega=True))
    sample = sample_inputs(InputEnsembleSpec(n_modes=3, seed=3), 2)
    prob = JointProblem(k, spec, sample, DistanceConfig(0.5), TimeGrid(3.0, 0.01))
    p = random_initial_params(k, 5)
    theta = prob.pack(JointParams(p, [np.array([1.3, 0.2]), np.array([0.8, -0.1])]))
    g = prob.loss_and_grad(theta)[1]
    fd = prob.fd_gradient(theta)
    np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-9)
