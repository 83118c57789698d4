import dataclasses

import numba as nb
import numpy as np
import pytest

from behavtune import (FourierSignal, TimeGrid, barabasi_albert, make_diffusive,
                       make_scalar_linear, two_node_graph)

ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def constant_signal(value: float) -> FourierSignal:
    # the l = 0 mode is the constant a_0 cos(theta_0)
    return FourierSignal((value,), (0.0,))


ZERO = constant_signal(0.0)
ONE = constant_signal(1.0)


def exp_decay_family():
    """dx = -x with x(0) = 1 (scalar linear family, unit initial state)."""
    return dataclasses.replace(make_scalar_linear(1.0), init_fn=lambda p: np.ones(1))


@nb.njit(nogil=True)
def _blowup_rhs(x, u, p, c, t, out):
    out[0] = p[0] * x[0] * x[0]


@nb.njit(nogil=True)
def _blowup_sens(x, u, p, c, t, S, out):
    for j in range(S.shape[1]):
        out[0, j] = 2.0 * p[0] * x[0] * S[0, j]
    if S.shape[1] > 0:
        out[0, 0] += x[0] * x[0]


def blowup_family():
    """dx = p x^2, x(0) = 1: finite-time blow-up at t = 1/p."""
    return dataclasses.replace(make_scalar_linear(1.0), name="blowup", rhs=_blowup_rhs,
                               sens=_blowup_sens, init_fn=lambda p: np.ones(1))


@pytest.fixture(scope="session")
def grid():
    return TimeGrid(10.0, 0.01)


@pytest.fixture(scope="session")
def short_grid():
    return TimeGrid(3.0, 0.01)


@pytest.fixture(scope="session")
def diffusive10():
    return make_diffusive(barabasi_albert(10, 2, 0))


@pytest.fixture(scope="session")
def a2():
    return make_diffusive(two_node_graph())
