"""Parametrized input-output ODE systems on a uniform time grid."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from behavtune._rk4 import rk4_run
from behavtune.inputs import FourierSignal, evaluate_signal


class NonFiniteState(ArithmeticError):
    """Raised when an integration step produces a non-finite value."""

    def __init__(self, step: int):
        super().__init__(f"non-finite state produced at step {step}")
        self.step = step


@dataclass(frozen=True)
class TimeGrid:
    t_final: float = 10.0
    dt: float = 0.01
    t_start: float = 0.0

    def __post_init__(self):
        if not self.t_final > self.t_start:
            raise ValueError("t_final must exceed t_start")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def n_points(self) -> int:
        return int(round((self.t_final - self.t_start) / self.dt)) + 1

    @property
    def n_steps(self) -> int:
        return self.n_points - 1

    def times(self) -> np.ndarray:
        # multiplicative, so point k is exactly t_start + k * dt
        return self.t_start + np.arange(self.n_points) * self.dt

    def stage_times(self) -> np.ndarray:
        """Times at half-step resolution, as consumed by the RK4 kernel."""
        return self.t_start + np.arange(2 * self.n_steps + 1) * (0.5 * self.dt)


@dataclass
class Trajectory:
    grid: TimeGrid
    values: np.ndarray  # (n_points, dim)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.shape[0] != self.grid.n_points:
            raise ValueError(
                f"expected {self.grid.n_points} points, got {self.values.shape[0]}")

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()


def _zero_init_sens(system: "SystemFamily", p: np.ndarray) -> np.ndarray:
    return np.zeros((system.state_dim, system.param_dim))


@dataclass
class SystemFamily:
    """A parametrized IO-ODE: dynamics, output map, initial state, domain.

    ``rhs``, ``sens``, ``output`` and ``output_sens`` are numba-compiled
    callables following the conventions of :mod:`behavtune._rk4`;
    ``consts`` carries the fixed model data they read. ``positive[j]`` marks
    parameter ``j`` as living in R+ (optimized in log space). Decoding clamps
    log-parameters to ``[-log_bound, log_bound]``; far outside that range the
    fixed-step integrator turns stiff and fits end up hugging its stability edge.
    """

    name: str
    state_dim: int
    param_dim: int
    rhs: Any
    sens: Any
    output: Any
    output_sens: Any
    init_fn: Callable[[np.ndarray], np.ndarray]
    consts: np.ndarray
    positive: tuple
    default_params: np.ndarray
    init_sens_fn: Callable[["SystemFamily", np.ndarray], np.ndarray] = _zero_init_sens
    meta: dict = field(default_factory=dict)
    log_bound: float = 10.0

    def __post_init__(self):
        self.consts = np.ascontiguousarray(self.consts, dtype=float)
        self.default_params = np.asarray(self.default_params, dtype=float)
        if len(self.positive) != self.param_dim:
            raise ValueError("positive flags must match param_dim")

    def check_params(self, p) -> np.ndarray:
        p = np.ascontiguousarray(p, dtype=float)
        if p.shape != (self.param_dim,):
            raise ValueError(f"{self.name}: expected {self.param_dim} parameters, got shape {p.shape}")
        pos = np.asarray(self.positive, dtype=bool)
        if np.any(p[pos] <= 0):
            raise ValueError(f"{self.name}: parameters must be positive where flagged")
        return p

    def encode(self, p) -> np.ndarray:
        """Map parameters to unconstrained coordinates (log where positive)."""
        p = np.asarray(p, dtype=float)
        pos = np.asarray(self.positive, dtype=bool)
        return np.where(pos, np.log(np.where(pos, p, 1.0)), p)

    def decode(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        pos = np.asarray(self.positive, dtype=bool)
        clamped = np.clip(np.where(pos, theta, 0.0), -self.log_bound, self.log_bound)
        return np.where(pos, np.exp(clamped), theta)

    def decode_jacobian(self, theta) -> np.ndarray:
        """Diagonal of d(params)/d(theta)."""
        theta = np.asarray(theta, dtype=float)
        pos = np.asarray(self.positive, dtype=bool)
        t = np.where(pos, theta, 0.0)
        inside = np.abs(t) <= self.log_bound
        return np.where(pos, np.where(inside, np.exp(np.clip(t, -self.log_bound, self.log_bound)), 0.0), 1.0)


def input_stages(signal: FourierSignal, grid: TimeGrid) -> np.ndarray:
    """The input sampled at grid points and step midpoints."""
    return np.ascontiguousarray(evaluate_signal(signal, grid.stage_times()))


def simulate(system: SystemFamily, p, u: np.ndarray, grid: TimeGrid, *,
             sensitivity: bool = False, record_states: bool = False):
    """Run the kernel on precomputed input stages.

    Returns ``(o, dO, xs)``: the output on the grid, its derivative with
    respect to the natural parameters (or None), and the states (or None).
    Raises NonFiniteState on blow-up.
    """
    p = np.ascontiguousarray(p, dtype=float)
    n_steps = grid.n_steps
    x0 = np.ascontiguousarray(system.init_fn(p), dtype=float)
    if x0.shape != (system.state_dim,):
        raise ValueError(f"{system.name}: initial state has shape {x0.shape}")
    if sensitivity:
        S0 = np.ascontiguousarray(system.init_sens_fn(system, p), dtype=float)
    else:
        S0 = np.zeros((system.state_dim, 0))
    xs = np.empty((n_steps + 1 if record_states else 0, system.state_dim))
    o = np.empty(n_steps + 1)
    dO = np.empty((n_steps + 1, S0.shape[1]))
    fail = rk4_run(system.rhs, system.sens, system.output, system.output_sens,
                   x0, S0, u, p, system.consts, float(grid.t_start), float(grid.dt),
                   n_steps, xs, o, dO)
    if fail >= 0:
        raise NonFiniteState(int(fail))
    return o, (dO if sensitivity else None), (xs if record_states else None)


def integrate(system: SystemFamily, p, signal: FourierSignal, grid: TimeGrid) -> Trajectory:
    """State trajectory of ``system`` at parameters ``p`` driven by ``signal``."""
    p = system.check_params(p)
    _, _, xs = simulate(system, p, input_stages(signal, grid), grid, record_states=True)
    return Trajectory(grid, xs)


def output_trajectory(system: SystemFamily, p, signal: FourierSignal,
                      grid: TimeGrid) -> Trajectory:
    p = system.check_params(p)
    o, _, _ = simulate(system, p, input_stages(signal, grid), grid)
    return Trajectory(grid, o)
