"""Smooth random inputs: truncated Fourier series with random amplitudes and phases.

A signal is ``i(t) = sum_l a_l cos(2 pi l t + theta_l)`` for l = 0..L. Samples
are drawn with numpy's ``Generator(PCG64(seed))``; every signal consumes
``L + 1`` normal draws followed by ``L + 1`` uniform draws, in order, so a
sample of size n is a prefix of the sample of size n + 1 with the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FourierSignal:
    amplitudes: tuple
    phases: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.amplitudes)
        th = tuple(float(v) % TWO_PI for v in self.phases)
        if len(a) != len(th):
            raise ValueError("amplitudes and phases must have equal length")
        if len(a) == 0:
            raise ValueError("a signal needs at least one mode")
        # float % 2pi can round up to exactly 2pi for tiny negative inputs
        th = tuple(0.0 if v >= TWO_PI else v for v in th)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "phases", th)

    @property
    def n_modes(self) -> int:
        """L, the highest harmonic."""
        return len(self.amplitudes) - 1

    def lipschitz_bound(self) -> float:
        return float(sum(abs(a) * TWO_PI * l for l, a in enumerate(self.amplitudes)))

    def to_json(self) -> dict:
        return {"amplitudes": list(self.amplitudes), "phases": list(self.phases)}

    @classmethod
    def from_json(cls, d: dict) -> "FourierSignal":
        return cls(tuple(d["amplitudes"]), tuple(d["phases"]))


def evaluate_signal(signal: FourierSignal, t):
    """Evaluate the signal at scalar or array ``t``."""
    t_arr = np.asarray(t, dtype=float)
    a = np.asarray(signal.amplitudes)
    th = np.asarray(signal.phases)
    l = np.arange(a.size, dtype=float)
    vals = np.cos(TWO_PI * t_arr[..., None] * l + th) @ a
    if np.ndim(t) == 0:
        return float(vals)
    return vals


@dataclass(frozen=True)
class InputEnsembleSpec:
    """Probability measure on inputs: a_l ~ N(0, sigma^2), theta_l ~ U[0, 2pi)."""

    n_modes: int = 10
    amplitude_sigma: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.n_modes < 0:
            raise ValueError("n_modes must be nonnegative")
        if self.amplitude_sigma is not None and not self.amplitude_sigma > 0:
            raise ValueError("amplitude_sigma must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def sigma(self) -> float:
        if self.amplitude_sigma is None:
            return 1.0 / np.sqrt(self.n_modes + 1)
        return float(self.amplitude_sigma)


def sample_inputs(spec: InputEnsembleSpec, n: int) -> list[FourierSignal]:
    if n < 1:
        raise ValueError("sample size must be at least 1")
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    k = spec.n_modes + 1
    out = []
    for _ in range(n):
        a = rng.normal(0.0, spec.sigma, size=k)
        th = rng.uniform(0.0, TWO_PI, size=k)
        out.append(FourierSignal(tuple(a), tuple(th)))
    return out
