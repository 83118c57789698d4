"""ADAM, AMSGrad and BFGS over a flat parameter vector.

All three keep the best point seen so far, so the returned loss never
exceeds the loss at the starting point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

ADAM = "ADAM"
AMSGRAD = "AMSGRAD"
BFGS = "BFGS"
KINDS = (ADAM, AMSGRAD, BFGS)

FunAndGrad = Callable[[np.ndarray], Tuple[float, np.ndarray]]


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = ADAM
    learning_rate: float = 0.01
    iterations: int = 100
    gradient_mode: str = "forward-sensitivity"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    # BFGS only
    gtol: float = 1e-10
    ftol: float = 1e-14
    max_backtracks: int = 40

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in KINDS:
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.gradient_mode not in ("forward-sensitivity", "finite-difference"):
            raise ValueError(f"unknown gradient mode {self.gradient_mode!r}")

    def label(self) -> str:
        if self.kind == BFGS:
            return f"BFGS x{self.iterations}"
        return f"{self.kind}({self.learning_rate:g}) x{self.iterations}"


@dataclass
class OptimResult:
    x: np.ndarray
    loss: float
    history: list = field(default_factory=list)
    n_evals: int = 0
    converged: bool = False
    flag: str = ""


class _Tracker:
    def __init__(self, fun: FunAndGrad):
        self.fun = fun
        self.n_evals = 0
        self.best_x = None
        self.best_f = np.inf
        self.history: list[float] = []

    def __call__(self, x):
        f, g = self.fun(x)
        f = float(f)
        self.n_evals += 1
        self.history.append(f)
        if np.isfinite(f) and (self.best_x is None or f < self.best_f):
            self.best_f = f
            self.best_x = np.array(x, dtype=float)
        return f, np.asarray(g, dtype=float)

    def result(self, x0, **kw) -> OptimResult:
        if self.best_x is None:
            return OptimResult(np.array(x0, dtype=float), np.inf, self.history,
                               self.n_evals, **kw)
        return OptimResult(self.best_x, self.best_f, self.history, self.n_evals, **kw)


def _adam(track: _Tracker, x0: np.ndarray, cfg: OptimizerConfig, amsgrad: bool) -> OptimResult:
    x = np.array(x0, dtype=float)
    f, g = track(x)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        return track.result(x0, flag="non-finite loss")
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    vmax = np.zeros_like(x)
    b1, b2 = cfg.beta1, cfg.beta2
    shrunk = 0
    for it in range(1, cfg.iterations + 1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        if amsgrad:
            vmax = np.maximum(vmax, v)
            step = cfg.learning_rate * m / (np.sqrt(vmax) + cfg.eps)
        else:
            mhat = m / (1 - b1 ** it)
            vhat = v / (1 - b2 ** it)
            step = cfg.learning_rate * mhat / (np.sqrt(vhat) + cfg.eps)
        # a step into a region where integration fails is halved, not taken
        for _ in range(cfg.max_backtracks):
            xn = x - step
            fn, gn = track(xn)
            if np.isfinite(fn) and np.all(np.isfinite(gn)):
                break
            step = 0.5 * step
            shrunk += 1
        else:
            return track.result(x0, flag="non-finite loss")
        x, f, g = xn, fn, gn
    return track.result(x0, flag=f"{shrunk} steps shrunk" if shrunk else "")


def _bfgs(track: _Tracker, x0: np.ndarray, cfg: OptimizerConfig) -> OptimResult:
    x = np.array(x0, dtype=float)
    f, g = track(x)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        return track.result(x0, flag="non-finite loss")
    n = x.size
    H = np.eye(n)
    scaled = False
    for _ in range(cfg.iterations):
        if np.max(np.abs(g), initial=0.0) <= cfg.gtol:
            return track.result(x0, converged=True, flag="gtol")
        d = -H @ g
        slope = g @ d
        if not slope < 0:
            H = np.eye(n)
            d = -g
            slope = g @ d
        step = 1.0
        accepted = False
        for _ in range(cfg.max_backtracks):
            xn = x + step * d
            fn, gn = track(xn)
            if np.isfinite(fn) and np.all(np.isfinite(gn)) and fn <= f + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return track.result(x0, flag="line search failed")
        s = xn - x
        y = gn - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if not scaled:
                H = np.eye(n) * (sy / (y @ y))
                scaled = True
            rho = 1.0 / sy
            Hy = H @ y
            H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (rho * rho * (y @ Hy) + rho) * np.outer(s, s)
        decrease = f - fn
        x, f, g = xn, fn, gn
        if decrease <= cfg.ftol * max(abs(f), 1e-300):
            return track.result(x0, converged=True, flag="ftol")
    converged = np.max(np.abs(g), initial=0.0) <= cfg.gtol
    return track.result(x0, converged=bool(converged), flag="gtol" if converged else "maxiter")


def run_optimizer(fun: FunAndGrad, x0, cfg: OptimizerConfig) -> OptimResult:
    """Minimize ``fun`` (returning loss and gradient) from ``x0``.

    With zero iterations the start point is evaluated once and returned.
    """
    x0 = np.asarray(x0, dtype=float)
    track = _Tracker(fun)
    if cfg.iterations == 0:
        track(x0)
        res = track.result(x0, flag="no iterations")
        res.x = x0.copy()
        return res
    if cfg.kind == BFGS:
        return _bfgs(track, x0, cfg)
    return _adam(track, x0, cfg, amsgrad=cfg.kind == AMSGRAD)
