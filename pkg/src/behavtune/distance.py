"""Output distance, per-input specification fits and the sampled distance estimators."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from behavtune.inputs import FourierSignal
from behavtune.optim import BFGS, OptimizerConfig, run_optimizer
from behavtune.trajectory import (NonFiniteState, SystemFamily, TimeGrid, Trajectory,
                                  input_stages, simulate)

CSV_SCHEMA = "# behavtune-csv schema=1"


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DistanceConfig:
    """Window of the squared L2 output distance; quadrature is trapezoidal on the grid."""

    transient_cutoff: float = 0.0

    def __post_init__(self):
        if self.transient_cutoff < 0:
            raise ValueError("transient_cutoff must be nonnegative")


def inner_config(iterations: int = 100, gtol: float = 1e-10) -> OptimizerConfig:
    return OptimizerConfig(kind=BFGS, iterations=iterations, gtol=gtol)


DEFAULT_INNER = inner_config()


def quadrature_weights(grid: TimeGrid, cfg: DistanceConfig) -> np.ndarray:
    """Trapezoid weights over grid points with t >= transient_cutoff."""
    if cfg.transient_cutoff >= grid.t_final - grid.t_start:
        raise ValueError("transient_cutoff must be below the horizon")
    n = grid.n_points
    k0 = int(np.ceil((cfg.transient_cutoff) / grid.dt - 1e-9))
    w = np.zeros(n)
    if k0 < n - 1:
        w[k0:] = grid.dt
        w[k0] = w[-1] = 0.5 * grid.dt
    return w


def output_distance(o1: Trajectory, o2: Trajectory, cfg: DistanceConfig = DistanceConfig()) -> float:
    if o1.grid != o2.grid:
        raise GridMismatch(f"grids differ: {o1.grid} vs {o2.grid}")
    if o1.dim != o2.dim:
        raise GridMismatch("output dimensions differ")
    w = quadrature_weights(o1.grid, cfg)
    diff = o1.values - o2.values
    return float(w @ np.sum(diff * diff, axis=1))


@dataclass
class InnerFitResult:
    q: np.ndarray
    distance: float
    n_evals: int = 0
    converged: bool = False


def _spec_objective(spec: SystemFamily, target: np.ndarray, u: np.ndarray,
                    grid: TimeGrid, w: np.ndarray):
    def fun(theta):
        q = spec.decode(theta)
        try:
            o, dO, _ = simulate(spec, q, u, grid, sensitivity=True)
        except NonFiniteState:
            return np.inf, np.full(theta.shape, np.nan)
        r = target - o
        with np.errstate(over="ignore", invalid="ignore"):
            val = float(w @ (r * r))
            grad = -2.0 * ((w * r) @ dO) * spec.decode_jacobian(theta)
        return val, grad
    return fun


def _fit(spec: SystemFamily, target: np.ndarray, u: np.ndarray, grid: TimeGrid,
         w: np.ndarray, q_init, inner_cfg: OptimizerConfig) -> InnerFitResult:
    q_init = spec.check_params(q_init)
    fun = _spec_objective(spec, target, u, grid, w)
    theta0 = spec.encode(q_init)
    res = run_optimizer(fun, theta0, inner_cfg)
    if not np.isfinite(res.loss):
        return InnerFitResult(q_init.copy(), np.inf, res.n_evals, False)
    # avoid a log/exp round trip when the start point was kept
    q = q_init.copy() if np.array_equal(res.x, theta0) else spec.decode(res.x)
    return InnerFitResult(q, res.loss, res.n_evals, res.converged)


def fit_spec_to_input(spec: SystemFamily, target_output: Trajectory, input: FourierSignal,
                      q_init, inner_cfg: OptimizerConfig = DEFAULT_INNER,
                      cfg: DistanceConfig = DistanceConfig()) -> InnerFitResult:
    """Best specification parameters for one input, warm-started at ``q_init``.

    The fit is inexact; the returned distance is an upper bound on the true
    minimum and never exceeds the objective at ``q_init``.
    """
    grid = target_output.grid
    if target_output.dim != 1:
        raise GridMismatch("scalar outputs expected")
    w = quadrature_weights(grid, cfg)
    return _fit(spec, target_output.values[:, 0], input_stages(input, grid), grid, w,
                q_init, inner_cfg)


@dataclass
class Estimate:
    value: float
    fits: list
    n_failed: int = 0
    system_outputs: Optional[list] = field(default=None, repr=False)

    @property
    def distances(self) -> np.ndarray:
        return np.array([f.distance for f in self.fits])


def ordered_map(fn, items, workers: int = 1) -> list:
    """Map preserving order; threads are used only when workers > 1."""
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def estimate_d_rho(system: SystemFamily, p, spec: SystemFamily,
                   sample: Sequence[FourierSignal],
                   warm_starts: Optional[Sequence] = None,
                   inner_cfg: OptimizerConfig = DEFAULT_INNER,
                   cfg: DistanceConfig = DistanceConfig(),
                   grid: TimeGrid = TimeGrid(), workers: int = 1,
                   keep_outputs: bool = False) -> Estimate:
    """Sample mean of per-input fitted distances.

    Raises NonFiniteState if the system itself cannot be integrated; failed
    specification fits count as infinite distance.
    """
    p = system.check_params(p)
    if warm_starts is not None and len(warm_starts) != len(sample):
        raise ValueError("need one warm start per sample element")
    w = quadrature_weights(grid, cfg)

    def one(k):
        u = input_stages(sample[k], grid)
        o, _, _ = simulate(system, p, u, grid)
        q0 = spec.default_params if warm_starts is None else warm_starts[k]
        return _fit(spec, o, u, grid, w, q0, inner_cfg), o

    results = ordered_map(one, range(len(sample)), workers)
    fits = [r[0] for r in results]
    # summed in sample order so the value does not depend on worker count
    total = 0.0
    for f in fits:
        total += f.distance
    n_failed = sum(1 for f in fits if not np.isfinite(f.distance))
    return Estimate(total / len(fits), fits, n_failed,
                    [r[1] for r in results] if keep_outputs else None)


def estimate_d_rho_eps(fits: Sequence, epsilon: float) -> float:
    """Fraction of fits whose distance strictly exceeds epsilon."""
    if len(fits) == 0:
        raise ValueError("no fits")
    d = np.array([f.distance if isinstance(f, InnerFitResult) else f for f in fits], dtype=float)
    return float(np.count_nonzero(d > epsilon)) / d.size


def confidence_interval(d_hat: float, n: int) -> tuple[float, float]:
    """Add-two-successes-and-failures 95% interval; returns (center, halfwidth)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= d_hat <= 1.0:
        raise ValueError("d_hat must lie in [0, 1]")
    n_t = n + 4
    center = (n * d_hat + 2.0) / n_t
    return center, 2.0 * np.sqrt(center * (1.0 - center) / n_t)


@dataclass(frozen=True)
class EpsilonCurvePoint:
    epsilon: float
    fraction: float
    ci_center: float
    ci_halfwidth: float

    @property
    def lower(self) -> float:
        return max(0.0, self.ci_center - self.ci_halfwidth)

    @property
    def upper(self) -> float:
        return min(1.0, self.ci_center + self.ci_halfwidth)


def epsilon_curve(fits: Sequence, epsilons: Sequence[float]) -> list[EpsilonCurvePoint]:
    eps = np.asarray(epsilons, dtype=float)
    if np.any(np.diff(eps) < 0):
        raise ValueError("epsilons must be sorted ascending")
    out = []
    for e in eps:
        frac = estimate_d_rho_eps(fits, e)
        c, h = confidence_interval(frac, len(fits))
        out.append(EpsilonCurvePoint(float(e), frac, c, h))
    return out


def write_fits_csv(path, fits: Sequence[InnerFitResult]) -> None:
    n_q = max((len(f.q) for f in fits), default=0)
    with open(path, "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        wr = csv.writer(fh)
        wr.writerow(["sample_index", "distance", "converged"] + [f"q{j}" for j in range(n_q)])
        for k, f in enumerate(fits):
            wr.writerow([k, repr(float(f.distance)), int(f.converged)] + [repr(float(v)) for v in f.q])


def read_fits_csv(path) -> list[InnerFitResult]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    if "distance" not in header:
        raise KeyError("distance column missing")
    i_d = header.index("distance")
    i_c = header.index("converged") if "converged" in header else None
    q_cols = [i for i, h in enumerate(header) if h.startswith("q")]
    return [InnerFitResult(np.array([float(r[i]) for i in q_cols]), float(r[i_d]), 0,
                           bool(int(r[i_c])) if i_c is not None else False) for r in body]


def write_curve_csv(path, curve: Sequence[EpsilonCurvePoint]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        wr = csv.writer(fh)
        wr.writerow(["epsilon", "fraction", "ci_center", "ci_halfwidth"])
        for pt in curve:
            wr.writerow([repr(pt.epsilon), repr(pt.fraction), repr(pt.ci_center), repr(pt.ci_halfwidth)])
