"""Joint tuning of system parameters and per-input specification parameters.

The sampled two-stage problem is solved in extensive form: a single flat
vector holds the (log-encoded) system parameters followed by one block of
specification parameters per sample element, and the mean output distance
over the sample is minimized jointly.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from behavtune.distance import (DEFAULT_INNER, DistanceConfig, estimate_d_rho, ordered_map,
                                quadrature_weights)
from behavtune.inputs import FourierSignal, InputEnsembleSpec, sample_inputs
from behavtune.optim import OptimizerConfig, OptimResult, run_optimizer
from behavtune.trajectory import NonFiniteState, SystemFamily, TimeGrid, input_stages, simulate


@dataclass
class JointParams:
    p: np.ndarray
    qs: list

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.qs = [np.asarray(q, dtype=float) for q in self.qs]


class JointProblem:
    """Extensive-form objective over (p, q_1..q_B) for a fixed sample."""

    def __init__(self, system: SystemFamily, spec: SystemFamily,
                 sample: Sequence[FourierSignal], cfg: DistanceConfig = DistanceConfig(),
                 grid: TimeGrid = TimeGrid(), workers: int = 1):
        self.system = system
        self.spec = spec
        self.sample = list(sample)
        self.cfg = cfg
        self.grid = grid
        self.workers = workers
        self.weights = quadrature_weights(grid, cfg)
        self.stages = [input_stages(s, grid) for s in self.sample]

    @property
    def size(self) -> int:
        return len(self.sample)

    @property
    def dim(self) -> int:
        return self.system.param_dim + self.size * self.spec.param_dim

    def pack(self, jp: JointParams) -> np.ndarray:
        if len(jp.qs) != self.size:
            raise ValueError(f"expected {self.size} spec parameter blocks, got {len(jp.qs)}")
        parts = [self.system.encode(self.system.check_params(jp.p))]
        parts += [self.spec.encode(self.spec.check_params(q)) for q in jp.qs]
        return np.concatenate(parts)

    def unpack(self, theta) -> JointParams:
        theta = np.asarray(theta, dtype=float)
        P, Q = self.system.param_dim, self.spec.param_dim
        p = self.system.decode(theta[:P])
        qs = [self.spec.decode(theta[P + k * Q: P + (k + 1) * Q]) for k in range(self.size)]
        return JointParams(p, qs)

    def _term(self, k: int, p, q, with_grad: bool):
        u = self.stages[k]
        try:
            oS, dS, _ = simulate(self.system, p, u, self.grid, sensitivity=with_grad)
            oC, dC, _ = simulate(self.spec, q, u, self.grid, sensitivity=with_grad)
        except NonFiniteState:
            if with_grad:
                return np.inf, np.full(len(p), np.nan), np.full(len(q), np.nan)
            return np.inf, None, None
        r = oS - oC
        with np.errstate(over="ignore", invalid="ignore"):
            wr = self.weights * r
            val = float(wr @ r)
            if not with_grad:
                return val, None, None
            return val, 2.0 * (wr @ dS), -2.0 * (wr @ dC)

    def terms(self, jp: JointParams) -> np.ndarray:
        """Per-sample distances; their mean is the joint loss."""
        vals = ordered_map(lambda k: self._term(k, jp.p, jp.qs[k], False)[0],
                           range(self.size), self.workers)
        return np.array(vals)

    def loss(self, jp: JointParams) -> float:
        total = 0.0
        for v in self.terms(jp):
            total += v
        return total / self.size

    def loss_and_grad(self, theta) -> tuple[float, np.ndarray]:
        """Loss and its gradient with respect to the encoded flat vector."""
        theta = np.asarray(theta, dtype=float)
        jp = self.unpack(theta)
        P, Q = self.system.param_dim, self.spec.param_dim
        results = ordered_map(lambda k: self._term(k, jp.p, jp.qs[k], True),
                              range(self.size), self.workers)
        total = 0.0
        grad = np.zeros(self.dim)
        for k, (val, gp, gq) in enumerate(results):
            total += val
            grad[:P] += gp
            grad[P + k * Q: P + (k + 1) * Q] = gq
        total /= self.size
        grad /= self.size
        jac = np.concatenate([self.system.decode_jacobian(theta[:P])]
                             + [self.spec.decode_jacobian(theta[P + k * Q: P + (k + 1) * Q])
                                for k in range(self.size)])
        return total, grad * jac

    def fd_gradient(self, theta, step: float = 1e-5) -> np.ndarray:
        """Central finite differences in encoded coordinates."""
        theta = np.asarray(theta, dtype=float)
        g = np.zeros_like(theta)
        for j in range(theta.size):
            e = np.zeros_like(theta)
            e[j] = step
            g[j] = (self.loss(self.unpack(theta + e)) - self.loss(self.unpack(theta - e))) / (2 * step)
        return g

    def objective(self, mode: str = "forward-sensitivity"):
        if mode == "forward-sensitivity":
            return self.loss_and_grad

        def fun(theta):
            return self.loss(self.unpack(theta)), self.fd_gradient(theta)
        return fun


def joint_loss(system, spec, sample, jp: JointParams, cfg: DistanceConfig = DistanceConfig(),
               grid: TimeGrid = TimeGrid()) -> float:
    return JointProblem(system, spec, sample, cfg, grid).loss(jp)


def joint_gradient(system, spec, sample, jp: JointParams, cfg: DistanceConfig = DistanceConfig(),
                   grid: TimeGrid = TimeGrid(), mode: str = "forward-sensitivity") -> np.ndarray:
    """Gradient of the joint loss in log-parameters (identity for unconstrained ones).

    Layout: system parameters first, then each sample's spec parameters.
    """
    prob = JointProblem(system, spec, sample, cfg, grid)
    theta = prob.pack(jp)
    if mode == "finite-difference":
        return prob.fd_gradient(theta)
    return prob.loss_and_grad(theta)[1]


@dataclass
class StepRecord:
    label: str
    optimizer: str
    d_before: float
    d_after: float
    wall_time: float
    sample_size: int
    flag: str = ""


@dataclass
class TuningReport:
    steps: list = field(default_factory=list)
    p_tuned: Optional[np.ndarray] = None
    final_in_sample: Optional[float] = None
    final_resampled: Optional[float] = None
    sample_sizes: list = field(default_factory=list)
    loss_histories: list = field(default_factory=list)  # (stage label, [loss, ...])
    qs: Optional[list] = None
    fits: Optional[list] = None

    def to_json(self) -> dict:
        return {
            "steps": [asdict(s) for s in self.steps],
            "p_tuned": None if self.p_tuned is None else [float(v) for v in self.p_tuned],
            "final_in_sample": self.final_in_sample,
            "final_resampled": self.final_resampled,
            "sample_sizes": list(self.sample_sizes),
        }


def tune(system: SystemFamily, spec: SystemFamily, initial_p, sample: Sequence[FourierSignal],
         schedule: Sequence[OptimizerConfig], cfg: DistanceConfig = DistanceConfig(),
         grid: TimeGrid = TimeGrid(), inner_cfg: OptimizerConfig = DEFAULT_INNER,
         initial_qs: Optional[Sequence] = None, workers: int = 1) -> TuningReport:
    """Estimate, run the optimizer stages on the joint objective, re-estimate.

    ``initial_qs`` skips the initial estimate and uses the given warm starts.
    Optimizer state is reset at every stage.
    """
    if len(schedule) == 0:
        raise ValueError("schedule must contain at least one stage")
    report = TuningReport(sample_sizes=[len(sample)])
    p = system.check_params(initial_p)
    if initial_qs is None:
        t0 = time.perf_counter()
        est = estimate_d_rho(system, p, spec, sample, None, inner_cfg, cfg, grid, workers)
        report.steps.append(StepRecord("estimate", inner_cfg.label(), est.value, est.value,
                                       time.perf_counter() - t0, len(sample)))
        qs = [f.q for f in est.fits]
    else:
        qs = list(initial_qs)
    prob = JointProblem(system, spec, sample, cfg, grid, workers)
    theta0 = theta = prob.pack(JointParams(p, qs))
    for k, stage in enumerate(schedule):
        t0 = time.perf_counter()
        res: OptimResult = run_optimizer(prob.objective(stage.gradient_mode), theta, stage)
        before = res.history[0] if res.history else np.nan
        label = f"stage {k + 1}: {stage.label()}"
        report.steps.append(StepRecord(label, stage.kind, before, res.loss,
                                       time.perf_counter() - t0, len(sample), res.flag))
        report.loss_histories.append((label, res.history))
        theta = res.x
    # skip the log/exp round trip when nothing moved
    jp = JointParams(p, qs) if np.array_equal(theta, theta0) else prob.unpack(theta)
    t0 = time.perf_counter()
    est = estimate_d_rho(system, jp.p, spec, sample, jp.qs, inner_cfg, cfg, grid, workers)
    report.steps.append(StepRecord("re-estimate", inner_cfg.label(), report.steps[-1].d_after,
                                   est.value, time.perf_counter() - t0, len(sample)))
    report.p_tuned = jp.p
    report.final_in_sample = est.value
    report.qs = [f.q for f in est.fits]
    report.fits = est.fits
    return report


def resample_and_validate(system: SystemFamily, p_tuned, spec: SystemFamily,
                          ensemble_spec: InputEnsembleSpec, n: int,
                          inner_cfg: OptimizerConfig = DEFAULT_INNER,
                          cfg: DistanceConfig = DistanceConfig(), grid: TimeGrid = TimeGrid(),
                          workers: int = 1) -> float:
    """Distance estimate on a fresh sample, inner fits cold-started."""
    sample = sample_inputs(ensemble_spec, n)
    return estimate_d_rho(system, p_tuned, spec, sample, None, inner_cfg, cfg, grid,
                          workers).value
