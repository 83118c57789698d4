"""Row-by-row execution of estimation / tuning / resampling schedules, plus report files."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from behavtune.config import ExperimentConfig, stage_configs
from behavtune.distance import (CSV_SCHEMA, Estimate, epsilon_curve, estimate_d_rho,
                                write_curve_csv, write_fits_csv)
from behavtune.inputs import sample_inputs
from behavtune.trajectory import input_stages, simulate
from behavtune.tuning import tune

log = logging.getLogger(__name__)

REPORT_SCHEMA = 1
N_TRAJECTORY_FILES = 3


@dataclass
class PipelineState:
    p: np.ndarray
    sample: list
    sample_seed: int
    qs: Optional[list] = None
    last_estimate: Optional[Estimate] = None
    tuned: bool = False


@dataclass
class PipelineResult:
    rows: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    loss_histories: list = field(default_factory=list)
    baseline: Optional[float] = None
    final_in_sample: Optional[float] = None
    final_resampled: Optional[float] = None
    p_tuned: Optional[np.ndarray] = None
    state: Optional[PipelineState] = None

    @property
    def final(self) -> Optional[float]:
        """Resampled value when available, else the in-sample one."""
        if self.final_resampled is not None:
            return self.final_resampled
        if self.final_in_sample is not None:
            return self.final_in_sample
        return self.baseline


def _fit_flags(est: Estimate) -> dict:
    return {"n_failed": est.n_failed,
            "n_not_converged": sum(1 for f in est.fits if not f.converged)}


def run_schedule(cfg: ExperimentConfig, rows: Optional[list] = None, workers: int = 1,
                 on_row=None) -> PipelineResult:
    """Execute schedule rows in order; ``on_row(result)`` is called after each row."""
    rows = cfg.schedule if rows is None else rows
    system = cfg.build_system()
    spec = cfg.build_spec()
    grid = cfg.time_grid()
    dcfg = cfg.distance_config()
    inner = cfg.inner_config()
    sample = sample_inputs(cfg.ensemble(), cfg.inputs.n_samples)
    st = PipelineState(cfg.initial_params(system), sample, cfg.inputs.seed)
    res = PipelineResult(state=st)

    def estimate(warm):
        return estimate_d_rho(system, st.p, spec, st.sample, warm, inner, dcfg, grid, workers)

    for k, row in enumerate(rows):
        action = row["action"]
        t0 = time.perf_counter()
        rec = {"index": k, "action": action, "label": row.get("label", action)}
        if action == "estimate":
            est = estimate(st.qs)
            st.qs = [f.q for f in est.fits]
            st.last_estimate = est
            rec.update(value=est.value, **_fit_flags(est))
            if res.baseline is None:
                res.baseline = est.value
            if st.tuned:
                res.final_in_sample = est.value
        elif action == "resample":
            st.sample = sample_inputs(cfg.ensemble(int(row["seed"])), int(row["n_samples"]))
            st.sample_seed = int(row["seed"])
            est = estimate(None)
            st.qs = [f.q for f in est.fits]
            st.last_estimate = est
            rec.update(value=est.value, seed=st.sample_seed, **_fit_flags(est))
            if res.baseline is None:
                res.baseline = est.value
            if st.tuned:
                res.final_resampled = est.value
        else:
            stages = stage_configs(row)
            rep = tune(system, spec, st.p, st.sample, stages, dcfg, grid, inner,
                       initial_qs=st.qs, workers=workers)
            if st.qs is None and res.baseline is None:
                res.baseline = rep.steps[0].d_after
            st.p = rep.p_tuned
            st.qs = rep.qs
            st.tuned = True
            st.last_estimate = Estimate(rep.final_in_sample, rep.fits,
                                        sum(1 for f in rep.fits if not np.isfinite(f.distance)))
            joint = [s for s in rep.steps if s.label.startswith("stage")]
            value = joint[-1].d_after if joint else rep.steps[-1].d_before
            rec.update(value=value, re_estimate=rep.final_in_sample,
                       flags=[s.flag for s in joint if s.flag])
            res.final_in_sample = rep.final_in_sample
            res.final_resampled = None
            res.steps.extend({"row": k, **s.__dict__} for s in rep.steps)
            res.loss_histories.extend((k, label, h) for label, h in rep.loss_histories)
        rec["sample_size"] = len(st.sample)
        rec["wall_time"] = time.perf_counter() - t0
        res.rows.append(rec)
        log.info("row %d %-8s d_rho=%.6g  (%d samples, %.1fs)", k, action, rec["value"],
                 rec["sample_size"], rec["wall_time"])
        if on_row is not None:
            on_row(res)
    res.p_tuned = st.p
    return res


# ---------------------------------------------------------------------------
# report files


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def report_dict(cfg: ExperimentConfig, res: PipelineResult, kind: str) -> dict:
    st = res.state
    system = cfg.build_system()
    est = st.last_estimate
    return _clean({
        "schema": REPORT_SCHEMA,
        "command": kind,
        "config": cfg.to_json(),
        "seeds": {"inputs": cfg.inputs.seed, "graph": cfg.system.graph_seed,
                  "omega": cfg.system.omega_seed, "param": cfg.system.param_seed,
                  "current_sample": st.sample_seed},
        "system": system.meta,
        "initial_p": cfg.initial_params(system),
        "rows": res.rows,
        "steps": res.steps,
        "baseline": res.baseline,
        "p_tuned": res.p_tuned,
        "final_in_sample": res.final_in_sample,
        "final_resampled": res.final_resampled,
        "sample_sizes": [r["sample_size"] for r in res.rows],
        "per_sample": None if est is None else [f.distance for f in est.fits],
        "n_failed": None if est is None else est.n_failed,
    })


def write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=False) + "\n")


def write_trajectories(cfg: ExperimentConfig, res: PipelineResult, out: Path) -> None:
    """trajectories_k.csv for the first samples: raw system and fitted spec outputs."""
    st = res.state
    if st.last_estimate is None:
        return
    system, spec, grid = cfg.build_system(), cfg.build_spec(), cfg.time_grid()
    t = grid.times()
    for k in range(min(N_TRAJECTORY_FILES, len(st.sample))):
        u = input_stages(st.sample[k], grid)
        oS, _, _ = simulate(system, st.p, u, grid)
        fit = st.last_estimate.fits[k]
        try:
            oC, _, _ = simulate(spec, fit.q, u, grid)
        except ArithmeticError:
            oC = np.full_like(oS, np.nan)
        with open(out / f"trajectories_{k}.csv", "w", newline="") as fh:
            fh.write(CSV_SCHEMA + "\n")
            wr = csv.writer(fh)
            wr.writerow(["t", "o_system", "o_spec"])
            for row in zip(t, oS, oC):
                wr.writerow([repr(float(v)) for v in row])


def write_loss_history(res: PipelineResult, out: Path) -> None:
    with open(out / "loss_history.csv", "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        wr = csv.writer(fh)
        wr.writerow(["stage", "iteration", "loss"])
        for row, label, hist in res.loss_histories:
            for i, v in enumerate(hist):
                wr.writerow([f"row{row} {label}", i, repr(float(v))])


def write_outputs(cfg: ExperimentConfig, res: PipelineResult, out: Path, kind: str) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    rep = report_dict(cfg, res, kind)
    write_json(out / "report.json", rep)
    if res.state.last_estimate is not None:
        write_fits_csv(out / "per_sample.csv", res.state.last_estimate.fits)
    write_trajectories(cfg, res, out)
    if res.loss_histories:
        write_loss_history(res, out)
    return rep


def write_curve(cfg: ExperimentConfig, distances, out: Path):
    curve = epsilon_curve(list(distances), cfg.epsilon_grid())
    out.mkdir(parents=True, exist_ok=True)
    write_curve_csv(out / "curve.csv", curve)
    return curve
