"""JSON experiment configuration with dotted-path overrides."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from behavtune.distance import DistanceConfig, inner_config
from behavtune.inputs import InputEnsembleSpec
from behavtune.models import (KuramotoConfig, barabasi_albert, make_diffusive, make_kuramoto,
                              make_scalar_linear, random_initial_params, two_node_graph)
from behavtune.optim import OptimizerConfig
from behavtune.trajectory import SystemFamily, TimeGrid

SYSTEM_KINDS = ("diffusive", "kuramoto", "scalar-linear")
ACTIONS = ("estimate", "resample", "tune")


class ConfigError(ValueError):
    pass


@dataclass
class SystemConfig:
    kind: str = "diffusive"
    n: int = 10
    graph_seed: int = 0
    m: int = 2
    K: float = 1.0
    s: float = 1.0
    omega_seed: int = 0
    tunable_pairs: str = "all"
    tunable_omega: bool = False
    a: float = 1.0
    param_seed: int = 0
    initial_p: Optional[list] = None


@dataclass
class SpecConfig:
    kind: str = "diffusive"
    n: int = 2
    tunable_omega: bool = False
    a: float = 1.0


@dataclass
class GridConfig:
    t_final: float = 10.0
    dt: float = 0.01


@dataclass
class InputsConfig:
    L: int = 10
    amplitude_sigma: Optional[float] = None
    seed: int = 1
    n_samples: int = 10


@dataclass
class DistanceSection:
    transient_cutoff: float = 0.0


@dataclass
class InnerSection:
    iterations: int = 100
    gtol: float = 1e-10


@dataclass
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    spec: SpecConfig = field(default_factory=SpecConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    inputs: InputsConfig = field(default_factory=InputsConfig)
    distance: DistanceSection = field(default_factory=DistanceSection)
    inner: InnerSection = field(default_factory=InnerSection)
    schedule: list = field(default_factory=list)
    epsilons: Any = field(default_factory=lambda: {"start": 0.0, "stop": 1.0, "num": 101})
    sweep_s: list = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0])
    output_dir: str = "out"

    def to_json(self) -> dict:
        return asdict(self)

    # builders ------------------------------------------------------------

    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.grid.t_final, self.grid.dt)

    def distance_config(self) -> DistanceConfig:
        return DistanceConfig(self.distance.transient_cutoff)

    def inner_config(self) -> OptimizerConfig:
        return inner_config(self.inner.iterations, self.inner.gtol)

    def ensemble(self, seed: Optional[int] = None) -> InputEnsembleSpec:
        return InputEnsembleSpec(self.inputs.L, self.inputs.amplitude_sigma,
                                 self.inputs.seed if seed is None else seed)

    def build_system(self) -> SystemFamily:
        sc = self.system
        if sc.kind == "diffusive":
            return make_diffusive(barabasi_albert(sc.n, sc.m, sc.graph_seed))
        if sc.kind == "kuramoto":
            return make_kuramoto(KuramotoConfig(sc.n, coupling=sc.K, spread=sc.s,
                                                omega_seed=sc.omega_seed,
                                                tunable_pairs=sc.tunable_pairs,
                                                tunable_omega=sc.tunable_omega))
        return make_scalar_linear(sc.a)

    def build_spec(self) -> SystemFamily:
        sp = self.spec
        if sp.kind == "diffusive":
            if sp.n == 1:
                return make_diffusive(np.zeros((1, 1)))
            if sp.n == 2:
                return make_diffusive(two_node_graph())
            path = np.diag(np.ones(sp.n - 1), 1)
            return make_diffusive(path + path.T)
        if sp.kind == "kuramoto":
            return make_kuramoto(KuramotoConfig(sp.n, coupling=self.system.K,
                                                tunable_omega=sp.tunable_omega))
        return make_scalar_linear(sp.a)

    def initial_params(self, system: SystemFamily) -> np.ndarray:
        if self.system.initial_p is not None:
            return system.check_params(self.system.initial_p)
        if self.system.kind == "scalar-linear":
            return system.default_params.copy()
        return random_initial_params(system, self.system.param_seed)

    def epsilon_grid(self) -> np.ndarray:
        e = self.epsilons
        if isinstance(e, dict):
            return np.linspace(float(e["start"]), float(e["stop"]), int(e["num"]))
        return np.asarray(e, dtype=float)


def stage_configs(row: dict) -> list[OptimizerConfig]:
    """Expand a tune row into its optimizer stages (repetitions unrolled)."""
    stages = [OptimizerConfig(kind=st["optimizer"], learning_rate=st.get("lr", 0.01),
                              iterations=int(st["iterations"]),
                              gradient_mode=st.get("gradient_mode", "forward-sensitivity"))
              for st in row.get("stages", [])]
    return stages * int(row.get("repetitions", 1))


def _from_dict(cls, d: dict, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in fields(cls)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    return cls(**d)


def config_from_dict(d: dict) -> ExperimentConfig:
    d = copy.deepcopy(d)
    sections = {"system": SystemConfig, "spec": SpecConfig, "grid": GridConfig,
                "inputs": InputsConfig, "distance": DistanceSection, "inner": InnerSection}
    kw = {}
    for key, value in d.items():
        if key in sections:
            kw[key] = _from_dict(sections[key], value, key)
        elif key in ("schedule", "epsilons", "sweep_s", "output_dir"):
            kw[key] = value
        else:
            raise ConfigError(f"unknown top-level key {key!r}")
    cfg = ExperimentConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.system.kind not in SYSTEM_KINDS:
        raise ConfigError(f"system.kind must be one of {SYSTEM_KINDS}")
    if cfg.spec.kind not in SYSTEM_KINDS:
        raise ConfigError(f"spec.kind must be one of {SYSTEM_KINDS}")
    if cfg.inputs.n_samples < 1:
        raise ConfigError("inputs.n_samples must be at least 1")
    if not 0 <= cfg.distance.transient_cutoff < cfg.grid.t_final:
        raise ConfigError("distance.transient_cutoff must lie in [0, t_final)")
    for k, row in enumerate(cfg.schedule):
        if not isinstance(row, dict) or row.get("action") not in ACTIONS:
            raise ConfigError(f"schedule[{k}]: action must be one of {ACTIONS}")
        if row["action"] == "resample" and ("seed" not in row or "n_samples" not in row):
            raise ConfigError(f"schedule[{k}]: resample rows need explicit seed and n_samples")
        if row["action"] == "tune":
            try:
                stage_configs(row)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"schedule[{k}]: bad stage ({exc})") from exc
    try:
        cfg.time_grid()
        cfg.ensemble()
        cfg.epsilon_grid()
        cfg.initial_params(cfg.build_system())
        cfg.build_spec()
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(d: dict, overrides: list[tuple[str, str]]) -> dict:
    """Set ``a.b.c=value`` paths in a config dict; values are parsed as JSON when possible."""
    d = copy.deepcopy(d)
    for path, raw in overrides:
        keys = path.split(".")
        node = d
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {path}: {k} is not a section")
        node[keys[-1]] = _parse_value(raw)
    return d


def load_config(path: Optional[str], overrides: list[tuple[str, str]] = ()) -> ExperimentConfig:
    try:
        d = json.loads(Path(path).read_text()) if path else {}
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(apply_overrides(d, list(overrides)))
