"""Probabilistic behavioral distances between IO-ODE systems and specifications, and tuning."""

from behavtune.distance import (DistanceConfig, EpsilonCurvePoint, Estimate, GridMismatch,
                                InnerFitResult, confidence_interval, epsilon_curve,
                                estimate_d_rho, estimate_d_rho_eps, fit_spec_to_input,
                                inner_config, output_distance)
from behavtune.inputs import FourierSignal, InputEnsembleSpec, evaluate_signal, sample_inputs
from behavtune.models import (KuramotoConfig, barabasi_albert, kuramoto_frequencies,
                              make_diffusive, make_kuramoto, make_scalar_linear,
                              random_initial_params, two_node_graph)
from behavtune.optim import OptimizerConfig, run_optimizer
from behavtune.trajectory import (NonFiniteState, SystemFamily, TimeGrid, Trajectory,
                                  integrate, output_trajectory)
from behavtune.tuning import (JointParams, JointProblem, TuningReport, joint_gradient,
                              joint_loss, resample_and_validate, tune)

__all__ = [
    "DistanceConfig", "EpsilonCurvePoint", "Estimate", "GridMismatch", "InnerFitResult",
    "confidence_interval", "epsilon_curve", "estimate_d_rho", "estimate_d_rho_eps",
    "fit_spec_to_input", "inner_config", "output_distance", "FourierSignal",
    "InputEnsembleSpec", "evaluate_signal", "sample_inputs", "KuramotoConfig",
    "barabasi_albert", "kuramoto_frequencies", "make_diffusive", "make_kuramoto",
    "make_scalar_linear", "random_initial_params", "two_node_graph", "OptimizerConfig",
    "run_optimizer", "NonFiniteState", "SystemFamily", "TimeGrid", "Trajectory", "integrate",
    "output_trajectory", "JointParams", "JointProblem", "TuningReport", "joint_gradient",
    "joint_loss", "resample_and_validate", "tune",
]

__version__ = "0.1.0"
