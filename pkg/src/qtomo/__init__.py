"""Pseudo-Bayesian quantum state tomography toolkit."""

__version__ = "0.1.0"

from .estimate import EstimateReport, linear_inversion, maee, mse
from .harness import (ExperimentSpec, RunRecord, benchmark_runtime,
                      derive_seed, run_experiment)
from .kernels import BACKEND
from .model import (DegenerateParameters, ModelConfig, PseudoLikelihood,
                    StateParams, log_pseudo_likelihood, loss_prob,
                    prior_sample, rho_from_params)
from .qcore import (Dimensions, InvariantViolation, born_probabilities,
                    empirical_frequencies, pauli_factor_projector,
                    setting_projector, simulate_counts, true_state_mixed,
                    true_state_rank2)
from .samplers import (ChainOutput, ProposalDraw, SamplerConfig, TuneResult,
                       adaptive_log_accept_ratio, adaptive_propose,
                       naive_propose_y, run_adaptive_mh, run_naive_mh,
                       tune_betas)

__all__ = [
    "BACKEND",
    "ChainOutput",
    "DegenerateParameters",
    "Dimensions",
    "EstimateReport",
    "ExperimentSpec",
    "InvariantViolation",
    "ModelConfig",
    "ProposalDraw",
    "PseudoLikelihood",
    "RunRecord",
    "SamplerConfig",
    "StateParams",
    "TuneResult",
    "adaptive_log_accept_ratio",
    "adaptive_propose",
    "benchmark_runtime",
    "born_probabilities",
    "derive_seed",
    "empirical_frequencies",
    "linear_inversion",
    "log_pseudo_likelihood",
    "loss_prob",
    "maee",
    "mse",
    "naive_propose_y",
    "pauli_factor_projector",
    "prior_sample",
    "rho_from_params",
    "run_adaptive_mh",
    "run_experiment",
    "run_naive_mh",
    "setting_projector",
    "simulate_counts",
    "true_state_mixed",
    "true_state_rank2",
    "tune_betas",
]
