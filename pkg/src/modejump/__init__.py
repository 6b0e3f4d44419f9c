"""Mode jumping MCMC for Bayesian variable selection over 2^p model spaces."""

from .likelihood import Dataset, PriorSpec
from .models import ModelCache, ModelRecord, ModelVector, enumerate_all, hamming, swap
from .proposals import KernelMixture, ProposalKernel
from .optimizers import OptimizerSpec
from .sampler import RunResult, SamplerConfig, run
from .estimators import (
    enumerate_log_total,
    log_mass,
    mass_metrics,
    mc_estimates,
    rm_estimates,
    top_oracle,
)
from .datagen import generate_example1, generate_small_fixture
from .configs import benchmark_config

__all__ = [
    "Dataset",
    "PriorSpec",
    "ModelCache",
    "ModelRecord",
    "ModelVector",
    "enumerate_all",
    "hamming",
    "swap",
    "KernelMixture",
    "ProposalKernel",
    "OptimizerSpec",
    "RunResult",
    "SamplerConfig",
    "run",
    "enumerate_log_total",
    "log_mass",
    "mass_metrics",
    "mc_estimates",
    "rm_estimates",
    "top_oracle",
    "generate_example1",
    "generate_small_fixture",
    "benchmark_config",
]

__version__ = "0.1.0"
