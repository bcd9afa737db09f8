"""Numerical toolkit for stochastic fixed-point equations ``X = sum_j A_j X^(j) + b``.

Pool-based solvers, Monte Carlo audits of smoothness conditions, density
recovery by Fourier inversion, a zoo of models from the analysis of
algorithms and simulators of the underlying discrete processes.
"""
__version__ = "0.1.0"

from .audit import (
    ChiTrace, ConditionReport, audit_coefficients, audit_lattice, audit_support, c4_c6_estimates,
    chi_bootstrap,
)
from .core import (
    CoefficientDraw, EquationSystem, SpectralSummary, min_gain, op_norm, sample_draw,
    spectral_summary,
)
from .density import (
    CharFunGrid, DensityGrid, decay_fit, decay_grid, ecf, invert, invert_pool, kde, l1_distance,
)
from .errors import ConfigError, DomainError, NumericalError
from .models import ModelConfig, build, degenerate_variant, example_configs, list_models
from .processes import ProcessRun, ScaledBatch, run, scaled_batch
from .solver import (
    SamplePool, SolveDiagnostics, iterate, ks_rate_bound, lp_distance, moment_residual, solve,
    wasserstein_1d,
)

__all__ = [
    "ChiTrace", "ConditionReport", "audit_coefficients", "audit_lattice", "audit_support",
    "c4_c6_estimates", "chi_bootstrap", "CoefficientDraw", "EquationSystem", "SpectralSummary",
    "min_gain", "op_norm", "sample_draw", "spectral_summary", "CharFunGrid", "DensityGrid",
    "decay_fit", "decay_grid", "ecf", "invert", "invert_pool", "kde", "l1_distance",
    "ConfigError", "DomainError", "NumericalError", "ModelConfig", "build", "degenerate_variant",
    "example_configs", "list_models", "ProcessRun", "ScaledBatch", "run", "scaled_batch",
    "SamplePool", "SolveDiagnostics", "iterate", "ks_rate_bound", "lp_distance",
    "moment_residual", "solve", "wasserstein_1d",
]
