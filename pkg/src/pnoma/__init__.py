"""Partial-NOMA downlink analysis: interference factor, FSIC coverage, Monte Carlo and allocation."""

from .allocate import (AllocationOutcome, Infeasibility, SearchGrids, algorithm1, exhaustive_search, oma_sweep,
                       rate_region_sweep)
from .analytic import (LOG_BASE, CoverageResult, NetworkParams, QuadratureError, cell_sum_rate, coverage,
                       coverage_result, laplace_intercell, nearest_neighbor_pdf, ordered_link_pdf, throughput)
from .fsic import Allocation, Branch, DecodingThresholds, EffectivePowers, effective_powers, thresholds
from .simulate import MCResult, simulate_coverage
from .spectral import ConfigError, OverlapConfig, interference_factor, pulse_energy

__version__ = "0.1.0"

__all__ = [
    "Allocation", "AllocationOutcome", "Branch", "ConfigError", "CoverageResult", "DecodingThresholds",
    "EffectivePowers", "Infeasibility", "LOG_BASE", "MCResult", "NetworkParams", "OverlapConfig",
    "QuadratureError", "SearchGrids", "algorithm1", "cell_sum_rate", "coverage", "coverage_result",
    "effective_powers", "exhaustive_search", "interference_factor", "laplace_intercell", "nearest_neighbor_pdf",
    "oma_sweep", "ordered_link_pdf", "pulse_energy", "rate_region_sweep", "simulate_coverage", "thresholds",
    "throughput",
]
