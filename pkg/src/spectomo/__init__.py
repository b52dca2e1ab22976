"""Low-rank quantum state tomography from Pauli measurements.

Least-squares inversion of the Pauli-setting design, spectral estimators
(rank truncation, rank penalty, physical thresholding), cross-validated
tuning, a simulation harness and Haar-averaged Fisher information.
"""

from .errors import GenerationError, NumericalFailure, SpectomoError, UnsupportedParameterError
from .estimators import (
    least_squares,
    noise_level,
    oracle,
    penalised,
    physical_threshold,
    spectral_decompose,
    trace_normalize,
    truncate_rank,
)
from .model_selection import cv_penalty_constant, cv_rank, cv_threshold_constant
from .pauli_model import MeasurementDesign, probability_table, reconstruct_from_probabilities
from .sampler import CountsDataset, merge, simulate_dataset, split_batches
from .state_gen import StateSpec, random_rank_r_state

__version__ = "0.1.0"

__all__ = [
    "CountsDataset",
    "GenerationError",
    "MeasurementDesign",
    "NumericalFailure",
    "SpectomoError",
    "StateSpec",
    "UnsupportedParameterError",
    "cv_penalty_constant",
    "cv_rank",
    "cv_threshold_constant",
    "least_squares",
    "merge",
    "noise_level",
    "oracle",
    "penalised",
    "physical_threshold",
    "probability_table",
    "random_rank_r_state",
    "reconstruct_from_probabilities",
    "simulate_dataset",
    "spectral_decompose",
    "split_batches",
    "trace_normalize",
    "truncate_rank",
]
