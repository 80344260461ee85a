"""State-space identification with a steady-state Kalman gain from
input/output data corrupted by colored measurement noise."""

from .analysis import (
    ComparisonReport,
    FrequencyResponse,
    PredictionReport,
    compare_frequency_responses,
    default_frequency_grid,
    frequency_response,
    validate_kalman,
)
from .benchmark import BenchmarkRun, BenchmarkScenario, generate, seek_input
from .era import (
    EraRealization,
    HankelPair,
    IdentifiedModel,
    build_hankel,
    era_realize,
    identify,
    recover_system,
)
from .estimator import OkidEra
from .okid import (
    MarkovParameterSet,
    OkidConfig,
    build_regressors,
    estimate_markov_parameters,
)
from .state_space import (
    ColoringFilter,
    NoiseSpec,
    StateSpaceModel,
    TimeSeriesDataset,
    build_augmented_system,
    generate_colored_noise,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkRun",
    "BenchmarkScenario",
    "ColoringFilter",
    "ComparisonReport",
    "EraRealization",
    "FrequencyResponse",
    "HankelPair",
    "IdentifiedModel",
    "MarkovParameterSet",
    "NoiseSpec",
    "OkidConfig",
    "OkidEra",
    "PredictionReport",
    "StateSpaceModel",
    "TimeSeriesDataset",
    "build_augmented_system",
    "build_hankel",
    "build_regressors",
    "compare_frequency_responses",
    "default_frequency_grid",
    "era_realize",
    "estimate_markov_parameters",
    "frequency_response",
    "generate",
    "generate_colored_noise",
    "identify",
    "recover_system",
    "seek_input",
    "simulate",
    "validate_kalman",
]
