"""Recover the temporal source strength of stochastic heat and wave equations
from the variance of boundary-flux measurements."""

from .config import PRESETS, ExperimentConfig, preset
from .estimator import StrengthRecovery, VarianceTransformer
from .exceptions import (
    InvalidArgumentError,
    NumericalFailureError,
    StageError,
    TruncationLimitError,
)
from .experiment import RunResult, run_experiment
from .fdm import (
    FieldState,
    FluxEnsemble,
    ForwardProblem,
    boundary_flux,
    solve_heat_1d,
    solve_heat_2d,
    solve_wave_1d,
    synthesize_flux_ensemble,
)
from .grid import GridSpec
from .inversion import (
    KaczmarzConfig,
    Reconstruction,
    VolterraSystem,
    build_volterra_system,
    kaczmarz_invert,
    kaczmarz_step,
    reconstruction_error,
)
from .noise import IncrementSeries, SeedSpec, brownian_increments
from .oracle import analytic_variance, spectral_heat_path, spectral_wave_path
from .profiles import SpatialProfile, TemporalProfile
from .spectral import (
    BoundaryPoint,
    EigenMode,
    KernelTable,
    SpatialDomain,
    eigen_modes,
    flux_coefficient,
    kernel_table,
    kernel_value,
    source_coefficient,
)
from .synthesis import VarianceSeries, variance_series

__version__ = "0.1.0"
