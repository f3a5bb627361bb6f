"""Centering terms, sphericity test and power for linear spectral statistics
of spiked sample covariance matrices."""

__version__ = "0.1.0"

from .centering import (
    CenteringResult,
    Contour,
    build_contour,
    centering_value,
    closed_form_log,
    closed_form_lrt_g,
    closed_form_mean,
    contour_terms,
)
from .clt_test import (
    TestOutcome,
    clt_params_g,
    lrt_statistic,
    normal_cdf,
    normal_quantile,
    null_centering_g,
    one_spike_power,
    power,
    run_test,
)
from .errors import (
    ContourError,
    DomainError,
    DuplicateSpike,
    InvalidSpike,
    ModelError,
    NotASpike,
    NumericalError,
    QuadratureError,
    SingularMatrix,
    SolverFailure,
    SpectralError,
    TooManySpikes,
)
from .functions import SpectralFunction, from_name
from .mc_lab import (
    ExperimentConfig,
    ExperimentReport,
    empirical_size_power,
    lss,
    run_clt_experiment,
    sample_eigenvalues,
)
from .spike_model import SpikedModel, classify_spikes, is_distant, new_model, phi, population_esd
from .stieltjes import MPLaw, mp_integral, mp_support, solve_companion, solve_companion_spiked

__all__ = [name for name in dir() if not name.startswith("_")]
