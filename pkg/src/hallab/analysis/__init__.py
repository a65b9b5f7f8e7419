"""Numerical core: peak finding, least squares, resonator and leakage fits."""

from .leakage import (CorrelationSeries, InsufficientDataError, LeakageFit,
                      correlation_series, decay_model, fit_leakage)
from .metrics import readout_metrics
from .nlls import DomainError, FitResult, SingularFitError, jacobian, nlls
from .peaks import find_resonances, running_median
from .resonator import (NoResonanceError, ResonatorFit, fit_resonator,
                        guess_parameters, resonator_trace)

__all__ = [
    "CorrelationSeries", "DomainError", "FitResult", "InsufficientDataError",
    "LeakageFit", "NoResonanceError", "ResonatorFit", "SingularFitError",
    "correlation_series", "decay_model", "find_resonances", "fit_leakage",
    "fit_resonator", "guess_parameters", "jacobian", "nlls",
    "readout_metrics", "resonator_trace", "running_median",
]
