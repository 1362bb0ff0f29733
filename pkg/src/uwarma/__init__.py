"""Quantile-parameterized Unit-Weibull ARMA models for series on (0, 1)."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ArmaPolynomialWarning,
    BoundaryCollapseError,
    FilterOutput,
    InstabilityWarning,
    ModelSpec,
    ParamVector,
    SeriesData,
    SimulatedSeries,
    check_arma_polynomials,
    filter_series,
    simulate,
)
from .fit import (  # noqa: E402
    ConvergenceWarning,
    FitOptions,
    FitResult,
    backward_eliminate,
    fit_pmle,
    info_criteria,
    standard_errors_ci,
    wald_z,
)
from .forecast import ForecastResult, forecast_ahead, mape  # noqa: E402
from .inference import InfoMatrix, info_matrix, partial_loglik, score  # noqa: E402
from .links import LinkKind, link_deriv, link_eval, link_inv  # noqa: E402
from .montecarlo import (  # noqa: E402
    StudyConfig,
    StudySummary,
    run_estimation_study,
    run_forecast_study,
)
from .uw_dist import DomainError, UWParams, cdf, lemma_expectation, pdf, quantile, sample  # noqa: E402

__all__ = [name for name in dir() if not name.startswith("_")]
