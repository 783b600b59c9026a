"""Predictability of binomially thinned count time series."""
from .errors import DegenerateError, FitError, ValidationError
from .series import CountSeries, Moments, autocorrelation, cross_covariance, dominant_lag, moments, pearson
from .sampling import SamplingPlan, binomial_thin, replicate_thin
from .ordinal import OrdinalConfig, select_ordinal_params, weighted_permutation_entropy
from .infotheory import discretize, mutual_information
from .theory import (
    SampledCovariance,
    predicted_autocorrelation,
    predicted_external_covariance,
    predicted_external_pearson,
    sampled_cross_covariance,
    sampled_variance,
)
from .synth import ArimaModel, generate_arima, generate_coupled_pair
from .forecast import fit_ar, fit_arma, nrmse, poisson_forecast, rolling_forecast, select_order_aic
from .diagnostics import chi_square_sf, elm_arch_test
from .harness import SweepConfig, run_sweep, emit_results, load_series_csv

__version__ = "0.1.0"
