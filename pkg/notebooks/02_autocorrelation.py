"""Autocorrelation of a thinned series against its closed-form prediction.

Run with ``python notebooks/02_autocorrelation.py``.
"""
import numpy as np

from samplingloss import SamplingPlan, autocorrelation, cross_covariance, moments, replicate_thin
from samplingloss.fixtures import load_fixture
from samplingloss.series import dominant_lag
from samplingloss.theory import SampledCovariance, predicted_autocorrelation

# The bundled seasonal fixture: 52 weeks of Poisson counts with a 13-week cycle.
cases = load_fixture("seasonal_weekly").columns()["cases"]
lag = dominant_lag(cases, 20)
print(f"dominant lag of the weekly series: {lag}")

# Predictions need only three numbers from the unthinned series.
m = moments(cases)
cov = cross_covariance(cases, cases, lag)
print("\n rate  median rho(Y)  predicted")
for p in (0.05, 0.1, 0.2, 0.5, 1.0):
    ys = replicate_thin(cases, SamplingPlan(p, 200, base_seed=3))
    emp = np.median([autocorrelation(y, lag) for y in ys])
    pred = predicted_autocorrelation(SampledCovariance(m.variance, m.mean, cov, p))
    print(f" {p:4.2f}  {emp:12.3f}  {pred:9.3f}")

# The attenuation is mild here because the seasonal swing dwarfs the Poisson noise
# (Var(X) >> E[X]). A flatter series loses its structure much faster.
flat = 50 + 0.5 * (cases - cases.mean()) / cases.std() * np.sqrt(50)
mf = moments(flat)
cf = cross_covariance(flat, flat, lag)
for p in (0.1, 1.0):
    print(f"flatter series, p={p}: predicted {predicted_autocorrelation(SampledCovariance(mf.variance, mf.mean, cf, p)):.3f}")
