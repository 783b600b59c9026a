"""One-step-ahead forecasting of thinned series: ARMA fits against a running mean.

Run with ``python notebooks/05_forecasting.py`` (about half a minute).
"""
import numpy as np

from samplingloss import SamplingPlan, nrmse, poisson_forecast, replicate_thin, rolling_forecast
from samplingloss.fixtures import load_fixture
from samplingloss.forecast import ground_truth_forecast

x = load_fixture("coupled_pair").columns()["X"]

# The order is chosen by AIC on the first 70% of the series; the model is then
# refitted before every one-step prediction on the remaining 30%.
run = rolling_forecast(x)
print(f"selected order {run.model_spec.order}, NRMSE on the full series {nrmse(run):.3f}")
print(f"running-mean (Poisson) predictor NRMSE {nrmse(poisson_forecast(x)):.3f}")

# As the rate drops, both predictors degrade and the gap between them closes:
# once thinning noise dominates, the series history carries little beyond its mean.
print("\n rate  ARMA   Poisson  ARMA on X rescaled")
for p in (0.1, 0.3, 0.5, 1.0):
    ys = replicate_thin(x, SamplingPlan(p, 10, base_seed=5))
    ar = np.median([nrmse(rolling_forecast(y, refit_every=5)) for y in ys])
    po = np.median([nrmse(poisson_forecast(y)) for y in ys])
    gt = np.median([nrmse(ground_truth_forecast(x, y.values, refit_every=5)) for y in ys])
    print(f" {p:4.1f}  {ar:.3f}  {po:.3f}    {gt:.3f}")
