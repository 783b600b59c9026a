"""Binomial thinning and what it does to the first two moments.

Run with ``python notebooks/01_thinning.py``.
"""
import numpy as np

from samplingloss import SamplingPlan, moments, replicate_thin
from samplingloss.synth import ArimaModel, generate_arima
from samplingloss.theory import SampledCovariance, sampled_variance

# A persistent count series: AR(1) with coefficient 0.8 around a level of 50.
x = generate_arima(ArimaModel((0.8,), noise_std=3.0, intercept=50.0), 2000, seed=1)
m = moments(x)
print(f"ground truth: mean {m.mean:.2f}, variance {m.variance:.2f}")

# Keep each event independently with probability p. The mean scales by p, while the
# variance picks up an extra binomial term p(1-p)E[X] on top of p^2 Var(X).
print("\n rate   mean(Y)  var(Y)  predicted var")
for p in (0.1, 0.3, 0.5, 0.8, 1.0):
    ys = replicate_thin(x, SamplingPlan(p, replicates=50, base_seed=7))
    mean_y = np.mean([y.values.mean() for y in ys])
    var_y = np.mean([moments(y).variance for y in ys])
    pred = sampled_variance(SampledCovariance(m.variance, m.mean, 0.0, p))
    print(f" {p:4.1f}  {mean_y:7.2f}  {var_y:6.2f}  {pred:6.2f}")

# Replicates are reproducible: the stream for replicate r at rate p only depends on
# (base_seed, r, p), so reruns and partial reruns agree.
a = replicate_thin(x, SamplingPlan(0.3, 3, base_seed=7))
b = replicate_thin(x, SamplingPlan(0.3, 3, base_seed=7))
print("\nidentical reruns:", all(np.array_equal(u.values, v.values) for u, v in zip(a, b)))
