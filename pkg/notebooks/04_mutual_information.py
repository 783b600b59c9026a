"""Mutual information between an external signal and a thinned count series.

Run with ``python notebooks/04_mutual_information.py``.
"""
import numpy as np

from samplingloss import SamplingPlan, mutual_information, pearson, replicate_thin
from samplingloss.fixtures import load_fixture
from samplingloss.series import moments
from samplingloss.theory import SampledCovariance, predicted_external_pearson

# The coupled fixture: S is an ARMA(3,2) signal and X an ARMA(5,1) process driven by S.
cols = load_fixture("coupled_pair").columns()
x, s = cols["X"], cols["S"]
rho = pearson(x, s)
m = moments(x)
print(f"corr(X, S) = {rho:.3f}, mean(X) = {m.mean:.1f}, var(X) = {m.variance:.1f}")

print("\n rate  median MI (nats)  median corr  predicted corr")
for p in (0.1, 0.2, 0.5, 1.0):
    ys = replicate_thin(x, SamplingPlan(p, 50, base_seed=2))
    mi = np.median([mutual_information(s, y.values) for y in ys])
    r = np.median([pearson(y.values, s) for y in ys])
    pred = predicted_external_pearson(rho, SampledCovariance(m.variance, m.mean, 0.0, p), s.std())
    print(f" {p:4.1f}  {mi:15.3f}  {r:11.3f}  {pred:14.3f}")

# When Var(X) is huge compared with E[X] the correlation barely moves with p;
# when they are equal it shrinks like sqrt(p).
for var in (1e6, 1.0):
    sc = SampledCovariance(var, 1.0, 0.0, 0.1)
    print(f"Var/E = {var:g}: corr 0.8 -> {predicted_external_pearson(0.8, sc, 1.0):.3f} at p = 0.1")
