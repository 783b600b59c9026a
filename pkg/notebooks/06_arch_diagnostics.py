"""Engle's LM test on forecast residuals: thinning leaves conditional heteroskedasticity.

Run with ``python notebooks/06_arch_diagnostics.py``.
"""
import numpy as np

from samplingloss import elm_arch_test, rolling_forecast
from samplingloss.diagnostics import fit_variance_recursion
from samplingloss.fixtures import load_fixture
from samplingloss.sampling import make_rng, thin_values
from samplingloss.synth import ArimaModel, generate_arima, make_nonnegative

# Sanity check on the bundled ARCH(1) trace: the test rejects at every lag shown.
e = load_fixture("arch1_residuals").columns()["residual"]
print(elm_arch_test(e, max_lag=3).to_csv())

# A thinned count has conditional variance p(1-p)X_t, which inherits the persistence
# of X. Residuals of an AR fit on the thinned series therefore look ARCH-like.
# The effect varies a lot from one realisation to the next, so average over a few.
fractions = {1.0: [], 0.5: []}
for seed in range(8):
    raw = generate_arima(ArimaModel((0.95,), noise_std=5.0), 3000, seed=make_rng(1010, seed))
    x, shift, _ = make_nonnegative(raw, 5.0)
    for p in fractions:
        y = thin_values(x, p, make_rng(seed, 1))
        resid = rolling_forecast(y, split=0.5, order=(1, 0), refit_every=100).residuals
        fractions[p].append(elm_arch_test(resid, max_lag=40).rejection_fraction(6, 40))
for p, vals in fractions.items():
    print(f"p={p}: rejection fraction over lags 6-40, per seed {np.round(vals, 2)}, mean {np.mean(vals):.2f}")

fit, _ = fit_variance_recursion(x, 0.5)
print(f"AR coefficient of the conditional variance proxy: {fit.ar[0]:.3f} (process: 0.95)")
