"""Weighted permutation entropy and how thinning raises it.

Run with ``python notebooks/03_permutation_entropy.py``.
"""
import numpy as np

from samplingloss import OrdinalConfig, SamplingPlan, replicate_thin, select_ordinal_params
from samplingloss import weighted_permutation_entropy
from samplingloss.ordinal import ordinal_pattern, permutation_from_id
from samplingloss.synth import ArimaModel, generate_arima

# Ordinal patterns: the window (3, 6, 1) sorts as index 2, then 0, then 1.
print("pattern of (3, 6, 1):", permutation_from_id(ordinal_pattern([3, 6, 1]), 3))

# Two reference points: a monotone series scores 0, white noise scores close to 1.
cfg = OrdinalConfig(order=3, delay=1)
print("monotone:", weighted_permutation_entropy(np.arange(100.0), cfg))
print("noise:   ", round(weighted_permutation_entropy(np.random.default_rng(0).random(50_000), cfg), 4))

# Order and delay are picked once on the ground truth and then reused for every
# thinned copy, so the comparison across rates uses the same embedding.
x = generate_arima(ArimaModel((0.8,), noise_std=3.0, intercept=50.0), 2000, seed=7)
cfg = select_ordinal_params(x)
print(f"\nselected order {cfg.order}, delay {cfg.delay}")
for p in (0.1, 0.3, 0.6, 1.0):
    vals = [weighted_permutation_entropy(y, cfg) for y in replicate_thin(x, SamplingPlan(p, 30, base_seed=1))]
    print(f" p={p:.1f}  median WPE {np.median(vals):.4f}")
