"""The full sweep protocol: windows x rates x replicates x metrics, in long format.

Run with ``python notebooks/07_sweep.py``. The same run is available from the
command line as ``samplingloss sweep --config cfg.json``.
"""
import collections

import numpy as np

from samplingloss import SweepConfig, run_sweep
from samplingloss.harness import format_results
from samplingloss.synth import default_pair_spec

cfg = SweepConfig(
    source={"synthetic": default_pair_spec(seed=0)},
    rates=[0.1, 0.3, 0.5, 1.0],
    replicates=20,
    metrics=["autocorr", "wpe", "mi", "pearson_external"],
    window={"length": 120, "count": 3},
    base_seed=42,
)
res = run_sweep(cfg)
print(f"{len(res.records)} records; windows: {res.metadata['windows']}")

# The relative column divides each value by the unthinned one, which makes
# windows with different scales comparable.
rel = collections.defaultdict(list)
for r in res.records:
    if r.relative is not None:
        rel[r.metric, r.rate].append(r.relative)
print("\n metric            " + "  ".join(f"p={p:.1f}" for p in cfg.rates))
for metric in cfg.metrics:
    print(f" {metric:17s} " + "  ".join(f"{np.median(rel[metric, p]):5.2f}" for p in cfg.rates))

print("\nfirst lines of the CSV output:")
print("".join(format_results(res).splitlines(keepends=True)[:4]))
