"""Bundled miniature datasets.

Each fixture is a small CSV plus a JSON document holding the recipe that
produced it, a provenance note and pinned reference values with their
tolerances. The files live in ``samplingloss/data``; :func:`regenerate`
rebuilds any payload from its recipe, so nothing opaque is shipped.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .diagnostics import elm_arch_test
from .errors import ValidationError
from .sampling import make_rng
from .series import autocorrelation, dominant_lag, pearson
from .synth import default_pair_spec, pair_from_spec

__all__ = ["Fixture", "FIXTURE_NAMES", "fixture_catalog", "load_fixture", "regenerate", "write_fixture_files"]

FIXTURE_NAMES = ("seasonal_weekly", "coupled_pair", "arch1_residuals")


@dataclass(frozen=True)
class Fixture:
    name: str
    csv: str
    provenance: str
    spec: dict
    expected: dict = field(default_factory=dict)

    def columns(self) -> dict[str, np.ndarray]:
        rows = list(csv.reader(io.StringIO(self.csv)))
        header, body = rows[0], rows[1:]
        return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}


def _csv(header, columns, fmt=repr) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _int_or_float(v):
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


# --------------------------------------------------------------------------- recipes


def _seasonal(spec):
    rng = make_rng(spec["seed"])
    t = np.arange(spec["length"])
    lam = spec["level"] + spec["amplitude"] * np.sin(2 * math.pi * t / spec["period"])
    counts = rng.poisson(lam).astype(float)
    return _csv(["week", "cases"], [t, counts], _int_or_float)


def _select_pair_seed(spec):
    seed = 0
    while True:
        pair = pair_from_spec(default_pair_spec(seed, spec["length"]))
        x = pair.ground.values
        if autocorrelation(x, 1) >= spec["min_lag1_autocorr"] and pearson(x, pair.external) >= spec["min_external_corr"]:
            return seed
        seed += 1


def _coupled(spec):
    pair = pair_from_spec(spec["pair"])
    t = np.arange(pair.length)
    return _csv(["t", "S", "X"], [t, pair.external, pair.ground.values], _int_or_float)


def _arch1(spec):
    rng = make_rng(spec["seed"])
    n, w, a = spec["length"], spec["omega"], spec["alpha"]
    z = rng.standard_normal(n + spec["burn_in"])
    e = np.zeros_like(z)
    for i in range(1, z.size):
        e[i] = z[i] * math.sqrt(w + a * e[i - 1] ** 2)
    e = e[spec["burn_in"]:]
    return _csv(["t", "residual"], [np.arange(n), e], _int_or_float)


_RECIPES = {"seasonal_weekly": _seasonal, "coupled_pair": _coupled, "arch1_residuals": _arch1}


def _default_specs() -> dict[str, dict]:
    pair_rule = {"length": 365, "min_lag1_autocorr": 0.9, "min_external_corr": 0.8}
    seed = _select_pair_seed(pair_rule)
    return {
        "seasonal_weekly": {
            "spec": {"length": 52, "period": 13, "level": 200.0, "amplitude": 120.0, "seed": 13},
            "provenance": "Poisson counts around a period-13 sinusoid; the dominant-lag "
            "reference is the construction period.",
        },
        "coupled_pair": {
            "spec": {"pair": default_pair_spec(seed, pair_rule["length"]), "selection": {**pair_rule, "seed": seed}},
            "provenance": "Random external ARMA(3,2) and coupled ARMA(5,1) ground truth; first "
            "seed whose ground truth has lag-1 autocorrelation >= 0.9 and correlation "
            ">= 0.8 with the external signal. Pinned values computed from the payload.",
        },
        "arch1_residuals": {
            "spec": {"length": 2000, "burn_in": 100, "omega": 0.2, "alpha": 0.7, "seed": 2024},
            "provenance": "ARCH(1) trace e_t = z_t sqrt(0.2 + 0.7 e_{t-1}^2); pinned LM "
            "statistic and p-value from the package's own test, cross-checked in the "
            "test suite against an independent regression.",
        },
    }


def _pinned(name: str, payload: str) -> dict:
    fx = Fixture(name, payload, "", {})
    cols = fx.columns()
    if name == "seasonal_weekly":
        return {"dominant_lag_20": {"value": dominant_lag(cols["cases"], 20), "tol": 0,
                                    "oracle": "construction period"}}
    if name == "coupled_pair":
        x, s = cols["X"], cols["S"]
        return {
            "lag1_autocorr": {"value": autocorrelation(x, 1), "tol": 1e-12, "oracle": "payload estimate"},
            "pearson_xs": {"value": pearson(x, s), "tol": 1e-12, "oracle": "payload estimate"},
        }
    res = elm_arch_test(cols["residual"], 5)
    return {
        "lm_lag1": {"value": float(res.lm[0]), "tol": 1e-8, "oracle": "independent OLS R^2 in tests"},
        "p_value_lag1_below": {"value": 0.05, "tol": 0, "oracle": "ARCH(1) with alpha 0.7"},
    }


def regenerate(name: str, spec: dict | None = None) -> str:
    """CSV payload rebuilt from a recipe (the bundled one by default)."""
    if name not in _RECIPES:
        raise ValidationError(f"unknown fixture {name!r}")
    if spec is None:
        spec = load_fixture(name).spec
    return _RECIPES[name](spec)


def write_fixture_files(directory) -> None:
    """Regenerate every bundled fixture into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, entry in _default_specs().items():
        payload = _RECIPES[name](entry["spec"])
        (directory / f"{name}.csv").write_text(payload)
        doc = {"name": name, "provenance": entry["provenance"], "spec": entry["spec"],
               "expected": _pinned(name, payload)}
        (directory / f"{name}.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_fixture(name: str) -> Fixture:
    if name not in FIXTURE_NAMES:
        raise ValidationError(f"unknown fixture {name!r}")
    base = resources.files("samplingloss") / "data"
    doc = json.loads((base / f"{name}.json").read_text())
    payload = (base / f"{name}.csv").read_text()
    return Fixture(name, payload, doc["provenance"], doc["spec"], doc["expected"])


def fixture_catalog() -> list[Fixture]:
    return [load_fixture(n) for n in FIXTURE_NAMES]


if __name__ == "__main__":
    write_fixture_files(Path(__file__).parent / "data")
