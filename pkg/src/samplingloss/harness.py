"""Sampling-rate sweeps.

A sweep takes a ground-truth series (from CSV or a synthetic coupled pair),
optionally cuts it into random windows, thins every window at each rate and
replicate, and records each requested metric next to its closed-form
prediction and its ratio to the unthinned value.

Everything that depends on the unthinned series is fixed per window before
thinning: the dominant autocorrelation lag, the ordinal ``(order, delay)``
pair, the moments fed to the predictions and the histogram bin count.

Output is long format, one record per (window, rate, replicate, metric),
sorted canonically so the bytes written depend only on the inputs, the
config and the seed.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import forecast as fc
from .diagnostics import elm_arch_test
from .errors import DegenerateError, ValidationError
from .infotheory import default_bins, mutual_information
from .ordinal import OrdinalConfig, select_ordinal_params, weighted_permutation_entropy
from .sampling import SamplingPlan, make_rng, replicate_thin, stable_seed
from .series import CountSeries, as_array, autocorrelation, cross_covariance, dominant_lag, moments, pearson
from .synth import pair_from_spec
from .theory import (
    SampledCovariance,
    predicted_autocorrelation,
    predicted_external_covariance,
    predicted_external_pearson,
)

__all__ = [
    "METRICS",
    "COLUMNS",
    "SweepError",
    "SweepConfig",
    "SweepRecord",
    "SweepResult",
    "load_series_csv",
    "load_columns_csv",
    "select_windows",
    "run_sweep",
    "emit_results",
    "format_results",
    "read_results",
]

METRICS = (
    "autocorr",
    "wpe",
    "mi",
    "cov_external",
    "pearson_external",
    "nrmse",
    "nrmse_poisson",
    "arch",
)
EXTERNAL_METRICS = {"mi", "cov_external", "pearson_external"}
COLUMNS = ("label", "window", "rate", "replicate", "metric", "empirical", "theoretical", "relative")
DEFAULT_WINDOW_LENGTH = 52
_WINDOW_STREAM = 0x57494E44
_BASELINE_EPS = 1e-12


class SweepError(RuntimeError):
    """A metric failed inside a sweep; carries the cell coordinates."""

    def __init__(self, window, rate, replicate, metric, cause):
        self.window, self.rate, self.replicate, self.metric = window, rate, replicate, metric
        self.cause = cause
        super().__init__(
            f"window={window} rate={rate} replicate={replicate} metric={metric}: {cause}"
        )


# --------------------------------------------------------------------------- CSV input


def _read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = [(reader.line_num, row) for row in reader if any(c.strip() for c in row)]
    return header, rows


def _parse_column(path, header, rows, column, nonnegative=True):
    if column not in header:
        raise ValidationError(f"{path}: no column {column!r} (have {', '.join(header)})")
    j = header.index(column)
    out = np.empty(len(rows))
    for i, (line, row) in enumerate(rows):
        if len(row) != len(header):
            raise ValidationError(f"{path}: line {line}: expected {len(header)} fields, got {len(row)}")
        try:
            v = float(row[j])
        except ValueError:
            raise ValidationError(f"{path}: line {line}: cannot parse {row[j]!r} as a number") from None
        if not math.isfinite(v):
            raise ValidationError(f"{path}: line {line}: non-finite value {row[j]!r}")
        if nonnegative and v < 0:
            raise ValidationError(f"{path}: line {line}: negative count {row[j]!r}")
        out[i] = v
    if out.size == 0:
        raise ValidationError(f"{path}: no data rows")
    return out


def load_series_csv(path, column: str, label: str | None = None) -> CountSeries:
    """Read one column of non-negative counts; row order is the time index.

    Errors name the offending line (the header is line 1).
    """
    header, rows = _read_rows(path)
    values = _parse_column(path, header, rows, column)
    return CountSeries(values, label=column if label is None else label)


def load_columns_csv(path, columns, nonnegative=None) -> dict[str, np.ndarray]:
    """Read several numeric columns from one file.

    ``nonnegative`` lists the columns that must hold counts; by default all.
    """
    header, rows = _read_rows(path)
    nonneg = set(columns if nonnegative is None else nonnegative)
    return {c: _parse_column(path, header, rows, c, c in nonneg) for c in columns}


# --------------------------------------------------------------------------- config


@dataclass
class SweepConfig:
    """Sweep protocol.

    ``source`` is either ``{"csv": path, "column": name}`` or
    ``{"synthetic": pair_spec}`` (see :func:`samplingloss.synth.pair_from_spec`).
    ``external`` is ``{"csv": path, "column": name}``; for a synthetic source
    it defaults to the generated external signal. ``window`` is
    ``{"length": int, "count": int}`` or None for one window over the
    whole series. Set ``ordinal_order``/``ordinal_delay`` to skip the grid
    search. ``on_undefined="null"`` records an undefined statistic (for
    example the autocorrelation of an all-zero thinned window) as null
    instead of aborting.
    """

    source: dict
    rates: list = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 11)])
    replicates: int = 10
    base_seed: int = 0
    metrics: list = field(default_factory=lambda: ["autocorr", "wpe"])
    external: dict | None = None
    window: dict | None = None
    label: str | None = None
    max_lag: int = 20
    ordinal_order: int | None = None
    ordinal_delay: int | None = None
    ordinal_d_range: tuple = (2, 5)
    ordinal_tau_range: tuple = (1, 7)
    mi_bins: int | None = None
    train_fraction: float = 0.7
    refit_every: int = 1
    k_max: int = 5
    l_max: int = 2
    arch_max_lag: int = 100
    arch_alpha: float = 0.05
    on_undefined: str = "error"

    def __post_init__(self):
        self.rates = [float(r) for r in self.rates]
        if not self.rates:
            raise ValidationError("rates must not be empty")
        if any(not 0.0 < r <= 1.0 for r in self.rates):
            raise ValidationError("rates must lie in (0, 1]")
        if any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            raise ValidationError("rates must be strictly ascending")
        if int(self.replicates) < 1:
            raise ValidationError("replicates must be >= 1")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValidationError(f"unknown metrics {sorted(unknown)}; choose from {METRICS}")
        if len(set(self.metrics)) != len(self.metrics):
            raise ValidationError("metrics must not repeat")
        if not isinstance(self.source, dict) or not ({"csv", "synthetic"} & set(self.source)):
            raise ValidationError("source must be {'csv': path, 'column': name} or {'synthetic': spec}")
        if self.window is not None:
            w = dict(self.window)
            w.setdefault("length", DEFAULT_WINDOW_LENGTH)
            w.setdefault("count", 1)
            if int(w["length"]) < 3 or int(w["count"]) < 1:
                raise ValidationError("window length must be >= 3 and count >= 1")
            self.window = {"length": int(w["length"]), "count": int(w["count"])}
        self.ordinal_d_range = tuple(int(v) for v in self.ordinal_d_range)
        self.ordinal_tau_range = tuple(int(v) for v in self.ordinal_tau_range)
        if self.on_undefined not in ("error", "null"):
            raise ValidationError("on_undefined must be 'error' or 'null'")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: invalid JSON ({exc})") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ordinal_d_range"] = list(self.ordinal_d_range)
        d["ordinal_tau_range"] = list(self.ordinal_tau_range)
        return d


@dataclass(frozen=True, order=True)
class SweepRecord:
    label: str
    window: int
    rate: float
    replicate: int
    metric: str
    empirical: float | None
    theoretical: float | None
    relative: float | None


@dataclass
class SweepResult:
    records: list
    metadata: dict = field(default_factory=dict)


# --------------------------------------------------------------------------- sweep


def _load_source(cfg: SweepConfig) -> tuple[CountSeries, np.ndarray | None]:
    ext = None
    if "synthetic" in cfg.source:
        pair = pair_from_spec(cfg.source["synthetic"])
        ground, ext = pair.ground, pair.external
    else:
        ground = load_series_csv(cfg.source["csv"], cfg.source["column"])
    if cfg.external is not None:
        ext = load_columns_csv(cfg.external["csv"], [cfg.external["column"]], nonnegative=())[
            cfg.external["column"]
        ]
    if ext is not None and ext.size != len(ground):
        raise ValidationError(f"external series length {ext.size} != series length {len(ground)}")
    return ground, ext


def select_windows(n: int, length: int, count: int, seed: int) -> list[int]:
    """Uniform random (possibly overlapping) window starts, reproducible from ``seed``."""
    if length > n:
        raise ValidationError(f"window length {length} exceeds series length {n}")
    rng = make_rng(seed, _WINDOW_STREAM)
    return [int(s) for s in rng.integers(0, n - length + 1, size=count)]


def _window_seed(base_seed: int, window: int) -> int:
    a, b = stable_seed(base_seed, window).generate_state(2, np.uint32)
    return (int(a) << 32) | int(b)


class _Window:
    """Everything fixed from the unthinned window before thinning."""

    def __init__(self, cfg: SweepConfig, x: np.ndarray, s: np.ndarray | None):
        self.cfg, self.x, self.s = cfg, x, s
        self.moments = moments(x)
        self.meta: dict = {}
        m = set(cfg.metrics)
        if "autocorr" in m:
            self.lag = dominant_lag(x, max(1, min(cfg.max_lag, x.size - 2)))
            self.rho_x = autocorrelation(x, self.lag)
            self.meta["dominant_lag"] = self.lag
        if "wpe" in m:
            if cfg.ordinal_order is not None:
                self.ordinal = OrdinalConfig(cfg.ordinal_order, cfg.ordinal_delay or 1)
            else:
                self.ordinal = select_ordinal_params(x, cfg.ordinal_d_range, cfg.ordinal_tau_range)
            self.meta["ordinal"] = [self.ordinal.order, self.ordinal.delay]
        if m & EXTERNAL_METRICS:
            if s is None:
                raise ValidationError(f"metrics {sorted(m & EXTERNAL_METRICS)} need an external series")
            self.sigma_s = math.sqrt(moments(s).variance)
        if "mi" in m:
            self.bins = cfg.mi_bins or default_bins(x.size)
            self.meta["mi_bins"] = self.bins
        if "cov_external" in m:
            self.cov_xs = cross_covariance(x, s, 0)
        if "pearson_external" in m:
            self.rho_xs = pearson(x, s)
        self.baseline = self.evaluate(x)

    def sampled(self, rate: float) -> SampledCovariance:
        mo = self.moments
        cross = self.rho_x * mo.variance if hasattr(self, "rho_x") else 0.0
        return SampledCovariance(mo.variance, mo.mean, cross, rate)

    def theoretical(self, metric: str, rate: float):
        if metric == "autocorr":
            # rho_x times the attenuation factor, so p = 1 reproduces rho_x bit for bit
            mo = self.moments
            unit = SampledCovariance(mo.variance, mo.mean, mo.variance, rate)
            return self.rho_x * predicted_autocorrelation(unit)
        if metric == "cov_external":
            return predicted_external_covariance(self.cov_xs, rate)
        if metric == "pearson_external":
            return predicted_external_pearson(self.rho_xs, self.sampled(rate), self.sigma_s)
        return None

    def evaluate(self, y: np.ndarray) -> dict:
        cfg = self.cfg
        out = {}
        run = None
        for metric in cfg.metrics:
            try:
                if metric == "autocorr":
                    out[metric] = autocorrelation(y, self.lag)
                elif metric == "wpe":
                    out[metric] = weighted_permutation_entropy(y, self.ordinal)
                elif metric == "mi":
                    out[metric] = mutual_information(self.s, y, self.bins)
                elif metric == "cov_external":
                    out[metric] = cross_covariance(y, self.s, 0)
                elif metric == "pearson_external":
                    out[metric] = pearson(y, self.s)
                elif metric == "nrmse_poisson":
                    out[metric] = fc.nrmse(fc.poisson_forecast(y, cfg.train_fraction))
                elif metric in ("nrmse", "arch"):
                    if run is None:
                        run = fc.rolling_forecast(
                            y, cfg.train_fraction, None, cfg.refit_every, k_max=cfg.k_max, l_max=cfg.l_max
                        )
                    if metric == "nrmse":
                        out[metric] = fc.nrmse(run)
                    else:
                        resid = run.residuals
                        lag = max(1, min(cfg.arch_max_lag, resid.size - 20))
                        out[metric] = elm_arch_test(resid, lag, cfg.arch_alpha).rejection_fraction()
            except DegenerateError as exc:
                if cfg.on_undefined == "null":
                    out[metric] = None
                else:
                    raise _MetricFailure(metric, exc) from exc
            except Exception as exc:
                raise _MetricFailure(metric, exc) from exc
        return out


class _MetricFailure(Exception):
    def __init__(self, metric, cause):
        self.metric, self.cause = metric, cause
        super().__init__(str(cause))


def _relative(value, base):
    if value is None or base is None or abs(base) < _BASELINE_EPS:
        return None
    return value / base


def run_sweep(cfg: SweepConfig, ground=None, external=None) -> SweepResult:
    """Run the full thinning protocol described by ``cfg``.

    ``ground``/``external`` override ``cfg.source`` for in-process use.
    """
    if ground is None:
        ground, ext = _load_source(cfg)
        external = ext if external is None else external
    x_all = as_array(ground)
    s_all = None if external is None else as_array(external)
    if s_all is not None and s_all.size != x_all.size:
        raise ValidationError("external series must match the ground-truth length")
    label = cfg.label or (ground.label if isinstance(ground, CountSeries) and ground.label else "series")

    if cfg.window is None:
        starts, length = [0], x_all.size
    else:
        length = cfg.window["length"]
        starts = select_windows(x_all.size, length, cfg.window["count"], cfg.base_seed)

    records = []
    windows_meta = []
    for w, start in enumerate(starts):
        xw = x_all[start : start + length]
        sw = None if s_all is None else s_all[start : start + length]
        try:
            win = _Window(cfg, xw, sw)
        except _MetricFailure as exc:
            raise SweepError(w, 1.0, None, exc.metric, exc.cause) from exc.cause
        except (ValidationError, DegenerateError) as exc:
            raise SweepError(w, 1.0, None, "baseline", exc) from exc
        windows_meta.append({"window": w, "start": start, "length": int(xw.size), **win.meta})
        wseed = _window_seed(cfg.base_seed, w)
        for rate in cfg.rates:
            theo = {}
            for metric in cfg.metrics:
                try:
                    theo[metric] = win.theoretical(metric, rate)
                except DegenerateError:
                    theo[metric] = None
            plan = SamplingPlan(rate, int(cfg.replicates), wseed)
            for r, y in enumerate(replicate_thin(xw, plan)):
                try:
                    vals = win.evaluate(y.values)
                except _MetricFailure as exc:
                    raise SweepError(w, rate, r, exc.metric, exc.cause) from exc.cause
                for metric in cfg.metrics:
                    v = vals[metric]
                    records.append(
                        SweepRecord(label, w, rate, r, metric, v, theo[metric],
                                    _relative(v, win.baseline[metric]))
                    )
    records.sort(key=lambda rec: (rec.label, rec.window, rec.rate, rec.replicate, rec.metric))
    meta = {"config": cfg.to_dict(), "label": label, "windows": windows_meta}
    return SweepResult(records, meta)


# --------------------------------------------------------------------------- output


def _num(v) -> str:
    return "" if v is None else f"{v:.9g}"


def _round(v):
    return None if v is None else float(f"{v:.9g}")


def format_results(result: SweepResult, fmt: str = "csv") -> str:
    """Serialise records as CSV (columns :data:`COLUMNS`) or JSON.

    Numbers carry 9 significant digits; missing values are empty CSV cells
    or JSON nulls. JSON wraps the records with the run metadata.
    """
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for rec in result.records:
            w.writerow([rec.label, rec.window, _num(rec.rate), rec.replicate, rec.metric,
                        _num(rec.empirical), _num(rec.theoretical), _num(rec.relative)])
        return buf.getvalue()
    if fmt == "json":
        recs = [
            {"label": r.label, "window": r.window, "rate": _round(r.rate), "replicate": r.replicate,
             "metric": r.metric, "empirical": _round(r.empirical),
             "theoretical": _round(r.theoretical), "relative": _round(r.relative)}
            for r in result.records
        ]
        return json.dumps({"metadata": result.metadata, "records": recs}, indent=1, sort_keys=True) + "\n"
    raise ValidationError(f"unknown format {fmt!r}; use csv or json")


def emit_results(result: SweepResult, path, fmt: str = "csv") -> None:
    text = format_results(result, fmt)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _opt(cell: str):
    return None if cell == "" else float(cell)


def read_results(path, fmt: str | None = None) -> SweepResult:
    """Parse a file written by :func:`emit_results`."""
    if fmt is None:
        fmt = "json" if os.fspath(path).endswith(".json") else "csv"
    if fmt == "json":
        with open(path) as fh:
            doc = json.load(fh)
        recs = [SweepRecord(**r) for r in doc["records"]]
        return SweepResult(recs, doc.get("metadata", {}))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValidationError(f"{path}: unexpected header {header}")
        recs = [
            SweepRecord(row[0], int(row[1]), float(row[2]), int(row[3]), row[4],
                        _opt(row[5]), _opt(row[6]), _opt(row[7]))
            for row in reader
        ]
    return SweepResult(recs)
