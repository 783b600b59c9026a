import json

import numpy as np
import pytest

from samplingloss.errors import ValidationError
from samplingloss.fixtures import load_fixture
from samplingloss.harness import (
    COLUMNS,
    SweepConfig,
    SweepError,
    SweepRecord,
    SweepResult,
    emit_results,
    format_results,
    load_columns_csv,
    load_series_csv,
    read_results,
    run_sweep,
    select_windows,
)
from samplingloss.series import autocorrelation, moments
from samplingloss.synth import default_pair_spec
from samplingloss.theory import SampledCovariance, predicted_autocorrelation


def write(tmp_path, text, name="in.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.fixture
def seasonal_csv(tmp_path):
    return write(tmp_path, load_fixture("seasonal_weekly").csv, "seasonal.csv")


class TestLoader:
    def test_basic(self, tmp_path):
        s = load_series_csv(write(tmp_path, "t,cases\n0,3\n1,5\n"), "cases")
        assert s.values.tolist() == [3.0, 5.0] and s.label == "cases"

    @pytest.mark.parametrize("bad", ["-1", "−1"])
    def test_negative_reports_line(self, tmp_path, bad):
        with pytest.raises(ValidationError, match="line 3"):
            load_series_csv(write(tmp_path, f"t,cases\n0,3\n1,{bad}\n"), "cases")

    def test_missing_column(self, tmp_path):
        with pytest.raises(ValidationError, match="no column"):
            load_series_csv(write(tmp_path, "t,cases\n0,3\n"), "deaths")

    def test_ragged_row(self, tmp_path):
        with pytest.raises(ValidationError, match="line 2"):
            load_series_csv(write(tmp_path, "t,cases\n0\n"), "cases")

    def test_empty(self, tmp_path):
        with pytest.raises(ValidationError):
            load_series_csv(write(tmp_path, ""), "cases")
        with pytest.raises(ValidationError):
            load_series_csv(write(tmp_path, "t,cases\n"), "cases")

    def test_fixture_length(self, seasonal_csv):
        assert len(load_series_csv(seasonal_csv, "cases")) == 52

    def test_signed_external_column(self, tmp_path):
        cols = load_columns_csv(write(tmp_path, "s,x\n-1.5,2\n0.5,3\n"), ["s", "x"], nonnegative=["x"])
        assert cols["s"].tolist() == [-1.5, 0.5]


class TestConfig:
    def test_defaults(self):
        cfg = SweepConfig({"csv": "x.csv", "column": "c"})
        assert cfg.rates == pytest.approx([0.1 * i for i in range(1, 11)], abs=1e-12)
        assert cfg.replicates == 10

    @pytest.mark.parametrize("bad", [
        {"rates": []}, {"rates": [0.5, 0.2]}, {"rates": [0.0, 0.5]}, {"replicates": 0},
        {"metrics": ["nope"]}, {"on_undefined": "skip"}, {"window": {"length": 2}},
    ])
    def test_rejects(self, bad):
        with pytest.raises(ValidationError):
            SweepConfig(source={"csv": "x.csv", "column": "c"}, **bad)

    def test_unknown_key(self):
        with pytest.raises(ValidationError):
            SweepConfig.from_dict({"source": {"csv": "a", "column": "b"}, "colour": 1})

    def test_json_roundtrip(self, tmp_path):
        cfg = SweepConfig({"csv": "x.csv", "column": "c"}, rates=[0.5, 1.0], window={"length": 20})
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg.to_dict()))
        assert SweepConfig.from_json(p) == cfg


class TestWindows:
    def test_reproducible(self):
        assert select_windows(500, 52, 10, 3) == select_windows(500, 52, 10, 3)
        assert select_windows(500, 52, 10, 3) != select_windows(500, 52, 10, 4)

    def test_bounds(self):
        starts = select_windows(100, 52, 200, 1)
        assert min(starts) >= 0 and max(starts) <= 48

    def test_too_long(self):
        with pytest.raises(ValidationError):
            select_windows(10, 52, 1, 0)


class TestRunSweep:
    def test_full_rate_ratios(self, seasonal_csv):
        cfg = SweepConfig({"csv": str(seasonal_csv), "column": "cases"}, rates=[1.0], replicates=3,
                          metrics=["autocorr", "wpe", "nrmse_poisson"])
        res = run_sweep(cfg)
        assert len(res.records) == 9
        for rec in res.records:
            assert rec.relative == 1.0
            if rec.metric == "autocorr":
                assert rec.theoretical == rec.empirical

    def test_every_cell_once(self):
        spec = default_pair_spec(2, length=200)
        cfg = SweepConfig({"synthetic": spec}, rates=[0.3, 1.0], replicates=2,
                          metrics=["autocorr", "mi", "cov_external"], window={"length": 60, "count": 3})
        res = run_sweep(cfg)
        keys = [(r.window, r.rate, r.replicate, r.metric) for r in res.records]
        assert len(keys) == len(set(keys)) == 3 * 2 * 2 * 3
        assert len(res.metadata["windows"]) == 3

    def test_theory_uses_full_rate_moments(self):
        pair_spec = default_pair_spec(1, length=120)
        cfg = SweepConfig({"synthetic": pair_spec}, rates=[0.2, 0.6], replicates=1, metrics=["autocorr"])
        res = run_sweep(cfg)
        from samplingloss.synth import pair_from_spec
        x = pair_from_spec(pair_spec).ground.values
        lag = res.metadata["windows"][0]["dominant_lag"]
        m = moments(x)
        for rec in res.records:
            sc = SampledCovariance(m.variance, m.mean, autocorrelation(x, lag) * m.variance, rec.rate)
            assert rec.theoretical == pytest.approx(predicted_autocorrelation(sc), rel=1e-12)

    def test_deterministic_bytes(self, tmp_path):
        cfg = SweepConfig({"synthetic": default_pair_spec(0, length=150)}, rates=[0.5, 1.0], replicates=3,
                          metrics=["autocorr", "wpe", "mi", "pearson_external"], base_seed=9)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_results(run_sweep(cfg), a)
        emit_results(run_sweep(cfg), b)
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_output(self):
        base = dict(source={"synthetic": default_pair_spec(0, length=100)}, rates=[0.5], replicates=2,
                    metrics=["autocorr"])
        a = run_sweep(SweepConfig(**base, base_seed=1)).records
        b = run_sweep(SweepConfig(**base, base_seed=2)).records
        assert a != b

    def test_autocorr_trend(self):
        cfg = SweepConfig({"synthetic": default_pair_spec(0)}, replicates=50, metrics=["autocorr"])
        res = run_sweep(cfg)
        med = [np.median([r.relative for r in res.records if r.rate == p]) for p in cfg.rates]
        assert all(b >= a for a, b in zip(med, med[1:]))

    def test_undefined_metric_coordinates(self):
        x = np.zeros(40)
        x[[5, 17, 29]] = 1.0
        cfg = SweepConfig({"csv": "unused", "column": "c"}, rates=[0.1, 1.0], replicates=5,
                          metrics=["autocorr"], max_lag=3)
        with pytest.raises(SweepError) as err:
            run_sweep(cfg, ground=x)
        assert err.value.rate == 0.1 and err.value.metric == "autocorr"
        assert err.value.window == 0 and err.value.replicate is not None

    def test_undefined_metric_as_null(self):
        x = np.zeros(40)
        x[[5, 17, 29]] = 1.0
        cfg = SweepConfig({"csv": "unused", "column": "c"}, rates=[0.1, 1.0], replicates=5,
                          metrics=["autocorr"], max_lag=3, on_undefined="null")
        res = run_sweep(cfg, ground=x)
        nulls = [r for r in res.records if r.empirical is None]
        assert nulls and all(r.relative is None for r in nulls)
        assert "autocorr,," in format_results(res)

    def test_external_metric_needs_signal(self, seasonal_csv):
        cfg = SweepConfig({"csv": str(seasonal_csv), "column": "cases"}, rates=[1.0], metrics=["mi"])
        with pytest.raises(SweepError):
            run_sweep(cfg)


class TestEmit:
    def test_empty(self, tmp_path):
        assert format_results(SweepResult([])) == ",".join(COLUMNS) + "\n"

    def test_one_record(self):
        rec = SweepRecord("flu", 0, 0.5, 0, "autocorr", 0.25, 0.5, 0.5)
        assert format_results(SweepResult([rec])).splitlines() == [
            ",".join(COLUMNS), "flu,0,0.5,0,autocorr,0.25,0.5,0.5"]

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_roundtrip(self, tmp_path, fmt):
        recs = [SweepRecord("a", 0, 0.1, 0, "wpe", 0.875, None, 1.5),
                SweepRecord("a", 0, 1.0, 1, "mi", 0.125, None, None)]
        p = tmp_path / f"out.{fmt}"
        emit_results(SweepResult(recs, {"k": 1}), p, fmt)
        back = read_results(p)
        assert back.records == recs

    def test_reemit_fixed_point(self, tmp_path):
        cfg = SweepConfig({"synthetic": default_pair_spec(0, length=80)}, rates=[0.7], replicates=2,
                          metrics=["autocorr", "wpe"])
        res = run_sweep(cfg)
        p, q = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_results(res, p)
        emit_results(read_results(p), q)
        assert p.read_bytes() == q.read_bytes()

    def test_bad_format(self):
        with pytest.raises(ValidationError):
            format_results(SweepResult([]), "xml")
