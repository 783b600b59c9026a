import json

import numpy as np
import pytest

from samplingloss.errors import ValidationError
from samplingloss.fixtures import FIXTURE_NAMES, fixture_catalog, load_fixture, regenerate, write_fixture_files
from samplingloss.series import dominant_lag
from samplingloss.synth import pair_from_spec


class TestCatalog:
    def test_contents(self):
        cat = fixture_catalog()
        assert len(cat) >= 3
        assert {f.name for f in cat} >= {"seasonal_weekly", "coupled_pair", "arch1_residuals"}

    def test_every_pin_has_provenance(self):
        for fx in fixture_catalog():
            assert fx.provenance
            for name, pin in fx.expected.items():
                assert pin["oracle"], name
                assert "tol" in pin and "value" in pin

    def test_unknown(self):
        with pytest.raises(ValidationError):
            load_fixture("nope")


class TestRegeneration:
    @pytest.mark.parametrize("name", FIXTURE_NAMES)
    def test_bit_identical(self, name):
        assert regenerate(name) == load_fixture(name).csv

    def test_coupled_from_model_json(self):
        fx = load_fixture("coupled_pair")
        pair = pair_from_spec(json.loads(json.dumps(fx.spec["pair"])))
        cols = fx.columns()
        np.testing.assert_array_equal(pair.ground.values, cols["X"])
        np.testing.assert_array_equal(pair.external, cols["S"])

    def test_write_matches_shipped(self, tmp_path):
        write_fixture_files(tmp_path)
        for name in FIXTURE_NAMES:
            fx = load_fixture(name)
            assert (tmp_path / f"{name}.csv").read_text() == fx.csv
            assert json.loads((tmp_path / f"{name}.json").read_text())["expected"] == fx.expected


class TestPinnedValues:
    def test_seasonal_period(self):
        fx = load_fixture("seasonal_weekly")
        cases = fx.columns()["cases"]
        assert cases.size == 52
        assert dominant_lag(cases, 20) == fx.spec["period"] == fx.expected["dominant_lag_20"]["value"]

    def test_coupled_selection_rule(self):
        fx = load_fixture("coupled_pair")
        cols = fx.columns()
        x, s = cols["X"], cols["S"]
        rule = fx.spec["selection"]
        # oracle: numpy's corrcoef, independent of the package estimators
        assert np.corrcoef(x, s)[0, 1] == pytest.approx(fx.expected["pearson_xs"]["value"], abs=1e-12)
        assert fx.expected["pearson_xs"]["value"] >= rule["min_external_corr"]
        assert fx.expected["lag1_autocorr"]["value"] >= rule["min_lag1_autocorr"]
        assert x.min() >= 0

    def test_arch_lm(self):
        fx = load_fixture("arch1_residuals")
        e2 = fx.columns()["residual"] ** 2
        n = e2.size
        X = np.column_stack([np.ones(n - 1), e2[:-1]])
        y = e2[1:]
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
        r2 = 1 - np.sum((y - X @ beta) ** 2) / np.sum((y - y.mean()) ** 2)
        pin = fx.expected["lm_lag1"]
        assert (n - 1) * r2 == pytest.approx(pin["value"], rel=pin["tol"])
