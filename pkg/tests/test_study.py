import math

import numpy as np
import pytest

from robustvario.contamination import ContaminationSpec
from robustvario.errors import TooManyFailuresError
from robustvario.grid import Direction
from robustvario.simfield import FieldSpec
from robustvario.study import (
    StudySpec,
    default_lag_depths,
    run_bias_rmse_study,
    run_correction_factor_study,
)
from robustvario import study as study_module
from robustvario.variomodel import AnisoModel, IsoModel, aniso_variogram

MODEL = AnisoModel(IsoModel("spherical", 5.0, 2.0), theta=3.0 * math.pi / 8.0, b=2.0)


def small_spec(**kwargs):
    defaults = dict(
        field=FieldSpec(MODEL, 10, 10),
        estimators=("matheron",),
        lag_depths={Direction.EW: 4},
        directions=(Direction.EW,),
        replications=40,
        base_seed=77,
        n_jobs=1,
    )
    defaults.update(kwargs)
    return StudySpec(**defaults)


class TestSpecValidation:
    def test_unknown_estimator(self):
        with pytest.raises(ValueError):
            small_spec(estimators=("cressie",))

    def test_mod_requires_config(self):
        with pytest.raises(ValueError):
            small_spec(estimators=("mcd.org.mod",))

    def test_replication_minimum(self):
        with pytest.raises(ValueError):
            small_spec(replications=1)

    def test_default_lag_depths(self):
        depths = default_lag_depths()
        assert depths[Direction.EW] == 7 and depths[Direction.SWNE] == 5


class TestReproducibility:
    def test_bit_identical_rerun(self):
        res_a = run_bias_rmse_study(small_spec())
        res_b = run_bias_rmse_study(small_spec())
        assert res_a.rows == res_b.rows

    def test_parallel_matches_serial(self):
        serial = run_bias_rmse_study(small_spec(replications=24, n_jobs=1))
        parallel = run_bias_rmse_study(small_spec(replications=24, n_jobs=2))
        assert serial.rows == parallel.rows

    def test_contaminated_reproducible(self):
        spec = small_spec(contamination=ContaminationSpec("block", 0.1, mu0=3.0))
        assert run_bias_rmse_study(spec).rows == run_bias_rmse_study(spec).rows


class TestCorrectionFactors:
    def test_stub_estimator_gives_exactly_one(self, monkeypatch):
        # an estimator returning the true variogram has c_opt == 1 under the
        # averaging divisor
        def fake_estimate(spec, eid, grid, lags, d_idx, rep, cache):
            return np.array([aniso_variogram(MODEL, h) for h in lags.lag_vectors])

        monkeypatch.setattr(study_module, "_estimate_one", fake_estimate)
        res = run_correction_factor_study(small_spec(corrfac_divisor="h_max_minus_1"))
        row = res.get("matheron", Direction.EW)
        assert row.c_opt == pytest.approx(1.0, abs=1e-12)
        assert row.se == pytest.approx(0.0, abs=1e-12)

    def test_divisor_readings_differ_by_known_ratio(self, monkeypatch):
        def fake_estimate(spec, eid, grid, lags, d_idx, rep, cache):
            return np.array([aniso_variogram(MODEL, h) for h in lags.lag_vectors])

        monkeypatch.setattr(study_module, "_estimate_one", fake_estimate)
        printed = run_correction_factor_study(small_spec(corrfac_divisor="h_max"))
        # h_max = 4: the printed formula divides the 3-term sum by 4
        assert printed.get("matheron", "ew").c_opt == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_contaminated_spec_rejected(self):
        spec = small_spec(contamination=ContaminationSpec("block", 0.1))
        with pytest.raises(ValueError):
            run_correction_factor_study(spec)

    def test_csv_schema(self, tmp_path):
        res = run_correction_factor_study(small_spec(replications=10))
        path = tmp_path / "cf.csv"
        res.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "estimator,direction,c_opt,se"
        assert lines[1].startswith("matheron,ew,")


class TestBiasRmse:
    def test_stubbed_truth_gives_zero(self, monkeypatch):
        def fake_estimate(spec, eid, grid, lags, d_idx, rep, cache):
            return np.array([aniso_variogram(MODEL, h) for h in lags.lag_vectors])

        monkeypatch.setattr(study_module, "_estimate_one", fake_estimate)
        res = run_bias_rmse_study(small_spec())
        for row in res.rows:
            assert row.bias == 0.0
            assert row.rmse == 0.0

    def test_rmse_bias_variance_identity(self):
        res = run_bias_rmse_study(small_spec(replications=60))
        for row in res.rows:
            assert row.rmse >= abs(row.bias)

    def test_correction_factor_applied(self, monkeypatch):
        def fake_estimate(spec, eid, grid, lags, d_idx, rep, cache):
            return np.array([aniso_variogram(MODEL, h) for h in lags.lag_vectors])

        monkeypatch.setattr(study_module, "_estimate_one", fake_estimate)
        res = run_bias_rmse_study(
            small_spec(correction_factors={("matheron", "ew"): 2.0})
        )
        truth = 0.5 * aniso_variogram(MODEL, (1, 0))
        assert res.get("matheron", "ew", 1).bias == pytest.approx(truth, rel=1e-12)

    def test_failures_counted_and_capped(self, monkeypatch):
        from robustvario.errors import EmptySampleError

        calls = {"n": 0}

        def flaky(spec, eid, grid, lags, d_idx, rep, cache):
            if rep == 3:
                raise EmptySampleError("synthetic failure")
            return np.array([aniso_variogram(MODEL, h) for h in lags.lag_vectors])

        monkeypatch.setattr(study_module, "_estimate_one", flaky)
        with pytest.raises(TooManyFailuresError):
            run_bias_rmse_study(small_spec(replications=40))  # 1/40 > 1%

        res = run_bias_rmse_study(small_spec(replications=400))  # 1/400 <= 1%
        row = res.get("matheron", "ew", 1)
        assert row.n_fail == 1 and row.n_ok == 399

    def test_seed_sensitivity_sanity(self):
        # halving replications at another seed moves cells by < 6 MC SEs
        big = run_bias_rmse_study(small_spec(replications=120, base_seed=1))
        half = run_bias_rmse_study(small_spec(replications=60, base_seed=999))
        for row_b in big.rows:
            row_h = half.get(row_b.estimator, row_b.direction, row_b.lag)
            se = math.hypot(row_b.se_bias, row_h.se_bias)
            assert abs(row_b.bias - row_h.bias) < 6 * se

    def test_csv_schema(self, tmp_path):
        res = run_bias_rmse_study(small_spec(replications=10))
        path = tmp_path / "out.csv"
        res.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "estimator,direction,lag,bias,rmse,se_bias,se_rmse,n_ok,n_fail"
        assert len(lines) == 1 + 4  # one row per lag

    def test_format_table_selects_lags(self):
        res = run_bias_rmse_study(small_spec(replications=10))
        text = res.format_table(lags=(1, 4))
        assert "lag" in text.splitlines()[0]
        assert len(text.splitlines()) == 3
