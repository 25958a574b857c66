import math

import numpy as np
import pytest

from robustvario.errors import InputError
from robustvario.variomodel import (
    AnisoModel,
    IsoModel,
    aniso_variogram,
    covariance_matrix,
    iso_variogram,
    model_covariance,
    parse_model,
)

SPH = IsoModel("spherical", 5.0, 2.0)
PAPER_MODEL = AnisoModel(SPH, theta=3.0 * math.pi / 8.0, b=2.0)


class TestIsoVariogram:
    def test_zero_at_origin(self):
        assert iso_variogram(SPH, 0.0) == 0.0

    def test_sill_beyond_range(self):
        assert iso_variogram(SPH, 7.0) == 2.0
        assert iso_variogram(SPH, 5.0) == 2.0

    def test_spherical_formula(self):
        # beta*(3d/(2R) - d^3/(2R^3)) at d = 2.5
        assert iso_variogram(SPH, 2.5) == pytest.approx(1.375, abs=1e-12)

    def test_exponential_practical_range(self):
        m = IsoModel("exponential", 4.0, 1.0)
        assert iso_variogram(m, 4.0) == pytest.approx(1.0 - math.exp(-3.0), abs=1e-12)

    def test_gaussian_practical_range(self):
        m = IsoModel("gaussian", 4.0, 1.0)
        assert iso_variogram(m, 4.0) == pytest.approx(1.0 - math.exp(-3.0), abs=1e-12)

    def test_nondecreasing(self):
        for family in ("spherical", "exponential", "gaussian"):
            m = IsoModel(family, 5.0, 2.0)
            vals = [iso_variogram(m, d) for d in np.linspace(0.0, 12.0, 200)]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            IsoModel("cubic", 1.0, 1.0)
        with pytest.raises(ValueError):
            IsoModel("spherical", -1.0, 1.0)


class TestAnisoVariogram:
    def test_zero_lag(self):
        assert aniso_variogram(PAPER_MODEL, (0, 0)) == 0.0

    def test_isotropic_reduction(self):
        m = AnisoModel(SPH, theta=0.7, b=1.0)
        for h in [(1, 0), (2, 3), (0, 4)]:
            assert aniso_variogram(m, h) == pytest.approx(
                iso_variogram(SPH, math.hypot(*h)), abs=1e-12
            )

    def test_hand_computed_example(self):
        # R(theta) @ (1,0) = (cos t, -sin t); second coordinate scaled by 1/sqrt(2)
        t = 3.0 * math.pi / 8.0
        d = math.hypot(math.cos(t), -math.sin(t) / math.sqrt(2.0))
        assert d == pytest.approx(0.757115, abs=1e-6)
        expected = 2.0 * (3.0 * d / 10.0 - d**3 / 250.0)
        assert aniso_variogram(PAPER_MODEL, (1, 0)) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.450797, abs=1e-6)

    def test_rotation_by_pi_invariant(self):
        for h in [(1, 0), (2, 1), (1, -3)]:
            a = aniso_variogram(AnisoModel(SPH, theta=0.3, b=2.0), h)
            b = aniso_variogram(AnisoModel(SPH, theta=0.3 + math.pi, b=2.0), h)
            assert a == pytest.approx(b, abs=1e-12)


class TestModelCovariance:
    def test_zero_lag_is_half_sill(self):
        assert model_covariance(PAPER_MODEL, (0, 0)) == 1.0

    def test_beyond_range_zero(self):
        assert model_covariance(PAPER_MODEL, (10, 10)) == 0.0

    def test_from_variogram_example(self):
        assert model_covariance(PAPER_MODEL, (1, 0)) == pytest.approx(
            1.0 - aniso_variogram(PAPER_MODEL, (1, 0)) / 2.0, abs=1e-12
        )

    def test_variogram_covariance_round_trip(self):
        for h in [(1, 0), (0, 2), (3, 3), (2, -4)]:
            lhs = 2.0 * model_covariance(PAPER_MODEL, (0, 0)) - 2.0 * model_covariance(PAPER_MODEL, h)
            assert lhs == pytest.approx(aniso_variogram(PAPER_MODEL, h), abs=1e-12)

    def test_covariance_matrix_psd(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            coords = rng.integers(1, 12, size=(40, 2)).astype(float)
            cov = covariance_matrix(PAPER_MODEL, coords)
            np.testing.assert_allclose(cov, cov.T, atol=1e-14)
            eigvals = np.linalg.eigvalsh(cov)
            assert eigvals.min() >= -1e-9 * max(1.0, eigvals.max())

    def test_covariance_matrix_matches_pointwise(self):
        coords = np.array([[1.0, 1.0], [2.0, 1.0], [4.0, 3.0]])
        cov = covariance_matrix(PAPER_MODEL, coords)
        for i in range(3):
            for j in range(3):
                h = coords[j] - coords[i]
                assert cov[i, j] == pytest.approx(model_covariance(PAPER_MODEL, h), abs=1e-12)


class TestParseModel:
    def test_iso(self):
        m = parse_model("spherical:5:2")
        assert m.iso == SPH and m.b == 1.0

    def test_full(self):
        m = parse_model("gaussian:4:1.5:0.3:2")
        assert m.iso.family == "gaussian"
        assert m.theta == 0.3 and m.b == 2.0

    def test_errors(self):
        for bad in ("spherical:5", "cubic:5:2", "spherical:x:2", "spherical:5:2:1"):
            with pytest.raises(InputError):
                parse_model(bad)
