import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from teamfusion.gaussian import (
    DimensionError,
    FrameTransform,
    GaussianObservation,
    NotPositiveDefiniteError,
    SingularJacobianError,
    SingularMatrixError,
    density,
    transform_covariance,
    transform_information,
)

from conftest import random_spd


def scalar_pdf(x, mu, var):
    # hand-written univariate formula, independent of the library path
    return math.exp(-((x - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


class TestDensity:
    def test_standard_normal_peak(self):
        obs = GaussianObservation([0.0], [[1.0]])
        assert density(obs, [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
        assert density(obs, [0.0]) == pytest.approx(0.398942, abs=1e-6)

    def test_bivariate_peak(self):
        obs = GaussianObservation([0.0, 0.0], np.eye(2))
        assert density(obs, [0.0, 0.0]) == pytest.approx(1 / (2 * math.pi), rel=1e-15)

    def test_wide_scalar_matches_hand_formula(self):
        obs = GaussianObservation([0.0], [[4.0]])
        assert density(obs, [2.0]) == pytest.approx(scalar_pdf(2.0, 0.0, 4.0), rel=1e-14)

    @pytest.mark.parametrize("mu,var", [(0.0, 1.0), (3.0, 0.25), (-2.0, 9.0)])
    def test_integrates_to_one(self, mu, var):
        obs = GaussianObservation([mu], [[var]])
        sd = math.sqrt(var)
        xs = np.linspace(mu - 8 * sd, mu + 8 * sd, 4001)
        vals = [density(obs, [x]) for x in xs]
        assert np.trapezoid(vals, xs) == pytest.approx(1.0, abs=1e-4)

    def test_strictly_positive_far_out(self):
        obs = GaussianObservation([0.0], [[1.0]])
        assert density(obs, [30.0]) > 0.0

    def test_matches_scipy_multivariate(self, rng):
        from scipy.stats import multivariate_normal

        for _ in range(20):
            cov = random_spd(rng, 3)
            mu = rng.normal(size=3)
            x = rng.normal(size=3)
            obs = GaussianObservation(mu, cov)
            assert density(obs, x) == pytest.approx(multivariate_normal(mu, cov).pdf(x), rel=1e-10)

    def test_dimension_mismatch(self):
        obs = GaussianObservation([0.0, 0.0], np.eye(2))
        with pytest.raises(DimensionError):
            density(obs, [0.0])


class TestObservationValidation:
    def test_rejects_non_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            GaussianObservation([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])

    def test_rejects_asymmetric(self):
        with pytest.raises(NotPositiveDefiniteError):
            GaussianObservation([0.0, 0.0], [[1.0, 0.1], [0.0, 1.0]])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            GaussianObservation([math.nan], [[1.0]])

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DimensionError):
            GaussianObservation([0.0, 1.0], [[1.0]])

    def test_immutable_arrays(self):
        obs = GaussianObservation([0.0], [[1.0]])
        with pytest.raises(ValueError):
            obs.mean[0] = 5.0


class TestTransformInformation:
    def test_identity_gives_inverse_covariance(self, rng):
        for d in (1, 2, 3):
            cov = random_spd(rng, d)
            obs = GaussianObservation(rng.normal(size=d), cov)
            pos, info = transform_information(obs, FrameTransform.identity())
            np.testing.assert_allclose(pos, obs.mean)
            np.testing.assert_allclose(info, np.linalg.inv(cov), atol=1e-9)

    def test_scalar_doubling(self):
        frame = FrameTransform.linear([[2.0]])
        pos, info = transform_information(GaussianObservation([1.5], [[1.0]]), frame)
        assert pos[0] == 3.0
        assert info[0, 0] == pytest.approx(0.25, rel=1e-15)

    @given(st.floats(-math.pi, math.pi))
    def test_rotation_preserves_isotropic(self, phi):
        frame = FrameTransform.rotation(phi, (1.0, -2.0))
        _, info = transform_information(GaussianObservation([0.3, 0.4], np.eye(2)), frame)
        np.testing.assert_allclose(info, np.eye(2), atol=1e-12)

    def test_is_inverse_of_propagated_covariance(self, rng):
        frame = FrameTransform.polar_to_planar((1.0, 2.0), 0.7)
        for _ in range(20):
            cov = random_spd(rng, 2, 0.01, 0.1)
            obs = GaussianObservation([rng.uniform(1, 20), rng.uniform(-3, 3)], cov)
            _, info = transform_information(obs, frame)
            _, pcov = transform_covariance(obs, frame)
            np.testing.assert_allclose(info @ pcov, np.eye(2), atol=1e-8)

    def test_symmetric_jacobian_matches_printed_order(self, rng):
        # J^-T C^-1 J^-1 == J^-1 C^-1 J^-T whenever J is symmetric
        J = random_spd(rng, 2)
        cov = random_spd(rng, 2)
        _, info = transform_information(GaussianObservation([0, 0], cov), FrameTransform.linear(J))
        Ji = np.linalg.inv(J)
        np.testing.assert_allclose(info, Ji @ np.linalg.inv(cov) @ Ji.T, rtol=1e-10)

    def test_result_is_spd(self, rng):
        frame = FrameTransform.linear([[1.0, 2.0], [0.5, 3.0]])
        _, info = transform_information(GaussianObservation([0, 0], random_spd(rng, 2)), frame)
        np.testing.assert_allclose(info, info.T)
        assert np.all(np.linalg.eigvalsh(info) > 0)

    def test_singular_jacobian(self):
        frame = FrameTransform.polar_to_planar()
        with pytest.raises(SingularJacobianError):
            transform_information(GaussianObservation([0.0, 0.2], np.eye(2) * 0.01), frame)
        with pytest.raises(SingularMatrixError):
            transform_information(GaussianObservation([1.0, 1.0], np.eye(2)),
                                  FrameTransform.linear([[1.0, 1.0], [1.0, 1.0]]))


class TestJacobianCheck:
    def test_polar_jacobian_matches_finite_differences(self, rng):
        frame = FrameTransform.polar_to_planar((3.0, -1.0), 0.4)
        pts = np.column_stack([rng.uniform(0.5, 50, 50), rng.uniform(-math.pi, math.pi, 50)])
        assert frame.check_jacobian(pts)

    def test_wrong_jacobian_detected(self):
        frame = FrameTransform(lambda z: z ** 2, lambda z: np.diag(z))
        assert not frame.check_jacobian([[1.0, 2.0]])

    def test_rotation_jacobian(self, rng):
        assert FrameTransform.rotation(1.1).check_jacobian(rng.normal(size=(10, 2)))
