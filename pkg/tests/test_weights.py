import math

import numpy as np
import pytest

from app.core.errors import DataError, InvalidWeightsError, SingularCovarianceError
from app.methods.weights import (
    compute_distances,
    distance_weight_matrix,
    kernel_weights,
    normalize_distances,
)
from app.models.schemas import DistanceType, DistanceWeightConfig, KernelType, NormalizeMode


class TestDistances:
    def test_one_dimensional_mahalanobis(self):
        d = compute_distances([[0.0], [2.0]], [[1.0]], DistanceType.MAHALANOBIS)
        assert d.shape == (1, 2)
        assert d[0, 0] == pytest.approx(1 / math.sqrt(2), rel=1e-6)

    def test_whitened_features_match_euclidean(self, rng):
        raw = rng.normal(size=(300, 2)) @ np.array([[2.0, 0.5], [0.0, 1.0]])
        centered = raw - raw.mean(axis=0)
        chol = np.linalg.cholesky(np.cov(centered, rowvar=False))
        whitened = centered @ np.linalg.inv(chol).T
        pred = rng.normal(size=(5, 2))

        mahalanobis = compute_distances(whitened, pred, DistanceType.MAHALANOBIS, ridge=0.0)
        euclidean = compute_distances(whitened, pred, DistanceType.EUCLIDEAN)
        np.testing.assert_allclose(mahalanobis, euclidean, rtol=1e-6)

    def test_same_point_has_zero_distance(self):
        features = [[1.0, 2.0], [3.0, 5.0], [0.0, -1.0]]
        d = compute_distances(features, features, DistanceType.EUCLIDEAN)
        np.testing.assert_allclose(np.diag(d), 0.0)

    def test_singular_covariance_without_ridge(self, rng):
        column = rng.normal(size=(50, 1))
        collinear = np.hstack([column, column])
        with pytest.raises(SingularCovarianceError):
            compute_distances(collinear, collinear[:3], DistanceType.MAHALANOBIS, ridge=0.0)
        d = compute_distances(collinear, collinear[:3], DistanceType.MAHALANOBIS, ridge=1e-8)
        assert np.all(np.isfinite(d)) and np.all(d >= 0)

    def test_column_mismatch(self):
        with pytest.raises(DataError):
            compute_distances([[0.0, 1.0]], [[0.0]], DistanceType.EUCLIDEAN)


class TestNormalization:
    def test_modes(self):
        d = np.array([[0.0, 5.0, 10.0]])
        np.testing.assert_array_equal(normalize_distances(d, NormalizeMode.NONE), d)
        np.testing.assert_allclose(normalize_distances(d, NormalizeMode.MINMAX), [[0.0, 0.5, 1.0]])
        np.testing.assert_allclose(normalize_distances(np.array([[1.0, 3.0]]), NormalizeMode.SD), [[1.0, 3.0]])

    def test_degenerate_inputs_become_zero(self):
        d = np.full((2, 3), 4.0)
        assert not normalize_distances(d, NormalizeMode.MINMAX).any()
        assert not normalize_distances(d, NormalizeMode.SD).any()


class TestKernels:
    def test_values_at_zero(self):
        zero = np.zeros(1)
        assert kernel_weights(zero, KernelType.GAUSSIAN)[0] == 1.0
        assert kernel_weights(zero, KernelType.CAUCHY)[0] == 1.0
        assert kernel_weights(zero, KernelType.RECIPROCAL_LINEAR)[0] == 1.0
        assert kernel_weights(zero, KernelType.LOGISTIC)[0] == 0.5

    def test_scalar_values(self):
        assert kernel_weights(np.array([1.0]), KernelType.GAUSSIAN)[0] == pytest.approx(0.3679, abs=1e-4)
        assert kernel_weights(np.array([3.0]), KernelType.RECIPROCAL_LINEAR)[0] == 0.25

    @pytest.mark.parametrize(
        "kernel",
        [KernelType.GAUSSIAN, KernelType.CAUCHY, KernelType.LOGISTIC, KernelType.RECIPROCAL_LINEAR],
    )
    def test_builtin_weights_in_unit_interval(self, kernel):
        weights = kernel_weights(np.linspace(0, 5, 50), kernel)
        assert np.all(weights > 0) and np.all(weights <= 1)

    def test_custom_kernel_validation(self):
        d = np.array([0.0, 1.0])
        np.testing.assert_array_equal(kernel_weights(d, KernelType.CUSTOM, lambda x: 2 - x), [2.0, 1.0])
        with pytest.raises(InvalidWeightsError):
            kernel_weights(d, KernelType.CUSTOM, lambda x: -x - 1)
        with pytest.raises(InvalidWeightsError):
            kernel_weights(d, KernelType.CUSTOM, lambda x: np.ones(3))
        with pytest.raises(InvalidWeightsError):
            kernel_weights(d, KernelType.CUSTOM, lambda x: x / 0.0)

    def test_custom_kernel_config_requires_function(self):
        with pytest.raises(ValueError):
            DistanceWeightConfig(enabled=True, kernel=KernelType.CUSTOM)


def test_weight_matrix_shape(rng):
    dw = DistanceWeightConfig(enabled=True, distance_type=DistanceType.EUCLIDEAN, normalize=NormalizeMode.SD)
    weights = distance_weight_matrix(dw, rng.normal(size=(20, 3)), rng.normal(size=(4, 3)))
    assert weights.shape == (4, 20)
    assert np.all((weights > 0) & (weights <= 1))
