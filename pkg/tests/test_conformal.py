import math

import numpy as np
import pytest

from app.core.errors import DataError, UnsupportedInversionError
from app.core.quantiles import conformal_quantile
from app.core.types import WARN_UNBOUNDED, CalibrationSet, ScoreFunction
from app.methods.conformal import pinterval_conformal
from app.models.schemas import DistanceType, DistanceWeightConfig, KernelType, ScoreType


def test_absolute_interval_around_prediction():
    calib = CalibrationSet(preds=np.zeros(10), truths=np.arange(1, 11) / 5)
    table = pinterval_conformal([10.0], calib, alpha=0.1)
    assert table.lower[0] == pytest.approx(8.0)
    assert table.upper[0] == pytest.approx(12.0)
    assert table.warnings == ()


def test_raw_scores_use_two_one_sided_quantiles(gaussian_calib):
    table = pinterval_conformal([0.0, 5.0], gaussian_calib, alpha=0.2, score_fn="raw")
    errors = gaussian_calib.truths - gaussian_calib.preds
    q_hi = conformal_quantile(errors, 0.1)
    q_lo = -conformal_quantile(-errors, 0.1)
    np.testing.assert_allclose(table.lower, [q_lo, 5.0 + q_lo])
    np.testing.assert_allclose(table.upper, [q_hi, 5.0 + q_hi])


def test_small_calibration_gives_unbounded_rows_with_warning():
    calib = CalibrationSet(preds=np.zeros(5), truths=np.ones(5))
    table = pinterval_conformal([1.0, 2.0], calib, alpha=0.1)
    assert np.all(np.isinf(table.lower)) and np.all(np.isinf(table.upper))
    assert table.row_warnings == (WARN_UNBOUNDED, WARN_UNBOUNDED)
    assert [w.code for w in table.warnings] == [WARN_UNBOUNDED]


def test_width_non_increasing_in_alpha(gaussian_calib):
    pred = np.linspace(5, 15, 7)
    widths = [pinterval_conformal(pred, gaussian_calib, alpha=a).widths() for a in (0.05, 0.1, 0.2, 0.4)]
    for narrower, wider in zip(widths[1:], widths[:-1]):
        assert np.all(narrower <= wider)


@pytest.mark.parametrize("kind", ["relative", "zero_adjusted_relative", "heterogeneous"])
def test_symmetric_scores_contain_prediction(gaussian_calib, kind):
    pred = np.array([0.0, 3.0, 12.0])
    table = pinterval_conformal(pred, gaussian_calib, alpha=0.1, score_fn=kind)
    assert np.all(table.lower <= pred) and np.all(pred <= table.upper)


def test_custom_score_without_inverse(gaussian_calib):
    custom = ScoreFunction(ScoreType.CUSTOM, custom_fn=lambda p, t: abs(t - p))
    with pytest.raises(UnsupportedInversionError):
        pinterval_conformal([1.0], gaussian_calib, score_fn=custom)


class TestDistanceWeighted:
    def test_identical_features_reproduce_unweighted(self, gaussian_calib):
        calib = CalibrationSet(
            preds=gaussian_calib.preds,
            truths=gaussian_calib.truths,
            features=np.ones((len(gaussian_calib), 2)),
        )
        pred = np.array([8.0, 10.0, 12.0])
        dw = DistanceWeightConfig(enabled=True)
        weighted = pinterval_conformal(pred, calib, dw=dw, features_pred=np.ones((3, 2)))
        plain = pinterval_conformal(pred, calib)
        np.testing.assert_array_equal(weighted.lower, plain.lower)
        np.testing.assert_array_equal(weighted.upper, plain.upper)

    def test_constant_custom_kernel_reproduces_unweighted(self, gaussian_calib, rng):
        dw = DistanceWeightConfig(
            enabled=True,
            distance_type=DistanceType.EUCLIDEAN,
            kernel=KernelType.CUSTOM,
            custom_kernel=lambda d: np.full_like(d, 0.3),
        )
        pred = np.array([9.0, 11.0])
        weighted = pinterval_conformal(pred, gaussian_calib, dw=dw, features_pred=rng.normal(size=(2, 2)))
        plain = pinterval_conformal(pred, gaussian_calib)
        np.testing.assert_array_equal(weighted.lower, plain.lower)
        np.testing.assert_array_equal(weighted.upper, plain.upper)

    def test_requires_features(self, gaussian_calib):
        with pytest.raises(DataError):
            pinterval_conformal([1.0], gaussian_calib, dw=DistanceWeightConfig(enabled=True))

    def test_local_weights_follow_local_noise(self, rng):
        # ruído pequeno perto de x = 0 e grande perto de x = 10
        x = np.concatenate([rng.normal(0, 0.5, 400), rng.normal(10, 0.5, 400)])
        noise = np.where(x < 5, 0.1, 3.0) * rng.standard_normal(800)
        calib = CalibrationSet(preds=np.zeros(800), truths=noise, features=x.reshape(-1, 1))
        dw = DistanceWeightConfig(enabled=True, distance_type=DistanceType.EUCLIDEAN)
        table = pinterval_conformal([0.0, 0.0], calib, dw=dw, features_pred=[[0.0], [10.0]])
        assert table.widths()[0] < table.widths()[1]


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2])
def test_marginal_coverage_guarantee(alpha):
    n_calib, n_test, reps = 500, 2000, 200
    coverages = []
    for rep in range(reps):
        rng = np.random.default_rng([7, rep])
        preds = rng.normal(size=n_calib + n_test)
        truths = preds + rng.standard_normal(n_calib + n_test)
        calib = CalibrationSet(preds=preds[:n_calib], truths=truths[:n_calib])
        table = pinterval_conformal(preds[n_calib:], calib, alpha=alpha)
        coverages.append(table.covers(truths[n_calib:]).mean())
    mean = float(np.mean(coverages))
    assert 1 - alpha - 0.01 <= mean <= 1 - alpha + 1 / (n_calib + 1) + 0.01
