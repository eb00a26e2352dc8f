import numpy as np
import pytest

from app.core.errors import DegenerateWeightsError
from app.core.types import CalibrationSet
from app.methods.bootstrap import pinterval_bootstrap, point_rng
from app.models.schemas import BootstrapConfig, DistanceType, DistanceWeightConfig, ErrorType, KernelType


def shifted_calib(shift: float, n: int = 50) -> CalibrationSet:
    preds = np.arange(n, dtype=float)
    return CalibrationSet(preds=preds, truths=preds + shift)


def test_zero_errors_collapse_to_prediction():
    table = pinterval_bootstrap([3.0, 10.0], shifted_calib(0.0), alpha=0.1)
    assert table.lower.tolist() == [3.0, 10.0]
    assert table.upper.tolist() == [3.0, 10.0]


def test_constant_error_shifts_prediction():
    table = pinterval_bootstrap([10.0], shifted_calib(1.5), alpha=0.1)
    assert (table.lower[0], table.upper[0]) == (11.5, 11.5)


def test_absolute_errors_are_symmetrized():
    cfg = BootstrapConfig(n_bootstrap=1000, error_type=ErrorType.ABSOLUTE)
    table = pinterval_bootstrap([10.0], shifted_calib(1.5), alpha=0.1, cfg=cfg)
    assert (table.lower[0], table.upper[0]) == (8.5, 11.5)


def test_deterministic_and_independent_of_batch(gaussian_calib):
    cfg = BootstrapConfig(n_bootstrap=200, seed=77)
    pred = np.array([9.0, 10.0, 11.0])
    first = pinterval_bootstrap(pred, gaussian_calib, cfg=cfg)
    second = pinterval_bootstrap(pred, gaussian_calib, cfg=cfg)
    np.testing.assert_array_equal(first.lower, second.lower)
    np.testing.assert_array_equal(first.upper, second.upper)

    prefix = pinterval_bootstrap(pred[:2], gaussian_calib, cfg=cfg)
    np.testing.assert_array_equal(prefix.lower, first.lower[:2])

    other_seed = pinterval_bootstrap(pred, gaussian_calib, cfg=BootstrapConfig(n_bootstrap=200, seed=78))
    assert not np.array_equal(other_seed.lower, first.lower)


def test_point_streams_differ():
    assert point_rng(1, 0).integers(1 << 30) != point_rng(1, 1).integers(1 << 30)
    assert point_rng(1, 3).integers(1 << 30) == point_rng(1, 3).integers(1 << 30)


def test_weighted_resampling_uses_nearby_errors():
    features = np.concatenate([np.zeros(20), np.full(20, 10.0)]).reshape(-1, 1)
    preds = np.zeros(40)
    calib = CalibrationSet(
        preds=preds,
        truths=np.concatenate([np.ones(20), -np.ones(20)]),
        features=features,
    )
    dw = DistanceWeightConfig(
        enabled=True,
        distance_type=DistanceType.EUCLIDEAN,
        kernel=KernelType.CUSTOM,
        custom_kernel=lambda d: (d < 0.5).astype(float),
    )
    table = pinterval_bootstrap(
        [5.0, 5.0], calib, cfg=BootstrapConfig(dw=dw), features_pred=[[0.0], [10.0]]
    )
    assert table.lower.tolist() == [6.0, 4.0]
    assert table.upper.tolist() == [6.0, 4.0]


def test_all_zero_weights(gaussian_calib):
    dw = DistanceWeightConfig(
        enabled=True,
        kernel=KernelType.CUSTOM,
        custom_kernel=lambda d: np.zeros_like(d),
    )
    with pytest.raises(DegenerateWeightsError):
        pinterval_bootstrap(
            [10.0], gaussian_calib, cfg=BootstrapConfig(dw=dw), features_pred=[[0.0, 0.0]]
        )


def test_nested_in_alpha(gaussian_calib):
    pred = np.linspace(6.0, 14.0, 25)
    tables = [
        pinterval_bootstrap(pred, gaussian_calib, alpha=alpha, cfg=BootstrapConfig(n_bootstrap=500, seed=3))
        for alpha in (0.05, 0.1, 0.2)
    ]
    for wide, narrow in zip(tables, tables[1:]):
        assert np.all(wide.lower <= narrow.lower)
        assert np.all(wide.upper >= narrow.upper)


def test_absolute_midpoints_centered_on_prediction(gaussian_calib):
    pred = np.full(500, 10.0)
    cfg = BootstrapConfig(n_bootstrap=1999, error_type=ErrorType.ABSOLUTE, seed=41)
    table = pinterval_bootstrap(pred, gaussian_calib, alpha=0.1, cfg=cfg)
    offsets = (table.lower + table.upper) / 2 - pred
    standard_error = offsets.std(ddof=1) / np.sqrt(offsets.size)
    assert abs(offsets.mean()) <= 3 * standard_error


@pytest.mark.slow
def test_bootstrap_coverage_on_gaussian_errors():
    coverages = []
    for rep in range(100):
        rng = np.random.default_rng([5, rep])
        preds = rng.normal(10, 2, 1200)
        truths = preds + rng.standard_normal(1200)
        calib = CalibrationSet(preds=preds[:1000], truths=truths[:1000])
        cfg = BootstrapConfig(n_bootstrap=2000, seed=rep)
        table = pinterval_bootstrap(preds[1000:], calib, alpha=0.1, cfg=cfg)
        coverages.append(table.covers(truths[1000:]).mean())
    assert abs(np.mean(coverages) - 0.9) <= 0.02
