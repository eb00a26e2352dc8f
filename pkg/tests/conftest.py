import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from app.core.types import CalibrationSet

np.seterr(all="warn")

settings.register_profile("dev", max_examples=50, deadline=None)
settings.register_profile(
    "ci",
    max_examples=300,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def gaussian_calib(rng) -> CalibrationSet:
    """500 pontos com erro N(0, 1) e duas features."""
    preds = rng.normal(10.0, 2.0, size=500)
    return CalibrationSet(
        preds=preds,
        truths=preds + rng.standard_normal(500),
        features=rng.normal(size=(500, 2)),
    )


@pytest.fixture
def two_group_calib(rng) -> CalibrationSet:
    """Grupo 'a' com escores 0.1..1.0 e grupo 'b' com 10..100 (passo 10)."""
    errors = np.concatenate([np.arange(1, 11) / 10, np.arange(10, 101, 10)])
    preds = np.zeros(20)
    groups = ["a"] * 10 + ["b"] * 10
    return CalibrationSet(preds=preds, truths=preds + errors, groups=groups)
