"""
Intervalos bootstrap a partir dos erros da calibração.

Cada ponto de teste tem seu próprio fluxo aleatório, derivado da semente
mestre pelo índice do ponto (SeedSequence com spawn_key), de modo que o
resultado não depende da ordem de avaliação.
"""
import logging
from typing import Optional

import numpy as np

from app.core.errors import DegenerateWeightsError
from app.core.types import CalibrationSet, IntervalTable, as_alpha
from app.methods.conformal import calibration_weights
from app.models.schemas import BootstrapConfig, ErrorType

logger = logging.getLogger(__name__)


def point_rng(seed: int, index: int) -> np.random.Generator:
    """Gerador independente para o índice (ponto de teste ou iteração)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def pinterval_bootstrap(
    pred,
    calib: CalibrationSet,
    alpha: float = 0.1,
    cfg: Optional[BootstrapConfig] = None,
    features_pred=None,
) -> IntervalTable:
    """
    Intervalos bootstrap de reamostragem dos erros da calibração.

    Os erros e = truth - pred são reamostrados com reposição (uniforme ou
    proporcional ao peso por distância); em error_type = absolute usa-se
    |e| com sinal aleatório por sorteio. Os limites são as estatísticas de
    ordem ceil(alpha/2 * B) e ceil((1 - alpha/2) * B) de pred + amostras.

    Args:
        pred: Predições do teste
        calib: Calibração
        alpha: Nível alpha
        cfg: n_bootstrap, error_type, seed e ponderação por distância
        features_pred: Features do teste (bootstrap ponderado)

    Returns:
        IntervalTable com pred, lower e upper
    """
    alpha = as_alpha(alpha)
    cfg = cfg or BootstrapConfig()
    pred = np.atleast_1d(np.asarray(pred, dtype=float))
    errors = calib.errors
    n_calib = len(errors)
    weights = calibration_weights(cfg.dw, calib, features_pred, len(pred))
    probs = np.array([alpha / 2, 1 - alpha / 2])

    lower = np.empty(len(pred))
    upper = np.empty(len(pred))
    for j, center in enumerate(pred):
        rng = point_rng(cfg.seed, j)
        if weights is None:
            index = rng.integers(0, n_calib, size=cfg.n_bootstrap)
        else:
            total = weights[j].sum()
            if total <= 0:
                raise DegenerateWeightsError(j)
            index = rng.choice(n_calib, size=cfg.n_bootstrap, p=weights[j] / total)

        samples = errors[index]
        if cfg.error_type == ErrorType.ABSOLUTE:
            signs = rng.integers(0, 2, size=cfg.n_bootstrap) * 2 - 1
            samples = np.abs(samples) * signs

        lower[j], upper[j] = np.quantile(center + samples, probs, method="inverted_cdf")

    logger.debug(
        f"Bootstrap: {len(pred)} pontos, B = {cfg.n_bootstrap}, erros {cfg.error_type.value}"
    )
    return IntervalTable(pred=pred, lower=lower, upper=upper)
