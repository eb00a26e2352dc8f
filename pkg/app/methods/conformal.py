"""
Intervalos conformais split (padrão e ponderados por distância).
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from app.core.errors import DataError
from app.core.quantiles import conformal_quantile, weighted_quantiles
from app.core.scores import compute_scores, invert_raw_many, invert_scores
from app.core.types import (
    WARN_UNBOUNDED,
    CalibrationSet,
    IntervalTable,
    ScoreFunction,
    TableWarning,
    as_alpha,
    as_feature_matrix,
    as_score_function,
)
from app.methods.weights import distance_weight_matrix, require_features
from app.models.schemas import DistanceWeightConfig

logger = logging.getLogger(__name__)


def conformal_bounds(
    pred: np.ndarray,
    scores: np.ndarray,
    alpha: float,
    score_fn: ScoreFunction,
    weights: Optional[np.ndarray] = None,
    test_weight="max",
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Limites inferior/superior a partir dos scores de calibração.

    Scores brutos usam dois quantis unilaterais de nível alpha/2; os demais
    usam o quantil 1 - alpha e a inversão do score. Com weights (uma linha
    por ponto de teste) o quantil é ponderado.
    """
    pred = np.asarray(pred, dtype=float)
    if score_fn.is_raw:
        half = alpha / 2
        if weights is None:
            q_hi = conformal_quantile(scores, half)
            q_lo = -conformal_quantile(-scores, half)
        else:
            q_hi = weighted_quantiles(scores, weights, half, test_weight)
            q_lo = -weighted_quantiles(-scores, weights, half, test_weight)
        return invert_raw_many(pred, q_lo, q_hi)

    if weights is None:
        q = conformal_quantile(scores, alpha)
    else:
        q = weighted_quantiles(scores, weights, alpha, test_weight)
    return invert_scores(score_fn, pred, q)


def flag_unbounded(
    lower: np.ndarray,
    upper: np.ndarray,
    key: Optional[str] = None,
) -> Tuple[List[str], List[TableWarning]]:
    """Avisos por linha e da tabela para intervalos ilimitados."""
    unbounded = np.isinf(lower) | np.isinf(upper)
    row_warnings = [WARN_UNBOUNDED if flag else "" for flag in unbounded]
    warnings: List[TableWarning] = []
    if unbounded.any():
        onde = f" no grupo '{key}'" if key is not None else ""
        message = (
            f"{int(unbounded.sum())} intervalo(s) ilimitado(s){onde}: "
            "calibração pequena demais para o alpha pedido"
        )
        logger.warning(message)
        warnings.append(TableWarning(WARN_UNBOUNDED, message, key))
    return row_warnings, warnings


def calibration_weights(
    dw: DistanceWeightConfig,
    calib: CalibrationSet,
    features_pred,
    n_pred: int,
) -> Optional[np.ndarray]:
    """Matriz de pesos (n_pred x n_calib), ou None sem ponderação."""
    if not dw.enabled:
        return None
    require_features(dw, calib.features, features_pred)
    features_pred = as_feature_matrix(features_pred, "features_pred")
    if features_pred.shape[0] != n_pred:
        raise DataError(
            f"features_pred tem {features_pred.shape[0]} linhas, esperado {n_pred}"
        )
    return distance_weight_matrix(dw, calib.features, features_pred)


def pinterval_conformal(
    pred,
    calib: CalibrationSet,
    alpha: float = 0.1,
    score_fn=None,
    dw: Optional[DistanceWeightConfig] = None,
    features_pred=None,
) -> IntervalTable:
    """
    Intervalos de predição conformais split.

    Args:
        pred: Predições pontuais do conjunto de teste
        calib: Calibração (preds, truths e, para DWCP, features)
        alpha: Nível alpha (cobertura nominal 1 - alpha)
        score_fn: ScoreFunction ou nome do score (padrão: absolute)
        dw: Configuração da ponderação por distância
        features_pred: Features dos pontos de teste (DWCP)

    Returns:
        IntervalTable com pred, lower e upper
    """
    alpha = as_alpha(alpha)
    score_fn = as_score_function(score_fn)
    dw = dw or DistanceWeightConfig()
    pred = np.atleast_1d(np.asarray(pred, dtype=float))

    scores = compute_scores(score_fn, calib.preds, calib.truths)
    weights = calibration_weights(dw, calib, features_pred, len(pred))
    lower, upper = conformal_bounds(pred, scores, alpha, score_fn, weights, dw.test_weight)

    row_warnings, warnings = flag_unbounded(lower, upper)
    return IntervalTable(
        pred=pred,
        lower=lower,
        upper=upper,
        row_warnings=tuple(row_warnings),
        warnings=tuple(warnings),
    )
