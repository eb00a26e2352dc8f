"""
Quantis por estatística de ordem (conformal), ponderados e empíricos.
"""
import logging
from typing import Union

import numpy as np

from app.core.errors import DataError, DegenerateWeightsError, EmptyCalibrationError
from app.core.types import ConfidenceLevel, as_alpha

logger = logging.getLogger(__name__)

TestWeight = Union[str, float]


def conformal_rank(n: int, alpha: Union[float, ConfidenceLevel]) -> int:
    """
    Posto k = ceil((1 - alpha)(n + 1)), o menor k com k / (n + 1) >= 1 - alpha.

    A busca compara k / (n + 1) diretamente para não depender do
    arredondamento de (1 - alpha)(n + 1).
    """
    level = 1.0 - as_alpha(alpha)
    k = max(1, int(np.ceil(level * (n + 1))))
    while k > 1 and (k - 1) / (n + 1) >= level:
        k -= 1
    while k / (n + 1) < level:
        k += 1
    return k


def conformal_quantile(scores, alpha: Union[float, ConfidenceLevel]) -> float:
    """
    Quantil conformal: k-ésimo menor score com k = ceil((1 - alpha)(n + 1)).

    Args:
        scores: Scores de calibração (finitos)
        alpha: Nível alpha

    Returns:
        O score de posto k, ou +inf quando k > n
    """
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise EmptyCalibrationError()
    if not np.all(np.isfinite(scores)):
        raise DataError("Scores de calibração devem ser finitos")
    n = scores.size
    k = conformal_rank(n, alpha)
    if k > n:
        logger.debug(f"Posto {k} > n = {n}: quantil ilimitado")
        return float("inf")
    return float(np.partition(scores, k - 1)[k - 1])


def weighted_quantile(
    scores,
    weights,
    alpha: Union[float, ConfidenceLevel],
    test_weight: TestWeight = "max",
) -> float:
    """
    Quantil ponderado dos scores.

    O ponto de teste recebe a massa do maior peso da calibração
    (test_weight = "max") ou um peso fixo. Pesos uniformes reproduzem
    conformal_quantile exatamente.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1:
        raise DataError("weights deve ser um vetor")
    return float(weighted_quantiles(scores, weights.reshape(1, -1), alpha, test_weight)[0])


def weighted_quantiles(
    scores,
    weight_matrix,
    alpha: Union[float, ConfidenceLevel],
    test_weight: TestWeight = "max",
) -> np.ndarray:
    """
    Quantil ponderado para vários pontos de teste de uma vez.

    Args:
        scores: Scores de calibração (n)
        weight_matrix: Pesos (m x n), uma linha por ponto de teste
        alpha: Nível alpha
        test_weight: "max" ou massa positiva do ponto de teste

    Returns:
        Vetor (m) de quantis, +inf onde a massa acumulada não atinge 1 - alpha
    """
    scores = np.asarray(scores, dtype=float)
    weights = np.asarray(weight_matrix, dtype=float)
    if scores.size == 0:
        raise EmptyCalibrationError()
    if weights.ndim != 2 or weights.shape[1] != scores.size:
        raise DataError(
            f"Matriz de pesos {weights.shape} incompatível com {scores.size} scores"
        )
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise DataError("Pesos devem ser finitos e não negativos")

    level = 1.0 - as_alpha(alpha)
    order = np.argsort(scores, kind="stable")
    sorted_scores = scores[order]
    weights = weights[:, order]

    row_max = weights.max(axis=1)
    zero_rows = np.flatnonzero(row_max <= 0)
    if zero_rows.size:
        raise DegenerateWeightsError(int(zero_rows[0]))

    # Escala pelo maior peso: pesos iguais viram exatamente 1.0
    scaled = weights / row_max[:, None]
    cumulative = np.cumsum(scaled, axis=1)
    if test_weight == "max":
        point_mass = np.ones_like(row_max)
    else:
        point_mass = float(test_weight) / row_max
    mass = cumulative / (cumulative[:, -1] + point_mass)[:, None]

    reached = mass >= level
    found = reached.any(axis=1)
    index = reached.argmax(axis=1)
    return np.where(found, sorted_scores[index], np.inf)


def empirical_quantile(values, q: float) -> float:
    """Quantil empírico simples: k-ésimo menor valor com k = ceil(q * n)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyCalibrationError("valores")
    return float(np.quantile(values, q, method="inverted_cdf"))


def conformal_p_value(scores, test_score: float) -> float:
    """p-valor conformal (1 + #{s_i >= s}) / (n + 1)."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise EmptyCalibrationError()
    return float((1 + np.count_nonzero(scores >= test_score)) / (scores.size + 1))
