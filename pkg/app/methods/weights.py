"""
Pesos por distância para o CP ponderado e o bootstrap ponderado.

distância (Mahalanobis/Euclidiana) -> normalização -> kernel -> pesos
"""
import logging
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist
from scipy.special import expit

from app.core.errors import DataError, InvalidWeightsError, SingularCovarianceError
from app.core.types import as_feature_matrix
from app.models.schemas import DistanceType, DistanceWeightConfig, KernelType, NormalizeMode

logger = logging.getLogger(__name__)


def compute_distances(
    features_calib,
    features_pred,
    distance_type: DistanceType = DistanceType.MAHALANOBIS,
    ridge: float = 1e-8,
) -> np.ndarray:
    """
    Matriz de distâncias (n_pred x n_calib).

    Mahalanobis usa a covariância amostral da calibração regularizada por
    ridge * I.

    Args:
        features_calib: Matriz de features da calibração
        features_pred: Matriz de features dos pontos de teste
        distance_type: mahalanobis ou euclidean
        ridge: Regularização da covariância (>= 0)

    Returns:
        Distâncias não negativas
    """
    calib = as_feature_matrix(features_calib, "features_calib")
    pred = as_feature_matrix(features_pred, "features_pred")
    if calib.shape[1] != pred.shape[1]:
        raise DataError(
            f"features de calibração ({calib.shape[1]} colunas) e de teste "
            f"({pred.shape[1]} colunas) incompatíveis"
        )

    distance_type = DistanceType(distance_type)
    if distance_type == DistanceType.EUCLIDEAN:
        return cdist(pred, calib, metric="euclidean")

    if calib.shape[0] < 2:
        raise DataError("Mahalanobis requer ao menos 2 linhas de calibração")
    covariance = np.atleast_2d(np.cov(calib, rowvar=False))
    covariance = covariance + ridge * np.eye(covariance.shape[0])
    try:
        factor = linalg.cho_factor(covariance, lower=True)
    except linalg.LinAlgError:
        raise SingularCovarianceError()
    pivots = np.square(np.diag(factor[0]))
    if ridge == 0 and pivots.min() < 1e-12 * np.max(np.diag(covariance)):
        raise SingularCovarianceError()
    inverse = linalg.cho_solve(factor, np.eye(covariance.shape[0]))
    return cdist(pred, calib, metric="mahalanobis", VI=inverse)


def normalize_distances(distances, mode: NormalizeMode = NormalizeMode.NONE) -> np.ndarray:
    """
    Normaliza a matriz inteira de distâncias (estatísticas globais).

    minmax: (d - min) / (max - min); sd: d / desvio padrão populacional.
    Entradas degeneradas (amplitude ou desvio zero) viram zeros.
    """
    distances = np.asarray(distances, dtype=float)
    if np.any(distances < 0):
        raise DataError("Distâncias devem ser não negativas")
    mode = NormalizeMode(mode)
    if mode == NormalizeMode.NONE or distances.size == 0:
        return distances
    if mode == NormalizeMode.MINMAX:
        low, high = distances.min(), distances.max()
        if high == low:
            return np.zeros_like(distances)
        return (distances - low) / (high - low)
    spread = distances.std()
    if spread == 0:
        return np.zeros_like(distances)
    return distances / spread


def kernel_weights(
    distances,
    kernel: KernelType = KernelType.GAUSSIAN,
    custom_kernel: Optional[Callable] = None,
) -> np.ndarray:
    """
    Converte distâncias em pesos não negativos.

    gaussian: exp(-d^2); cauchy: 1 / (1 + d^2); logistic: 1 / (1 + exp(d));
    reciprocal_linear: 1 / (1 + d).
    """
    d = np.asarray(distances, dtype=float)
    kernel = KernelType(kernel)
    if kernel == KernelType.GAUSSIAN:
        return np.exp(-np.square(d))
    if kernel == KernelType.CAUCHY:
        return 1.0 / (1.0 + np.square(d))
    if kernel == KernelType.LOGISTIC:
        return expit(-d)
    if kernel == KernelType.RECIPROCAL_LINEAR:
        return 1.0 / (1.0 + d)

    if custom_kernel is None:
        raise InvalidWeightsError("kernel 'custom' sem custom_kernel")
    weights = np.asarray(custom_kernel(d), dtype=float)
    if weights.shape != d.shape:
        raise InvalidWeightsError(
            f"saída com shape {weights.shape}, esperado {d.shape}"
        )
    if not np.all(np.isfinite(weights)):
        raise InvalidWeightsError("valores não finitos")
    if np.any(weights < 0):
        raise InvalidWeightsError("valores negativos")
    return weights


def distance_weight_matrix(dw: DistanceWeightConfig, features_calib, features_pred) -> np.ndarray:
    """Pesos (n_pred x n_calib) segundo a configuração de ponderação."""
    distances = compute_distances(features_calib, features_pred, dw.distance_type, dw.ridge)
    distances = normalize_distances(distances, dw.normalize)
    if dw.kernel == KernelType.CUSTOM:
        # O kernel customizado recebe um vetor de distâncias por ponto de teste
        return np.vstack([kernel_weights(row, dw.kernel, dw.custom_kernel) for row in distances])
    return kernel_weights(distances, dw.kernel)


def require_features(dw: DistanceWeightConfig, features_calib, features_pred) -> None:
    """Valida a presença das features quando a ponderação está habilitada."""
    if not dw.enabled:
        return
    if features_calib is None or features_pred is None:
        raise DataError(
            "Ponderação por distância requer features da calibração e dos pontos de teste"
        )
