"""
K-means sobre embeddings de grupos e seleção do número de clusters pelo
índice de Caliński-Harabasz.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning
from sklearn.metrics import calinski_harabasz_score

from app.core.errors import InvalidClusterCountError, UndefinedIndexError
from app.models.schemas import ChDirection

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KMeansResult:
    """Rótulos 0..M-1 por embedding e centróides (M x d)"""
    labels: np.ndarray
    centroids: np.ndarray

    @property
    def n_clusters(self) -> int:
        return self.centroids.shape[0]


def _as_matrix(embeddings) -> np.ndarray:
    matrix = np.asarray(embeddings, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    return matrix


def kmeans(embeddings, n_clusters: int, seed: int = 2024, max_iter: int = 100) -> KMeansResult:
    """
    K-means de Lloyd com inicialização k-means++ (determinístico dado seed).

    Args:
        embeddings: Matriz (n x d), uma linha por grupo
        n_clusters: Número de clusters M (1 <= M <= n)
        seed: Semente da inicialização
        max_iter: Máximo de iterações de Lloyd

    Returns:
        KMeansResult
    """
    matrix = _as_matrix(embeddings)
    if n_clusters is None or n_clusters < 1 or n_clusters > matrix.shape[0]:
        raise InvalidClusterCountError(n_clusters)

    model = KMeans(
        n_clusters=n_clusters,
        init="k-means++",
        n_init=10,
        max_iter=max_iter,
        algorithm="lloyd",
        random_state=seed,
    )
    with warnings.catch_warnings():
        # Embeddings repetidos podem gerar menos clusters distintos que M
        warnings.simplefilter("ignore", ConvergenceWarning)
        labels = model.fit_predict(matrix)
    return KMeansResult(labels=labels.astype(int), centroids=model.cluster_centers_)


def calinski_harabasz(embeddings, labels) -> float:
    """
    Índice CH = [B / (M - 1)] / [W / (n - M)].

    W = 0 (clusters sem dispersão interna) devolve +inf.
    """
    matrix = _as_matrix(embeddings)
    labels = np.asarray(labels)
    n = matrix.shape[0]
    clusters = np.unique(labels)
    m = clusters.size
    if m < 2 or m >= n:
        raise UndefinedIndexError(m, n)

    within = sum(
        float(np.sum(np.square(matrix[labels == c] - matrix[labels == c].mean(axis=0))))
        for c in clusters
    )
    if within == 0:
        return float("inf")
    return float(calinski_harabasz_score(matrix, labels))


@dataclass(frozen=True)
class ClusterSelection:
    n_clusters: int
    result: KMeansResult
    ch_scores: Dict[int, float]


def select_n_clusters(
    embeddings,
    max_n_clusters: int,
    seed: int = 2024,
    direction: ChDirection = ChDirection.MAXIMIZE,
    max_iter: int = 100,
) -> Optional[ClusterSelection]:
    """
    Escolhe M em {2, ..., max_n_clusters} pelo índice CH.

    O índice é maior-é-melhor; direction = minimize inverte o critério.
    Retorna None quando não há candidatos (menos de 3 embeddings).
    """
    matrix = _as_matrix(embeddings)
    upper = min(max_n_clusters, matrix.shape[0] - 1)
    if upper < 2:
        return None

    results: Dict[int, KMeansResult] = {}
    ch_scores: Dict[int, float] = {}
    for m in range(2, upper + 1):
        result = kmeans(matrix, m, seed=seed, max_iter=max_iter)
        if np.unique(result.labels).size < 2:
            continue
        try:
            ch_scores[m] = calinski_harabasz(matrix, result.labels)
        except UndefinedIndexError:
            continue
        results[m] = result

    if not ch_scores:
        return None
    candidates = sorted(ch_scores)
    values = np.array([ch_scores[m] for m in candidates])
    if ChDirection(direction) == ChDirection.MINIMIZE:
        best = candidates[int(np.argmin(values))]
    else:
        best = candidates[int(np.argmax(values))]
    logger.info(
        f"Número de clusters escolhido pelo índice CH ({ChDirection(direction).value}): {best}"
    )
    return ClusterSelection(n_clusters=best, result=results[best], ch_scores=ch_scores)
