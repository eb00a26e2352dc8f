"""
CP Mondrian (calibração por grupo) e CP clusterizado (CCP).
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import DataError, UnknownGroupError
from app.core.quantiles import empirical_quantile
from app.core.scores import compute_scores
from app.core.types import (
    WARN_POOLED_FALLBACK,
    CalibrationSet,
    IntervalTable,
    ScoreFunction,
    TableWarning,
    as_alpha,
    as_label_array,
    as_score_function,
)
from app.methods.clustering import kmeans, select_n_clusters
from app.methods.conformal import calibration_weights, conformal_bounds, flag_unbounded
from app.models.schemas import ChDirection, DistanceWeightConfig

logger = logging.getLogger(__name__)

DEFAULT_QUANTILE_LEVELS = (0.5, 0.6, 0.7, 0.8, 0.9)
WARN_CLAMPED_CLUSTERS = "clamped_cluster_count"


def _sorted_labels(labels) -> List[Any]:
    return sorted(set(labels), key=lambda label: str(label))


@dataclass(frozen=True)
class GroupedCalibration:
    """Calibração com grupos e o índice rótulo -> linhas"""
    base: CalibrationSet
    group_index: Dict[Any, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.base.groups is None:
            raise DataError("Calibração agrupada requer groups")
        index = {
            label: np.flatnonzero(self.base.groups == label)
            for label in _sorted_labels(self.base.groups)
        }
        object.__setattr__(self, "group_index", index)

    @classmethod
    def from_calibration(cls, calib: "CalibrationSet | GroupedCalibration") -> "GroupedCalibration":
        if isinstance(calib, GroupedCalibration):
            return calib
        return cls(base=calib)

    @property
    def labels(self) -> List[Any]:
        return list(self.group_index)


@dataclass(frozen=True)
class ClusterAssignment:
    """Mapeamento grupo -> cluster (1..M) e os embeddings usados"""
    mapping: Dict[Any, int]
    n_clusters: int
    embeddings: Dict[Any, np.ndarray]
    ch_scores: Optional[Dict[int, float]] = None


def _check_known(pred_class: np.ndarray, known: Sequence[Any]) -> None:
    known = set(known)
    unknown = [label for label in pred_class if label not in known]
    if unknown:
        raise UnknownGroupError(unknown)


def grouped_bounds(
    pred: np.ndarray,
    test_keys: np.ndarray,
    calib_keys: np.ndarray,
    scores: np.ndarray,
    alpha: float,
    score_fn: ScoreFunction,
    weights: Optional[np.ndarray] = None,
    test_weight="max",
    pooled_fallback: bool = False,
) -> Tuple[np.ndarray, np.ndarray, List[str], List[TableWarning]]:
    """
    Limites calibrados separadamente por chave (grupo ou cluster).

    Com pooled_fallback, chaves com menos de 2 pontos usam o quantil de toda
    a calibração.
    """
    lower = np.empty(len(pred))
    upper = np.empty(len(pred))
    row_warnings = [""] * len(pred)
    warnings: List[TableWarning] = []

    for key in _sorted_labels(test_keys):
        test_rows = np.flatnonzero(test_keys == key)
        calib_rows = np.flatnonzero(calib_keys == key)
        fallback = pooled_fallback and calib_rows.size < 2
        if fallback:
            message = (
                f"Grupo '{key}' com {calib_rows.size} ponto(s) de calibração: "
                "usando o quantil da calibração completa"
            )
            logger.warning(message)
            warnings.append(TableWarning(WARN_POOLED_FALLBACK, message, str(key)))
            calib_rows = np.arange(len(scores))

        sub_weights = None if weights is None else weights[np.ix_(test_rows, calib_rows)]
        lo, hi = conformal_bounds(
            pred[test_rows], scores[calib_rows], alpha, score_fn, sub_weights, test_weight
        )
        lower[test_rows] = lo
        upper[test_rows] = hi

        flags, key_warnings = flag_unbounded(lo, hi, key=str(key))
        warnings.extend(key_warnings)
        for row, flag in zip(test_rows, flags):
            codes = [c for c in (WARN_POOLED_FALLBACK if fallback else "", flag) if c]
            row_warnings[row] = ";".join(codes)

    return lower, upper, row_warnings, warnings


# ==================== MONDRIAN ====================

def pinterval_mondrian(
    pred,
    pred_class,
    calib,
    alpha: float = 0.1,
    score_fn=None,
    dw: Optional[DistanceWeightConfig] = None,
    features_pred=None,
) -> IntervalTable:
    """
    Intervalos conformais Mondrian: um quantil por grupo.

    Args:
        pred: Predições do teste
        pred_class: Grupo de cada ponto de teste
        calib: CalibrationSet com groups (ou GroupedCalibration)
        alpha: Nível alpha
        score_fn: ScoreFunction ou nome do score
        dw: Ponderação por distância (restrita às linhas do grupo)
        features_pred: Features do teste (DWCP)

    Returns:
        IntervalTable com o grupo de cada linha
    """
    alpha = as_alpha(alpha)
    score_fn = as_score_function(score_fn)
    dw = dw or DistanceWeightConfig()
    grouped = GroupedCalibration.from_calibration(calib)
    pred = np.atleast_1d(np.asarray(pred, dtype=float))
    pred_class = as_label_array(pred_class)
    if len(pred_class) != len(pred):
        raise DataError("pred_class deve ter um rótulo por predição")
    _check_known(pred_class, grouped.labels)

    base = grouped.base
    scores = compute_scores(score_fn, base.preds, base.truths)
    weights = calibration_weights(dw, base, features_pred, len(pred))
    lower, upper, row_warnings, warnings = grouped_bounds(
        pred, pred_class, base.groups, scores, alpha, score_fn, weights, dw.test_weight
    )
    return IntervalTable(
        pred=pred,
        lower=lower,
        upper=upper,
        groups=pred_class,
        row_warnings=tuple(row_warnings),
        warnings=tuple(warnings),
    )


# ==================== EMBEDDINGS E PARTIÇÃO ====================

def group_embeddings(
    calib,
    score_fn=None,
    quantile_levels: Sequence[float] = DEFAULT_QUANTILE_LEVELS,
) -> Dict[Any, np.ndarray]:
    """
    Embedding de cada grupo: quantis empíricos (k = ceil(q * n)) dos scores.
    """
    grouped = GroupedCalibration.from_calibration(calib)
    score_fn = as_score_function(score_fn)
    base = grouped.base
    scores = compute_scores(score_fn, base.preds, base.truths)
    return {
        label: np.array([empirical_quantile(scores[rows], q) for q in quantile_levels])
        for label, rows in grouped.group_index.items()
    }


def split_for_clustering(
    grouped: GroupedCalibration,
    clustering_fraction: float,
    seed: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Divide as linhas de cada grupo entre partição de clusterização e de quantis.

    A divisão é estratificada por grupo; grupos com 2+ pontos aparecem nas
    duas partições. Com clustering_fraction = 1 as duas partições são a
    calibração completa.
    """
    n = len(grouped.base)
    if clustering_fraction >= 1.0:
        everything = np.arange(n)
        return everything, everything

    rng = np.random.default_rng(seed)
    clustering_rows: List[np.ndarray] = []
    quantile_rows: List[np.ndarray] = []
    for rows in grouped.group_index.values():
        if rows.size == 1:
            clustering_rows.append(rows)
            quantile_rows.append(rows)
            continue
        shuffled = rng.permutation(rows)
        n_clust = int(round(clustering_fraction * rows.size))
        n_clust = min(max(n_clust, 1), rows.size - 1)
        clustering_rows.append(shuffled[:n_clust])
        quantile_rows.append(shuffled[n_clust:])
    return np.sort(np.concatenate(clustering_rows)), np.sort(np.concatenate(quantile_rows))


def assign_clusters(
    grouped: GroupedCalibration,
    score_fn: ScoreFunction,
    n_clusters: Optional[int] = None,
    optimize_n_clusters: bool = False,
    max_n_clusters: int = 5,
    seed: int = 2024,
    quantile_levels: Sequence[float] = DEFAULT_QUANTILE_LEVELS,
    ch_direction: ChDirection = ChDirection.MAXIMIZE,
    max_iter: int = 100,
    warnings: Optional[List[TableWarning]] = None,
) -> ClusterAssignment:
    """Agrupa os grupos em clusters a partir dos embeddings de scores."""
    embeddings = group_embeddings(grouped, score_fn, quantile_levels)
    labels = list(embeddings)
    matrix = np.vstack([embeddings[label] for label in labels])
    n_groups = len(labels)
    ch_scores = None

    if optimize_n_clusters:
        if max_n_clusters >= n_groups:
            message = (
                f"max_n_clusters = {max_n_clusters} >= número de grupos ({n_groups}); "
                f"limitado a {max(n_groups - 1, 1)}"
            )
            logger.warning(message)
            if warnings is not None:
                warnings.append(TableWarning(WARN_CLAMPED_CLUSTERS, message))
        selection = select_n_clusters(
            matrix, max_n_clusters, seed=seed, direction=ch_direction, max_iter=max_iter
        )
        if selection is None:
            # Poucos grupos para o índice CH: cada grupo vira um cluster
            raw_labels = np.arange(n_groups)
        else:
            raw_labels = selection.result.labels
            ch_scores = selection.ch_scores
    else:
        raw_labels = kmeans(matrix, n_clusters, seed=seed, max_iter=max_iter).labels

    # Ids consecutivos 1..M na ordem de primeira aparição
    _, first, inverse = np.unique(raw_labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    cluster_ids = order[inverse] + 1
    mapping = {label: int(cluster) for label, cluster in zip(labels, cluster_ids)}
    return ClusterAssignment(
        mapping=mapping,
        n_clusters=int(cluster_ids.max()),
        embeddings=embeddings,
        ch_scores=ch_scores,
    )


# ==================== CCP ====================

def pinterval_ccp(
    pred,
    pred_class,
    calib,
    alpha: float = 0.1,
    score_fn=None,
    n_clusters: Optional[int] = None,
    optimize_n_clusters: bool = False,
    max_n_clusters: int = 5,
    clustering_fraction: float = 0.5,
    seed: int = 2024,
    dw: Optional[DistanceWeightConfig] = None,
    features_pred=None,
    quantile_levels: Sequence[float] = DEFAULT_QUANTILE_LEVELS,
    ch_direction: ChDirection = ChDirection.MAXIMIZE,
    max_iter: int = 100,
) -> IntervalTable:
    """
    Intervalos conformais clusterizados.

    1. divide a calibração (por grupo) em partição de clusterização e de quantis;
    2. calcula os embeddings dos grupos na partição de clusterização;
    3. usa n_clusters ou escolhe M pelo índice CH;
    4. aplica Mondrian com o cluster como grupo, na partição de quantis.

    Returns:
        IntervalTable com grupo e cluster de cada linha
    """
    alpha = as_alpha(alpha)
    score_fn = as_score_function(score_fn)
    dw = dw or DistanceWeightConfig()
    if not optimize_n_clusters and n_clusters is None:
        raise DataError("Informe n_clusters ou optimize_n_clusters = True")
    if not (0 < clustering_fraction <= 1):
        raise DataError("clustering_fraction deve estar em (0, 1]")

    grouped = GroupedCalibration.from_calibration(calib)
    pred = np.atleast_1d(np.asarray(pred, dtype=float))
    pred_class = as_label_array(pred_class)
    if len(pred_class) != len(pred):
        raise DataError("pred_class deve ter um rótulo por predição")
    _check_known(pred_class, grouped.labels)

    clustering_rows, quantile_rows = split_for_clustering(grouped, clustering_fraction, seed)
    warnings: List[TableWarning] = []
    assignment = assign_clusters(
        GroupedCalibration(grouped.base.subset(clustering_rows)),
        score_fn,
        n_clusters=n_clusters,
        optimize_n_clusters=optimize_n_clusters,
        max_n_clusters=max_n_clusters,
        seed=seed,
        quantile_levels=quantile_levels,
        ch_direction=ch_direction,
        max_iter=max_iter,
        warnings=warnings,
    )

    quantile_calib = grouped.base.subset(quantile_rows)
    calib_clusters = as_label_array([assignment.mapping[g] for g in quantile_calib.groups])
    test_clusters = as_label_array([assignment.mapping[g] for g in pred_class])
    scores = compute_scores(score_fn, quantile_calib.preds, quantile_calib.truths)
    weights = calibration_weights(dw, quantile_calib, features_pred, len(pred))
    lower, upper, row_warnings, key_warnings = grouped_bounds(
        pred,
        test_clusters,
        calib_clusters,
        scores,
        alpha,
        score_fn,
        weights,
        dw.test_weight,
        pooled_fallback=True,
    )
    warnings.extend(key_warnings)
    return IntervalTable(
        pred=pred,
        lower=lower,
        upper=upper,
        groups=pred_class,
        clusters=test_clusters,
        row_warnings=tuple(row_warnings),
        warnings=tuple(warnings),
    )
