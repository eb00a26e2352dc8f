"""
CP condicional por bins do desfecho (BCCP), com saída descontígua ou contiguizada.
"""
import logging
from typing import List, Optional, Sequence, Union

import numpy as np

from app.core.errors import DataError, EmptyBinError, OutOfRangeError
from app.core.intervals import intersect_bin, merge_intervals
from app.core.scores import compute_scores
from app.core.types import (
    WARN_EMPTY_SET,
    CalibrationSet,
    Interval,
    IntervalSet,
    IntervalTable,
    TableWarning,
    as_alpha,
    as_score_function,
)
from app.methods.conformal import calibration_weights, conformal_bounds
from app.models.schemas import BinSpec, DistanceWeightConfig

logger = logging.getLogger(__name__)

WARN_SMALL_BIN = "small_bin"


def as_bin_spec(spec: Union[BinSpec, Sequence[float]]) -> BinSpec:
    if isinstance(spec, BinSpec):
        return spec
    return BinSpec(breaks=list(spec))


def assign_bins(values, spec: Union[BinSpec, Sequence[float]]) -> np.ndarray:
    """
    Bin de cada valor: t tal que b_{t-1} <= v < b_t.

    O último bin é fechado em cima quando b_B é finito.

    Raises:
        OutOfRangeError: valor fora de [b_0, b_B]
    """
    spec = as_bin_spec(spec)
    breaks = np.asarray(spec.breaks, dtype=float)
    values = np.atleast_1d(np.asarray(values, dtype=float))
    bins = np.searchsorted(breaks, values, side="right")
    # v == b_B finito pertence ao último bin
    bins[values == breaks[-1]] = spec.n_bins
    bad = np.flatnonzero((bins < 1) | (bins > spec.n_bins))
    if bad.size:
        j = int(bad[0])
        raise OutOfRangeError(j, float(values[j]), breaks[0], breaks[-1])
    return bins.astype(int)


def quantile_breaks(values, n_bins: int) -> BinSpec:
    """
    Breaks que equilibram o número de observações entre n_bins bins.

    Os breaks internos são quantis empíricos de values; os externos são ±inf.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DataError("quantile_breaks requer valores")
    if n_bins < 1:
        raise DataError(f"n_bins deve ser ao menos 1, recebido {n_bins}")
    if n_bins == 1:
        return BinSpec(breaks=[-np.inf, np.inf])
    probs = np.arange(1, n_bins) / n_bins
    inner = np.unique(np.quantile(values, probs))
    if inner.size < 1:
        raise DataError("Valores sem variação suficiente para formar bins")
    return BinSpec(breaks=[-np.inf, *inner.tolist(), np.inf])


def _bins_of_pred(pred: np.ndarray, spec: BinSpec) -> List[Optional[int]]:
    breaks = np.asarray(spec.breaks, dtype=float)
    bins = np.searchsorted(breaks, pred, side="right")
    bins[pred == breaks[-1]] = spec.n_bins
    return [int(b) if 1 <= b <= spec.n_bins else None for b in bins]


def pinterval_bccp(
    pred,
    calib: CalibrationSet,
    spec: Union[BinSpec, Sequence[float]],
    alpha: float = 0.1,
    score_fn=None,
    contiguize: bool = False,
    dw: Optional[DistanceWeightConfig] = None,
    features_pred=None,
) -> IntervalTable:
    """
    Intervalos conformais condicionais por bin do desfecho.

    Para cada bin t calcula o quantil conformal dos scores do bin, inverte o
    score em torno da predição e intersecta com [b_{t-1}, b_t). A união das
    interseções não vazias é o conjunto de predição: bins cuja região é vazia
    são exatamente os rejeitados pelo p-valor do bin.

    Args:
        pred: Predições do teste
        calib: Calibração; calib.bins (rótulos 1..B) substitui a atribuição pelos breaks
        spec: BinSpec ou lista de breaks
        alpha: Nível alpha
        score_fn: ScoreFunction ou nome do score
        contiguize: True -> um único [lower, upper]; False -> IntervalSet por linha
        dw: Ponderação por distância
        features_pred: Features do teste (DWCP)

    Returns:
        IntervalTable (lower/upper ou intervals, e o bin da predição)
    """
    alpha = as_alpha(alpha)
    score_fn = as_score_function(score_fn)
    dw = dw or DistanceWeightConfig()
    spec = as_bin_spec(spec)
    pred = np.atleast_1d(np.asarray(pred, dtype=float))

    if calib.bins is not None:
        calib_bins = np.asarray([int(b) for b in calib.bins])
        if np.any((calib_bins < 1) | (calib_bins > spec.n_bins)):
            raise DataError(f"Rótulos de bin devem estar em 1..{spec.n_bins}")
    else:
        calib_bins = assign_bins(calib.truths, spec)

    scores = compute_scores(score_fn, calib.preds, calib.truths)
    weights = calibration_weights(dw, calib, features_pred, len(pred))
    warnings: List[TableWarning] = []
    min_points = 1.0 / alpha - 1.0

    candidates_lo: List[np.ndarray] = []
    candidates_hi: List[np.ndarray] = []
    candidates_ok: List[np.ndarray] = []
    for t in spec.labels:
        rows = np.flatnonzero(calib_bins == t)
        if rows.size == 0:
            raise EmptyBinError(t)
        if rows.size < min_points:
            message = (
                f"Bin {t} com {rows.size} ponto(s) de calibração (< 1/alpha - 1): "
                "região do bin será ilimitada"
            )
            logger.warning(message)
            warnings.append(TableWarning(WARN_SMALL_BIN, message, str(t)))

        sub_weights = None if weights is None else weights[:, rows]
        lower_t, upper_t = conformal_bounds(
            pred, scores[rows], alpha, score_fn, sub_weights, dw.test_weight
        )
        bin_lower, bin_upper = spec.bounds(t)
        closed_right = t == spec.n_bins and np.isfinite(bin_upper)
        lo, hi, ok = intersect_bin(lower_t, upper_t, bin_lower, bin_upper, closed_right)
        candidates_lo.append(lo)
        candidates_hi.append(hi)
        candidates_ok.append(ok)

    lo = np.vstack(candidates_lo)
    hi = np.vstack(candidates_hi)
    ok = np.vstack(candidates_ok)
    empty = ~ok.any(axis=0)

    n = len(pred)
    row_warnings = [WARN_EMPTY_SET if flag else "" for flag in empty]
    if empty.any():
        message = f"{int(empty.sum())} conjunto(s) de predição vazio(s): todos os bins rejeitados"
        logger.warning(message)
        warnings.append(TableWarning(WARN_EMPTY_SET, message))

    if contiguize:
        with np.errstate(invalid="ignore"):
            lower = np.where(empty, pred, np.min(np.where(ok, lo, np.inf), axis=0))
            upper = np.where(empty, pred, np.max(np.where(ok, hi, -np.inf), axis=0))
        interval_sets = None
    else:
        lower = np.full(n, np.nan)
        upper = np.full(n, np.nan)
        sets: List[Optional[IntervalSet]] = []
        for j in range(n):
            if empty[j]:
                lower[j] = upper[j] = pred[j]
                sets.append(None)
                continue
            members = [Interval(lo[t, j], hi[t, j]) for t in np.flatnonzero(ok[:, j])]
            sets.append(merge_intervals(members))
        interval_sets = tuple(sets)

    return IntervalTable(
        pred=pred,
        lower=lower,
        upper=upper,
        bins=_bins_of_pred(pred, spec),
        interval_sets=interval_sets,
        empty=empty,
        row_warnings=tuple(row_warnings),
        warnings=tuple(warnings),
    )
