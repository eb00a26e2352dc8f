"""
Scores de não-conformidade e suas inversões.

As fórmulas relativa, relativa ajustada em zero e heterogênea são definições
escolhidas por serem invertíveis; EPSILON evita divisão por zero.
"""
from typing import Tuple

import numpy as np

from app.core.errors import DataError, InvalidScoreError, UnsupportedInversionError
from app.core.types import EPSILON, Interval, ScoreFunction
from app.models.schemas import ScoreType


def _scale(kind: ScoreType, pred: np.ndarray) -> np.ndarray:
    """Fator de escala do resíduo absoluto para os scores simétricos."""
    magnitude = np.abs(pred)
    if kind == ScoreType.ABSOLUTE:
        return np.ones_like(magnitude)
    if kind == ScoreType.RELATIVE:
        return np.maximum(magnitude, EPSILON)
    if kind == ScoreType.ZERO_ADJUSTED_RELATIVE:
        return magnitude + 1.0
    if kind == ScoreType.HETEROGENEOUS:
        return np.sqrt(np.maximum(magnitude, EPSILON))
    raise UnsupportedInversionError(kind.value)


def score(fn: ScoreFunction, pred: float, truth: float) -> float:
    """
    Score de não-conformidade de um par (predição, valor observado).

    Args:
        fn: Família do score
        pred: Predição pontual
        truth: Valor observado

    Returns:
        Score (finito)
    """
    return float(compute_scores(fn, [pred], [truth])[0])


def compute_scores(fn: ScoreFunction, preds, truths) -> np.ndarray:
    """Versão vetorizada de score; valida finitude e reporta o índice inválido."""
    preds = np.asarray(preds, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if preds.shape != truths.shape:
        raise DataError("preds e truths devem ter o mesmo tamanho")

    if fn.kind == ScoreType.CUSTOM:
        scores = np.array(
            [fn.custom_fn(float(p), float(t)) for p, t in zip(preds, truths)],
            dtype=float,
        )
    elif fn.kind == ScoreType.RAW:
        scores = truths - preds
    else:
        scores = np.abs(truths - preds) / _scale(fn.kind, preds)

    bad = np.flatnonzero(~np.isfinite(scores))
    if bad.size:
        raise InvalidScoreError(int(bad[0]), float(scores[bad[0]]))
    return scores


def invert_raw(pred: float, q_lo: float, q_hi: float) -> Interval:
    """Intervalo [pred + q_lo, pred + q_hi] para scores brutos (com sinal)."""
    return Interval(pred + q_lo, pred + q_hi)


def invert_score(fn: ScoreFunction, pred: float, q: float) -> Interval:
    """
    Região {y : score(pred, y) <= q} como intervalo fechado.

    Para scores brutos a região unilateral é tratada como [pred - q, pred + q];
    os métodos usam invert_raw com o par de quantis (q_lo, q_hi).
    """
    lower, upper = invert_scores(fn, np.array([pred], dtype=float), np.array([q], dtype=float))
    return Interval(lower[0], upper[0])


def invert_scores(fn: ScoreFunction, preds, q) -> Tuple[np.ndarray, np.ndarray]:
    """
    Inversão vetorizada: devolve (lower, upper) por ponto.

    q pode ser escalar ou um vetor com um quantil por ponto; q = +inf gera
    intervalo ilimitado.
    """
    preds = np.asarray(preds, dtype=float)
    q = np.broadcast_to(np.asarray(q, dtype=float), preds.shape)
    if np.any(q < 0) and fn.kind != ScoreType.RAW:
        raise DataError("Quantil negativo não é válido para score simétrico")

    if fn.kind == ScoreType.CUSTOM:
        if fn.custom_inverse is None:
            raise UnsupportedInversionError(fn.kind.value)
        bounds = [fn.custom_inverse(float(p), float(qq)) for p, qq in zip(preds, q)]
        lower = np.array([b[0] for b in bounds], dtype=float)
        upper = np.array([b[1] for b in bounds], dtype=float)
        return lower, upper

    if fn.kind == ScoreType.RAW:
        return invert_raw_many(preds, -q, q)

    half_width = q * _scale(fn.kind, preds)
    return preds - half_width, preds + half_width


def invert_raw_many(preds, q_lo, q_hi) -> Tuple[np.ndarray, np.ndarray]:
    """Versão vetorizada de invert_raw."""
    preds = np.asarray(preds, dtype=float)
    return preds + np.asarray(q_lo, dtype=float), preds + np.asarray(q_hi, dtype=float)
