"""
Tipos de domínio compartilhados por todos os métodos de intervalo.

Os valores são imutáveis após a construção; as invariantes são verificadas
em __post_init__.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.core.errors import ConfigError, DataError, EmptyCalibrationError, InvalidAlphaError
from app.models.schemas import ScoreType

# Guarda contra divisão por zero nos scores relativos
EPSILON = 1e-8


def _as_float_array(values: Any, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DataError(f"'{name}' deve ser um vetor, recebido shape {arr.shape}")
    return arr


def as_label_array(values: Any) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = list(values)
    return arr


def as_feature_matrix(values: Any, name: str = "features") -> np.ndarray:
    """Converte features para matriz 2-D (uma linha por ponto)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DataError(f"'{name}' deve ser uma matriz, recebido shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"'{name}' contém valores não finitos")
    return arr


# ==================== NÍVEL DE CONFIANÇA ====================

@dataclass(frozen=True)
class ConfidenceLevel:
    """Nível alpha em (0, 1); a cobertura nominal é 1 - alpha"""
    alpha: float

    def __post_init__(self):
        try:
            alpha = float(self.alpha)
        except (TypeError, ValueError):
            raise InvalidAlphaError(self.alpha)
        if not (0.0 < alpha < 1.0):
            raise InvalidAlphaError(self.alpha)
        object.__setattr__(self, "alpha", alpha)

    @property
    def level(self) -> float:
        return 1.0 - self.alpha


def as_alpha(alpha: Union[float, ConfidenceLevel]) -> float:
    """Aceita float ou ConfidenceLevel e devolve alpha validado."""
    if isinstance(alpha, ConfidenceLevel):
        return alpha.alpha
    return ConfidenceLevel(alpha).alpha


# ==================== CALIBRAÇÃO ====================

@dataclass(frozen=True)
class CalibrationSet:
    """
    Predições pontuais e valores observados do conjunto de calibração.

    groups/bins/features são opcionais, mas quando presentes têm uma
    entrada (linha) por ponto de calibração.
    """
    preds: np.ndarray
    truths: np.ndarray
    groups: Optional[np.ndarray] = None
    bins: Optional[np.ndarray] = None
    features: Optional[np.ndarray] = None

    def __post_init__(self):
        preds = _as_float_array(self.preds, "preds")
        truths = _as_float_array(self.truths, "truths")
        if len(preds) == 0:
            raise EmptyCalibrationError("preds")
        if len(preds) != len(truths):
            raise DataError(
                f"preds ({len(preds)}) e truths ({len(truths)}) têm tamanhos diferentes"
            )
        for name, arr in (("preds", preds), ("truths", truths)):
            bad = np.flatnonzero(~np.isfinite(arr))
            if bad.size:
                raise DataError(f"'{name}' contém valor não finito na linha {int(bad[0])}")
        object.__setattr__(self, "preds", preds)
        object.__setattr__(self, "truths", truths)

        n = len(preds)
        for name in ("groups", "bins"):
            values = getattr(self, name)
            if values is None:
                continue
            labels = as_label_array(values)
            if len(labels) != n:
                raise DataError(f"'{name}' tem {len(labels)} entradas, esperado {n}")
            object.__setattr__(self, name, labels)

        if self.features is not None:
            features = as_feature_matrix(self.features)
            if features.shape[0] != n:
                raise DataError(
                    f"'features' tem {features.shape[0]} linhas, esperado {n}"
                )
            object.__setattr__(self, "features", features)

    def __len__(self) -> int:
        return len(self.preds)

    def subset(self, index: Sequence[int]) -> "CalibrationSet":
        """Retorna a calibração restrita às linhas em index."""
        index = np.asarray(index, dtype=int)
        return CalibrationSet(
            preds=self.preds[index],
            truths=self.truths[index],
            groups=None if self.groups is None else self.groups[index],
            bins=None if self.bins is None else self.bins[index],
            features=None if self.features is None else self.features[index],
        )

    @property
    def errors(self) -> np.ndarray:
        """Erros de predição truth - pred"""
        return self.truths - self.preds


# ==================== INTERVALOS ====================

@dataclass(frozen=True)
class Interval:
    """Intervalo fechado [lower, upper]; limites podem ser infinitos"""
    lower: float
    upper: float

    def __post_init__(self):
        lower, upper = float(self.lower), float(self.upper)
        if np.isnan(lower) or np.isnan(upper):
            raise DataError("Limites do intervalo não podem ser NaN")
        if lower > upper:
            raise DataError(f"Intervalo inválido: lower {lower} > upper {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class IntervalSet:
    """União ordenada de intervalos disjuntos (saída descontígua do BCCP)"""
    intervals: Tuple[Interval, ...]

    def __post_init__(self):
        intervals = tuple(self.intervals)
        if not intervals:
            raise DataError("IntervalSet não pode ser vazio")
        for prev, cur in zip(intervals, intervals[1:]):
            if cur.lower <= prev.upper:
                raise DataError(
                    f"Intervalos sobrepostos ou fora de ordem: "
                    f"[{prev.lower}, {prev.upper}] e [{cur.lower}, {cur.upper}]"
                )
        object.__setattr__(self, "intervals", intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __contains__(self, value: float) -> bool:
        return any(value in interval for interval in self.intervals)

    @property
    def width(self) -> float:
        return float(sum(interval.width for interval in self.intervals))

    @property
    def lower(self) -> float:
        return self.intervals[0].lower

    @property
    def upper(self) -> float:
        return self.intervals[-1].upper


# ==================== SCORE ====================

@dataclass(frozen=True)
class ScoreFunction:
    """
    Família de scores de não-conformidade.

    custom_fn(pred, truth) -> float é obrigatório se e somente se
    kind = custom. custom_inverse(pred, q) -> (lower, upper) torna um
    score customizado invertível.
    """
    kind: ScoreType = ScoreType.ABSOLUTE
    custom_fn: Optional[Callable[[float, float], float]] = None
    custom_inverse: Optional[Callable[[float, float], Tuple[float, float]]] = None

    def __post_init__(self):
        kind = ScoreType(self.kind)
        object.__setattr__(self, "kind", kind)
        if (kind == ScoreType.CUSTOM) != (self.custom_fn is not None):
            raise ConfigError("custom_fn deve ser informado se e somente se kind = 'custom'")

    @property
    def is_raw(self) -> bool:
        return self.kind == ScoreType.RAW


def as_score_function(score: Union[str, ScoreType, ScoreFunction, None]) -> ScoreFunction:
    if score is None:
        return ScoreFunction()
    if isinstance(score, ScoreFunction):
        return score
    return ScoreFunction(kind=ScoreType(score))


# ==================== TABELA DE INTERVALOS ====================

@dataclass(frozen=True)
class TableWarning:
    """Aviso estruturado anexado a uma IntervalTable"""
    code: str
    message: str
    key: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, "key": self.key}


# Códigos de aviso por linha
WARN_UNBOUNDED = "unbounded_quantile"
WARN_EMPTY_SET = "empty_prediction_set"
WARN_POOLED_FALLBACK = "pooled_quantile_fallback"


@dataclass(frozen=True)
class IntervalTable:
    """
    Saída uniforme de todas as operações pinterval_*.

    Cada linha tem lower/upper OU um IntervalSet (BCCP descontíguo); nas
    linhas com IntervalSet os limites lower/upper ficam NaN.
    """
    pred: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    groups: Optional[np.ndarray] = None
    clusters: Optional[np.ndarray] = None
    bins: Optional[np.ndarray] = None
    interval_sets: Optional[Tuple[Optional[IntervalSet], ...]] = None
    empty: Optional[np.ndarray] = None
    row_warnings: Optional[Tuple[str, ...]] = None
    warnings: Tuple[TableWarning, ...] = field(default_factory=tuple)

    def __post_init__(self):
        pred = _as_float_array(self.pred, "pred")
        lower = _as_float_array(self.lower, "lower")
        upper = _as_float_array(self.upper, "upper")
        n = len(pred)
        if len(lower) != n or len(upper) != n:
            raise DataError("pred, lower e upper devem ter o mesmo tamanho")
        object.__setattr__(self, "pred", pred)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

        sets = self.interval_sets
        if sets is not None:
            sets = tuple(sets)
            if len(sets) != n:
                raise DataError("interval_sets deve ter uma entrada por linha")
            object.__setattr__(self, "interval_sets", sets)
        has_set = np.array([s is not None for s in sets], dtype=bool) if sets else np.zeros(n, bool)
        has_bounds = ~np.isnan(lower) & ~np.isnan(upper)
        if np.any(has_set == has_bounds):
            raise DataError("Cada linha precisa de lower/upper ou de intervals, exatamente um")
        if np.any(lower[has_bounds] > upper[has_bounds]):
            raise DataError("Linha com lower > upper")

        for name in ("groups", "clusters", "bins"):
            values = getattr(self, name)
            if values is not None:
                labels = as_label_array(values)
                if len(labels) != n:
                    raise DataError(f"'{name}' deve ter uma entrada por linha")
                object.__setattr__(self, name, labels)

        empty = np.zeros(n, dtype=bool) if self.empty is None else np.asarray(self.empty, dtype=bool)
        object.__setattr__(self, "empty", empty)
        row_warnings = tuple([""] * n) if self.row_warnings is None else tuple(self.row_warnings)
        object.__setattr__(self, "row_warnings", row_warnings)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self) -> int:
        return len(self.pred)

    @property
    def is_discontiguous(self) -> bool:
        return self.interval_sets is not None and any(s is not None for s in self.interval_sets)

    def covers(self, truth: Any) -> np.ndarray:
        """Vetor booleano: truth_j pertence ao intervalo (ou união) da linha j."""
        truth = _as_float_array(truth, "truth")
        if len(truth) != len(self):
            raise DataError(
                f"truth tem {len(truth)} valores, tabela tem {len(self)} linhas"
            )
        with np.errstate(invalid="ignore"):
            covered = (truth >= self.lower) & (truth <= self.upper)
        if self.interval_sets is not None:
            for j, interval_set in enumerate(self.interval_sets):
                if interval_set is not None:
                    covered[j] = truth[j] in interval_set
        return covered & ~self.empty

    def widths(self) -> np.ndarray:
        """Largura por linha (soma das componentes para linhas com IntervalSet)."""
        with np.errstate(invalid="ignore"):
            widths = self.upper - self.lower
        if self.interval_sets is not None:
            for j, interval_set in enumerate(self.interval_sets):
                if interval_set is not None:
                    widths[j] = interval_set.width
        return widths

    def to_frame(self) -> pd.DataFrame:
        """DataFrame com uma linha por ponto de teste."""
        data: Dict[str, List[Any]] = {
            "pred": self.pred,
            "lower": self.lower,
            "upper": self.upper,
        }
        for name, column in (("groups", "group"), ("clusters", "cluster"), ("bins", "bin")):
            values = getattr(self, name)
            if values is not None:
                data[column] = values
        if self.interval_sets is not None:
            data["intervals"] = list(self.interval_sets)
        data["empty"] = self.empty
        data["warning"] = list(self.row_warnings)
        return pd.DataFrame(data)
