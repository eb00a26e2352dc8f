"""
Leitura e escrita de CSV (pandas).

Entrada: UTF-8, cabeçalho, vírgula como separador e ponto decimal; os papéis
das colunas vêm de pred_col, truth_col, group_col e feature_cols.
Saída de intervalos: pred,lower,upper[,group][,cluster][,bin][,intervals][,warning],
com -inf/+inf escritos como "-inf"/"inf" e conjuntos descontíguos como "l1:u1|l2:u2".
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.core.errors import ColumnMissingError, DataError
from app.core.types import (
    WARN_EMPTY_SET,
    CalibrationSet,
    Interval,
    IntervalSet,
    IntervalTable,
    as_label_array,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Colunas de rótulo lidas como texto
LABEL_COLUMNS = ("group", "cluster", "bin", "intervals", "warning")


# ==================== DATASET ====================

@dataclass(frozen=True)
class Dataset:
    """Linhas de entrada com os papéis de coluna já resolvidos"""
    frame: pd.DataFrame
    pred: np.ndarray
    truth: Optional[np.ndarray] = None
    groups: Optional[np.ndarray] = None
    features: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.pred)

    def subset(self, index: Sequence[int]) -> "Dataset":
        index = np.asarray(index, dtype=int)
        return Dataset(
            frame=self.frame.iloc[index].reset_index(drop=True),
            pred=self.pred[index],
            truth=None if self.truth is None else self.truth[index],
            groups=None if self.groups is None else self.groups[index],
            features=None if self.features is None else self.features[index],
        )

    def calibration(self) -> CalibrationSet:
        if self.truth is None:
            raise DataError("Calibração requer a coluna de valores observados (truth)")
        return CalibrationSet(
            preds=self.pred,
            truths=self.truth,
            groups=self.groups,
            features=self.features,
        )


def _numeric_column(frame: pd.DataFrame, column: str, path: Optional[PathLike]) -> np.ndarray:
    if column not in frame.columns:
        raise ColumnMissingError(column, path)
    values = pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(np.isnan(values))
    if bad.size:
        row = int(bad[0])
        raise DataError(
            f"Coluna '{column}': valor inválido na linha {row} ({frame[column].iloc[row]!r})"
        )
    return values


def dataset_from_frame(
    frame: pd.DataFrame,
    pred_col: str = "pred",
    truth_col: Optional[str] = "truth",
    group_col: Optional[str] = None,
    feature_cols: Sequence[str] = (),
    require_truth: bool = False,
    path: Optional[PathLike] = None,
) -> Dataset:
    """Resolve os papéis das colunas de um DataFrame."""
    pred = _numeric_column(frame, pred_col, path)
    truth = None
    if truth_col is not None and (require_truth or truth_col in frame.columns):
        truth = _numeric_column(frame, truth_col, path)

    groups = None
    if group_col is not None:
        if group_col not in frame.columns:
            raise ColumnMissingError(group_col, path)
        column = frame[group_col]
        if column.isna().any():
            row = int(np.flatnonzero(column.isna().to_numpy())[0])
            raise DataError(f"Coluna '{group_col}': rótulo ausente na linha {row}")
        groups = as_label_array(column.astype(str))

    features = None
    if feature_cols:
        features = np.column_stack([_numeric_column(frame, c, path) for c in feature_cols])

    return Dataset(frame=frame, pred=pred, truth=truth, groups=groups, features=features)


def read_dataset(
    path: PathLike,
    pred_col: str = "pred",
    truth_col: Optional[str] = "truth",
    group_col: Optional[str] = None,
    feature_cols: Sequence[str] = (),
    require_truth: bool = False,
) -> Dataset:
    """
    Lê um CSV de entrada.

    Args:
        path: Caminho do CSV
        pred_col: Coluna das predições (obrigatória)
        truth_col: Coluna dos valores observados
        group_col: Coluna de grupo (lida como texto)
        feature_cols: Colunas de features (DWCP/bootstrap ponderado)
        require_truth: Exige a coluna truth (calibração, avaliação, simulação)

    Returns:
        Dataset
    """
    dtype = {group_col: str} if group_col else None
    try:
        frame = pd.read_csv(path, dtype=dtype, encoding="utf-8", float_precision="round_trip")
    except FileNotFoundError:
        raise DataError(f"Arquivo não encontrado: {path}")
    logger.info(f"Lidas {len(frame)} linhas de {path}")
    return dataset_from_frame(
        frame, pred_col, truth_col, group_col, feature_cols, require_truth, path
    )


def read_truth(path: PathLike, truth_col: str = "truth") -> Tuple[np.ndarray, pd.DataFrame]:
    """Lê apenas a coluna de valores observados (e devolve o frame para rótulos)."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise DataError(f"Arquivo não encontrado: {path}")
    if truth_col not in frame.columns:
        raise ColumnMissingError(truth_col, path)
    numeric = pd.read_csv(path, usecols=[truth_col], float_precision="round_trip")
    return _numeric_column(numeric, truth_col, path), frame


# ==================== CONJUNTOS DE INTERVALOS ====================

def format_float(value: float) -> str:
    """repr sem perda; inteiros sem '.0' e infinitos como 'inf'/'-inf'."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def format_interval_set(interval_set: Optional[IntervalSet]) -> str:
    if interval_set is None:
        return ""
    return "|".join(f"{format_float(i.lower)}:{format_float(i.upper)}" for i in interval_set)


def parse_interval_set(text: Optional[str]) -> Optional[IntervalSet]:
    """Inverso de format_interval_set."""
    if text is None or (isinstance(text, float) and math.isnan(text)) or not str(text).strip():
        return None
    intervals: List[Interval] = []
    for part in str(text).split("|"):
        try:
            low, high = part.split(":")
            intervals.append(Interval(float(low), float(high)))
        except ValueError:
            raise DataError(f"Conjunto de intervalos inválido: {text!r}")
    return IntervalSet(tuple(intervals))


# ==================== TABELAS ====================

def table_to_frame(table: IntervalTable) -> pd.DataFrame:
    """DataFrame no layout do CSV de intervalos."""
    data = {"pred": table.pred, "lower": table.lower, "upper": table.upper}
    for name, column in (("groups", "group"), ("clusters", "cluster"), ("bins", "bin")):
        values = getattr(table, name)
        if values is not None:
            data[column] = ["" if v is None else str(v) for v in values]
    if table.interval_sets is not None:
        data["intervals"] = [format_interval_set(s) for s in table.interval_sets]
    if any(table.row_warnings):
        data["warning"] = list(table.row_warnings)
    return pd.DataFrame(data)


def _bound_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    """Coluna numérica do CSV de intervalos; células vazias (NaN) são preservadas."""
    raw = frame[column]
    values = pd.to_numeric(raw, errors="coerce")
    bad = np.flatnonzero((values.isna() & raw.notna()).to_numpy())
    if bad.size:
        row = int(bad[0])
        raise DataError(f"Coluna '{column}': valor inválido na linha {row} ({raw.iloc[row]!r})")
    return values.to_numpy(dtype=float)


def table_from_frame(frame: pd.DataFrame, path: Optional[PathLike] = None) -> IntervalTable:
    """Reconstrói a IntervalTable a partir do layout do CSV de intervalos."""
    for column in ("pred", "lower", "upper"):
        if column not in frame.columns:
            raise ColumnMissingError(column, path)
    text = {
        column: frame[column].fillna("").astype(str).tolist()
        for column in LABEL_COLUMNS
        if column in frame.columns
    }
    interval_sets = None
    if "intervals" in text:
        interval_sets = tuple(parse_interval_set(s) for s in text["intervals"])
    row_warnings = tuple(text.get("warning", [""] * len(frame)))
    empty = np.array([WARN_EMPTY_SET in w.split(";") for w in row_warnings], dtype=bool)

    def labels(column: str):
        if column not in text:
            return None
        return [v if v != "" else None for v in text[column]]

    return IntervalTable(
        pred=_bound_column(frame, "pred"),
        lower=_bound_column(frame, "lower"),
        upper=_bound_column(frame, "upper"),
        groups=labels("group"),
        clusters=labels("cluster"),
        bins=labels("bin"),
        interval_sets=interval_sets,
        empty=empty,
        row_warnings=row_warnings,
    )


def write_intervals(table: IntervalTable, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table_to_frame(table).to_csv(path, index=False, encoding="utf-8")
    logger.info(f"Intervalos gravados em {path} ({len(table)} linhas)")
    return path


def read_intervals(path: PathLike) -> IntervalTable:
    try:
        frame = pd.read_csv(
            path,
            dtype={column: str for column in LABEL_COLUMNS},
            keep_default_na=False,
            na_values={"lower": [""], "upper": [""]},
            float_precision="round_trip",
        )
    except FileNotFoundError:
        raise DataError(f"Arquivo não encontrado: {path}")
    return table_from_frame(frame, path)


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    """CSV com precisão completa."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, encoding="utf-8")
    return path


def render_text(frame: pd.DataFrame) -> str:
    """Tabela alinhada com 6 dígitos significativos."""
    if frame.empty:
        return "(vazio)"
    return frame.to_string(index=False, float_format=lambda x: f"{x:.6g}")
