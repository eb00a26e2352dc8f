"""
Álgebra de intervalos: interseção com bins, união de adjacentes e contiguização.
"""
from typing import Iterable, List, Optional, Tuple

import numpy as np

from app.core.errors import DataError
from app.core.types import Interval, IntervalSet


def contiguize(interval_set: IntervalSet) -> Interval:
    """[menor lower, maior upper] de um IntervalSet; contém todos os membros."""
    intervals = list(interval_set)
    if not intervals:
        raise DataError("contiguize requer ao menos um intervalo")
    return Interval(
        min(i.lower for i in intervals),
        max(i.upper for i in intervals),
    )


def merge_intervals(intervals: Iterable[Interval]) -> Optional[IntervalSet]:
    """
    Ordena e une intervalos que se sobrepõem ou compartilham extremo.

    Returns:
        IntervalSet ordenado e disjunto, ou None se não houver intervalos
    """
    ordered = sorted(intervals, key=lambda i: (i.lower, i.upper))
    if not ordered:
        return None
    merged: List[Interval] = [ordered[0]]
    for interval in ordered[1:]:
        last = merged[-1]
        if interval.lower <= last.upper:
            merged[-1] = Interval(last.lower, max(last.upper, interval.upper))
        else:
            merged.append(interval)
    return IntervalSet(tuple(merged))


def intersect_bin(
    lower,
    upper,
    bin_lower: float,
    bin_upper: float,
    closed_right: bool = False,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Interseção de [lower, upper] com o bin [bin_lower, bin_upper).

    A pertinência ao bin é aberta à direita (fechada se closed_right), mas o
    intervalo emitido é fechado: [max(lower, b0), min(upper, b1)].

    Returns:
        (lo, hi, valid) por ponto; valid indica interseção não vazia
    """
    lo = np.maximum(np.asarray(lower, dtype=float), bin_lower)
    hi = np.minimum(np.asarray(upper, dtype=float), bin_upper)
    valid = lo <= hi
    if not closed_right:
        valid &= lo < bin_upper
    return lo, hi, valid
