"""
Métricas de avaliação: cobertura empírica, largura média e MAE da cobertura.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

import numpy as np

from app.core.errors import DataError
from app.core.types import IntervalTable, as_alpha, as_label_array
from app.models.schemas import CoverageReport, KeyCoverage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WidthSummary:
    """Largura média (inf se houver linha ilimitada) e média das linhas finitas"""
    mean: float
    finite_mean: float
    n_unbounded: int


def interval_coverage(truth, table: IntervalTable) -> float:
    """Fração das linhas cujo truth pertence ao intervalo; conjuntos vazios são erros."""
    covered = table.covers(truth)
    if covered.size == 0:
        raise DataError("Tabela de intervalos vazia")
    return int(covered.sum()) / covered.size


def width_summary(table: IntervalTable) -> WidthSummary:
    widths = table.widths()
    finite = np.isfinite(widths)
    n_unbounded = int((~finite).sum())
    finite_mean = float(widths[finite].mean()) if finite.any() else float("nan")
    if widths.size == 0:
        mean = float("nan")
    elif n_unbounded:
        mean = float("inf")
    else:
        mean = finite_mean
    return WidthSummary(mean=mean, finite_mean=finite_mean, n_unbounded=n_unbounded)


def mean_width(table: IntervalTable) -> float:
    """Largura média; qualquer linha ilimitada torna a média +inf."""
    summary = width_summary(table)
    if summary.n_unbounded:
        logger.info(
            f"{summary.n_unbounded} linha(s) ilimitada(s); média das finitas = {summary.finite_mean}"
        )
    return summary.mean


def mae_coverage(coverages: Mapping[Any, float], alpha: float) -> float:
    """
    Erro absoluto médio da cobertura em relação ao nível nominal.

    Args:
        coverages: Cobertura por grupo/bin
        alpha: Nível alpha

    Returns:
        (1/G) * soma |c_g - (1 - alpha)|
    """
    alpha = as_alpha(alpha)
    if not coverages:
        raise DataError("mae_coverage requer ao menos uma cobertura")
    gaps = np.abs(np.asarray(list(coverages.values()), dtype=float) - (1 - alpha))
    return float(gaps.mean())


def coverage_by_key(truth, table: IntervalTable, keys) -> Dict[str, KeyCoverage]:
    """Cobertura, contagem e largura média por rótulo (grupo, cluster ou bin)."""
    covered = table.covers(truth)
    widths = table.widths()
    keys = as_label_array(keys)
    if len(keys) != len(covered):
        raise DataError(f"keys tem {len(keys)} valores, tabela tem {len(covered)} linhas")

    names = np.array([str(k) for k in keys], dtype=object)
    result: Dict[str, KeyCoverage] = {}
    for name in sorted(set(names)):
        rows = names == name
        n = int(rows.sum())
        key_widths = widths[rows]
        result[name] = KeyCoverage(
            coverage=int(covered[rows].sum()) / n,
            n=n,
            mean_width=float("inf") if np.any(~np.isfinite(key_widths)) else float(key_widths.mean()),
        )
    return result


def coverage_report(
    truth,
    table: IntervalTable,
    keys=None,
    alpha: Optional[float] = None,
) -> CoverageReport:
    """
    Relatório completo de avaliação de uma tabela de intervalos.

    Args:
        truth: Valores observados do teste
        table: IntervalTable avaliada
        keys: Rótulos por linha para a cobertura por grupo/bin (opcional)
        alpha: Nível alpha; com keys, habilita o MAE da cobertura

    Returns:
        CoverageReport
    """
    covered = table.covers(truth)
    summary = width_summary(table)
    by_key = coverage_by_key(truth, table, keys) if keys is not None else None
    mae = None
    if by_key and alpha is not None:
        mae = mae_coverage({k: v.coverage for k, v in by_key.items()}, alpha)

    return CoverageReport(
        coverage=int(covered.sum()) / covered.size if covered.size else 0.0,
        n=int(covered.size),
        mean_width=summary.mean,
        finite_mean_width=summary.finite_mean,
        n_unbounded=summary.n_unbounded,
        by_key=by_key,
        mae=mae,
        alpha=alpha,
    )
