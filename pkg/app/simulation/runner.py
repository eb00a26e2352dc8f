"""
Execução dos métodos e harness de simulação Monte Carlo.

Cada iteração k usa um fluxo aleatório próprio derivado de (seed, k): a
iteração é reprodutível isoladamente e o resultado não depende da ordem de
execução nem do número de threads.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from app.core.errors import AllIterationsFailedError, ConfigError, DataError, IntervalError
from app.core.types import IntervalTable
from app.evaluation.coverage import coverage_report, mae_coverage
from app.methods.bccp import pinterval_bccp, quantile_breaks
from app.methods.bootstrap import pinterval_bootstrap, point_rng
from app.methods.conformal import pinterval_conformal
from app.methods.grouped import pinterval_ccp, pinterval_mondrian
from app.methods.parametric import pinterval_parametric
from app.models.schemas import (
    BinSpec,
    BootstrapConfig,
    DistSpec,
    Method,
    MethodConfig,
    RunConfig,
    StatusIteracao,
)
from app.utils.io import Dataset, render_text, write_frame

logger = logging.getLogger(__name__)


def iteration_seed(seed: int, index: int) -> int:
    """Semente derivada para a iteração (derivação por contador)."""
    return int(np.random.SeedSequence(seed, spawn_key=(index, 1)).generate_state(1)[0])


# ==================== DESPACHO DOS MÉTODOS ====================

def bin_spec_for(cfg: MethodConfig, calib_truths: Optional[np.ndarray]) -> Optional[BinSpec]:
    """Breaks fixos ou, com n_bins, bins balanceados pelos truths da calibração."""
    if cfg.bccp.breaks is not None:
        return BinSpec(breaks=cfg.bccp.breaks)
    if cfg.bccp.n_bins is not None:
        return quantile_breaks(calib_truths, cfg.bccp.n_bins)
    return None


def run_method(cfg: MethodConfig, calib: Dataset, test: Dataset, seed: int) -> IntervalTable:
    """
    Constrói os intervalos de um método sobre o conjunto de teste.

    Args:
        cfg: Bloco do método
        calib: Dataset de calibração (com truth)
        test: Dataset de teste
        seed: Semente para CCP e bootstrap

    Returns:
        IntervalTable
    """
    calib_set = calib.calibration()
    dw = cfg.distance if cfg.distance.enabled else None
    features_pred = test.features if cfg.distance.enabled else None

    if cfg.method == Method.CONFORMAL:
        return pinterval_conformal(
            test.pred, calib_set, cfg.alpha, cfg.score, dw=dw, features_pred=features_pred
        )

    if cfg.method in (Method.MONDRIAN, Method.CCP):
        if calib.groups is None or test.groups is None:
            raise DataError(f"Método '{cfg.method.value}' requer a coluna de grupo (group_col)")
        if cfg.method == Method.MONDRIAN:
            return pinterval_mondrian(
                test.pred, test.groups, calib_set, cfg.alpha, cfg.score,
                dw=dw, features_pred=features_pred,
            )
        return pinterval_ccp(
            test.pred,
            test.groups,
            calib_set,
            cfg.alpha,
            cfg.score,
            n_clusters=cfg.ccp.n_clusters,
            optimize_n_clusters=cfg.ccp.optimize_n_clusters,
            max_n_clusters=cfg.ccp.max_n_clusters,
            clustering_fraction=cfg.ccp.clustering_fraction,
            seed=seed,
            dw=dw,
            features_pred=features_pred,
            quantile_levels=cfg.ccp.quantile_levels,
            ch_direction=cfg.ccp.ch_direction,
            max_iter=cfg.ccp.max_iter,
        )

    if cfg.method == Method.BCCP:
        spec = bin_spec_for(cfg, calib_set.truths)
        return pinterval_bccp(
            test.pred, calib_set, spec, cfg.alpha, cfg.score,
            contiguize=cfg.bccp.contiguize, dw=dw, features_pred=features_pred,
        )

    if cfg.method == Method.BOOTSTRAP:
        boot = BootstrapConfig(
            n_bootstrap=cfg.bootstrap.n_bootstrap,
            error_type=cfg.bootstrap.error_type,
            seed=seed,
            dw=cfg.distance,
        )
        return pinterval_bootstrap(test.pred, calib_set, cfg.alpha, boot, features_pred=features_pred)

    spec = DistSpec(
        dist=cfg.parametric.dist,
        pars=cfg.parametric.pars,
        center_at_zero=cfg.parametric.center_at_zero,
    )
    return pinterval_parametric(
        test.pred, spec, None if cfg.parametric.pars is not None else calib_set, cfg.alpha
    )


# ==================== ITERAÇÕES ====================

@dataclass
class MethodRecord:
    """Contagens de uma iteração para um método"""
    hits: int
    n: int
    width_sum: float
    finite_width_sum: float
    n_unbounded: int
    groups: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    bins: Dict[str, Tuple[int, int]] = field(default_factory=dict)


@dataclass
class IterationResult:
    index: int
    status: StatusIteracao
    records: Dict[str, MethodRecord] = field(default_factory=dict)
    failures: Dict[str, str] = field(default_factory=dict)


def split_indices(n: int, calib_fraction: float, seed: int, index: int) -> Tuple[np.ndarray, np.ndarray]:
    """Partição aleatória calibração/teste da iteração."""
    n_calib = int(np.floor(calib_fraction * n))
    if n_calib < 1 or n_calib >= n:
        raise DataError(
            f"calib_fraction = {calib_fraction} com {n} linhas não deixa calibração e teste não vazios"
        )
    perm = point_rng(seed, index).permutation(n)
    return np.sort(perm[:n_calib]), np.sort(perm[n_calib:])


def truth_bins(truths: np.ndarray, spec: BinSpec) -> np.ndarray:
    """Rótulo do bin de cada truth ("" fora dos breaks)."""
    breaks = np.asarray(spec.breaks, dtype=float)
    idx = np.searchsorted(breaks, truths, side="right")
    idx[truths == breaks[-1]] = spec.n_bins
    return np.array([str(b) if 1 <= b <= spec.n_bins else "" for b in idx], dtype=object)


def _key_counts(report) -> Dict[str, Tuple[int, int]]:
    if not report.by_key:
        return {}
    return {
        key: (int(round(cov.coverage * cov.n)), cov.n)
        for key, cov in report.by_key.items()
        if key != ""
    }


def _record(table: IntervalTable, test: Dataset, bin_labels: Optional[np.ndarray]) -> MethodRecord:
    report = coverage_report(test.truth, table, keys=test.groups)
    widths = table.widths()
    finite = np.isfinite(widths)
    record = MethodRecord(
        hits=int(round(report.coverage * report.n)),
        n=report.n,
        width_sum=float(widths.sum()),
        finite_width_sum=float(widths[finite].sum()),
        n_unbounded=report.n_unbounded,
        groups=_key_counts(report),
    )
    if bin_labels is not None:
        record.bins = _key_counts(coverage_report(test.truth, table, keys=bin_labels))
    return record


def run_iteration(config: RunConfig, entries: List[MethodConfig], data: Dataset, index: int) -> IterationResult:
    """Executa todos os métodos em uma iteração; falhas são registradas, não propagadas."""
    logger.debug(f"Iniciando iteração {index}")
    calib_idx, test_idx = split_indices(len(data), config.calib_fraction, config.seed, index)
    calib, test = data.subset(calib_idx), data.subset(test_idx)
    seed = iteration_seed(config.seed, index)

    result = IterationResult(index=index, status=StatusIteracao.SUCESSO)
    bin_labels = None
    bin_cfg = evaluation_bins_config(config, entries)
    if bin_cfg is not None:
        try:
            bin_labels = truth_bins(test.truth, bin_spec_for(bin_cfg, calib.truth))
        except (IntervalError, ValueError) as e:
            # iteração sem tabela por bin; o método BCCP registra a própria falha abaixo
            logger.warning(f"Iteração {index}, bins de avaliação: {e}")

    for cfg in entries:
        label = cfg.display_label
        try:
            table = run_method(cfg, calib, test, seed)
            result.records[label] = _record(table, test, bin_labels)
        except (IntervalError, ValueError) as e:
            logger.warning(f"Iteração {index}, método {label}: {e}")
            result.failures[label] = str(e)

    if result.failures:
        result.status = StatusIteracao.ERRO if not result.records else StatusIteracao.PARCIAL
    logger.debug(f"Iteração {index} finalizada: {result.status.value}")
    return result


def evaluation_bins_config(config: RunConfig, entries: List[MethodConfig]) -> Optional[MethodConfig]:
    """Configuração de bins usada na tabela por bin (primeiro método BCCP ou o bloco de topo)."""
    for cfg in entries:
        if cfg.method == Method.BCCP:
            return cfg
    if config.bccp.breaks is not None or config.bccp.n_bins is not None:
        return config
    return None


# ==================== AGREGAÇÃO ====================

@dataclass
class SimulationResult:
    aggregate: pd.DataFrame
    groups: pd.DataFrame
    bins: pd.DataFrame
    failures: pd.DataFrame
    statuses: Dict[str, int]

    def render(self) -> str:
        sections = [
            ("Agregado", self.aggregate),
            ("Cobertura por grupo", self.groups),
            ("Cobertura por bin", self.bins),
        ]
        return "\n\n".join(f"{title}\n{render_text(frame)}" for title, frame in sections) + "\n"

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate.to_dict(orient="records"),
            "groups": self.groups.to_dict(orient="records"),
            "bins": self.bins.to_dict(orient="records"),
            "failures": self.failures.to_dict(orient="records"),
            "statuses": self.statuses,
        }


def _pool(records: List[Dict[str, Tuple[int, int]]]) -> Dict[str, Tuple[int, int]]:
    pooled: Dict[str, List[int]] = {}
    for counts in records:
        for key, (hits, n) in counts.items():
            acc = pooled.setdefault(key, [0, 0])
            acc[0] += hits
            acc[1] += n
    return {key: (hits, n) for key, (hits, n) in pooled.items()}


def _key_table(
    labels: List[str],
    pooled: Dict[str, Dict[str, Tuple[int, int]]],
    alpha: Dict[str, float],
) -> Tuple[pd.DataFrame, Dict[str, float]]:
    keys = sorted({key for counts in pooled.values() for key in counts}, key=_natural_key)
    rows = []
    maes: Dict[str, float] = {}
    for label in labels:
        counts = pooled.get(label, {})
        row: Dict[str, object] = {"method": label}
        coverages = {}
        for key in keys:
            hits, n = counts.get(key, (0, 0))
            row[key] = hits / n if n else np.nan
            if n:
                coverages[key] = hits / n
        maes[label] = mae_coverage(coverages, alpha[label]) if coverages else np.nan
        row["mae"] = maes[label]
        rows.append(row)
    columns = ["method", *keys, "mae"]
    return pd.DataFrame(rows, columns=columns), maes


def _natural_key(key: str):
    try:
        return (0, float(key), key)
    except ValueError:
        return (1, 0.0, key)


def aggregate_results(entries: List[MethodConfig], results: List[IterationResult], has_groups: bool, has_bins: bool) -> SimulationResult:
    labels = [cfg.display_label for cfg in entries]
    alpha = {cfg.display_label: cfg.alpha for cfg in entries}

    group_pool = {
        label: _pool([r.records[label].groups for r in results if label in r.records]) for label in labels
    }
    bin_pool = {
        label: _pool([r.records[label].bins for r in results if label in r.records]) for label in labels
    }
    group_table, group_mae = _key_table(labels, group_pool, alpha) if has_groups else (pd.DataFrame(columns=["method"]), {})
    bin_table, bin_mae = _key_table(labels, bin_pool, alpha) if has_bins else (pd.DataFrame(columns=["method"]), {})

    rows = []
    for label in labels:
        records = [r.records[label] for r in results if label in r.records]
        hits = sum(rec.hits for rec in records)
        n = sum(rec.n for rec in records)
        n_unbounded = sum(rec.n_unbounded for rec in records)
        finite_n = n - n_unbounded
        rows.append({
            "method": label,
            "alpha": alpha[label],
            "coverage": hits / n if n else np.nan,
            "mean_width": (np.inf if n_unbounded else sum(rec.width_sum for rec in records) / n) if n else np.nan,
            "finite_mean_width": sum(rec.finite_width_sum for rec in records) / finite_n if finite_n else np.nan,
            "n_unbounded": n_unbounded,
            "group_mae": group_mae.get(label, np.nan),
            "bin_mae": bin_mae.get(label, np.nan),
            "iterations_ok": len(records),
            "iterations_failed": sum(1 for r in results if label in r.failures),
        })
    aggregate = pd.DataFrame(rows)

    failures = pd.DataFrame(
        [
            {"iteration": r.index, "method": label, "error": message}
            for r in results
            for label, message in r.failures.items()
        ],
        columns=["iteration", "method", "error"],
    )
    statuses = {status.value: sum(1 for r in results if r.status == status) for status in StatusIteracao}
    return SimulationResult(aggregate, group_table, bin_table, failures, statuses)


def simulate(
    config: RunConfig,
    data: Dataset,
    out_dir: Optional[Union[str, Path]] = None,
    threads: int = 1,
    write_json: bool = False,
) -> SimulationResult:
    """
    Simulação Monte Carlo: n_iterations partições calibração/teste, todos os
    métodos configurados em cada uma, tabelas agregada, por grupo e por bin.

    Args:
        config: Configuração de execução (métodos em [[methods]] ou o bloco de topo)
        data: Dataset com pred e truth
        out_dir: Diretório de saída (aggregate.csv, groups.csv, bins.csv,
            failures.csv, report.txt e, opcionalmente, report.json)
        threads: Número de threads para as iterações
        write_json: Grava report.json

    Returns:
        SimulationResult

    Raises:
        AllIterationsFailedError: nenhuma iteração produziu resultado
    """
    if data.truth is None:
        raise DataError("Simulação requer a coluna truth")
    entries = config.method_entries()
    labels = [cfg.display_label for cfg in entries]
    duplicated = sorted({label for label in labels if labels.count(label) > 1})
    if duplicated:
        raise ConfigError(f"Rótulos de método repetidos: {', '.join(duplicated)}; use 'label'")

    logger.info(
        f"Iniciando simulação: {config.n_iterations} iterações, métodos {', '.join(labels)}, "
        f"{threads} thread(s)"
    )
    indices = range(config.n_iterations)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(lambda k: run_iteration(config, entries, data, k), indices))
    else:
        results = [run_iteration(config, entries, data, k) for k in indices]

    has_bins = evaluation_bins_config(config, entries) is not None
    result = aggregate_results(entries, results, data.groups is not None, has_bins)
    logger.info(f"Simulação finalizada: {result.statuses}")

    if out_dir is not None:
        write_simulation(result, out_dir, write_json)
    if result.statuses[StatusIteracao.ERRO.value] == len(results):
        raise AllIterationsFailedError(len(results))
    return result


def write_simulation(result: SimulationResult, out_dir: Union[str, Path], write_json: bool = False) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_frame(result.aggregate, out_dir / "aggregate.csv")
    write_frame(result.groups, out_dir / "groups.csv")
    write_frame(result.bins, out_dir / "bins.csv")
    write_frame(result.failures, out_dir / "failures.csv")
    (out_dir / "report.txt").write_text(result.render(), encoding="utf-8")
    if write_json:
        (out_dir / "report.json").write_text(
            json.dumps(result.to_dict(), indent=2, default=float), encoding="utf-8"
        )
    logger.info(f"Relatórios gravados em {out_dir}")
    return out_dir
