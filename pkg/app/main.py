"""
Linha de comando da ferramenta de intervalos de predição.

Subcomandos:
    interval  - constrói intervalos para um CSV de teste a partir de um CSV de calibração
    evaluate  - cobertura, largura média e MAE da cobertura de um CSV de intervalos
    simulate  - simulação Monte Carlo com partições calibração/teste
    synth     - gera um dataset sintético

Uso:
    python -m app.main interval --config configs/conformal.toml --calib calib.csv --test test.csv --out intervals.csv
    python -m app.main evaluate --intervals intervals.csv --truth test.csv --group-by group --alpha 0.1
    python -m app.main simulate --config configs/simulation.toml --out resultados/
    python -m app.main synth --config configs/simulation.toml --out dados.csv

Códigos de saída: 0 ok, 2 erro de configuração, 3 erro de dados, 4 todas as iterações falharam.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from app import __version__
from app.config import load_run_config, settings
from app.core.errors import AllIterationsFailedError, ConfigError, DataError
from app.evaluation.coverage import coverage_report
from app.models.schemas import BinSpec, RunConfig, SynthSpec
from app.simulation.runner import bin_spec_for, evaluation_bins_config, run_method, simulate, truth_bins
from app.simulation.synth import generate_dataset
from app.utils.io import (
    dataset_from_frame,
    read_dataset,
    read_intervals,
    read_truth,
    render_text,
    table_to_frame,
    write_frame,
    write_intervals,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_ALL_FAILED = 4


# ==================== COMANDOS ====================

def _read_inputs(config: RunConfig, path: str, require_truth: bool):
    return read_dataset(
        path,
        pred_col=config.pred_col,
        truth_col=config.truth_col,
        group_col=config.group_col,
        feature_cols=config.feature_cols,
        require_truth=require_truth,
    )


def cmd_interval(config: RunConfig, calib_csv: str, test_csv: str, out_path: Optional[str]) -> int:
    """Constrói os intervalos do método de topo e grava o CSV de intervalos."""
    calib = _read_inputs(config, calib_csv, require_truth=True)
    test = _read_inputs(config, test_csv, require_truth=False)
    logger.info(f"Método {config.display_label}: {len(calib)} calibração, {len(test)} teste")

    table = run_method(config, calib, test, config.seed)
    if out_path:
        write_intervals(table, out_path)
    else:
        table_to_frame(table).to_csv(sys.stdout, index=False)
    for warning in table.warnings:
        logger.warning(f"[{warning.code}] {warning.message}")
    return EXIT_OK


def evaluation_bin_spec(config: RunConfig, calib_csv: Optional[str] = None) -> Optional[BinSpec]:
    """
    Breaks da cobertura por bin, os mesmos da simulação.

    Com [bccp] breaks usa os breaks fixos; com n_bins, recalcula os bins
    balanceados a partir dos truths de calib_csv (None sem calibração).
    """
    bin_cfg = evaluation_bins_config(config, config.method_entries())
    if bin_cfg is None:
        return None
    if bin_cfg.bccp.breaks is not None:
        return bin_spec_for(bin_cfg, None)
    if calib_csv is None:
        return None
    return bin_spec_for(bin_cfg, _read_inputs(config, calib_csv, require_truth=True).truth)


def _keys_for(column: str, table, truth, truth_frame: pd.DataFrame, bin_spec: Optional[BinSpec]):
    # bin = bin do valor observado
    if column == "bin":
        if bin_spec is None:
            raise ConfigError("--group-by bin requer [bccp] breaks na configuração, ou n_bins com --calib")
        return truth_bins(truth, bin_spec)
    builtin = {"group": table.groups, "cluster": table.clusters}
    if builtin.get(column) is not None:
        return builtin[column]
    if column in truth_frame.columns:
        return truth_frame[column].tolist()
    raise DataError(f"Coluna de agrupamento '{column}' não encontrada nos intervalos nem nos valores observados")


def cmd_evaluate(
    intervals_csv: str,
    truth_csv: str,
    truth_col: str,
    group_by: Sequence[str],
    alpha: float,
    out_dir: Optional[str],
    as_json: bool,
    bin_spec: Optional[BinSpec] = None,
) -> int:
    """Avalia um CSV de intervalos contra os valores observados."""
    table = read_intervals(intervals_csv)
    truth, truth_frame = read_truth(truth_csv, truth_col)
    if len(truth) != len(table):
        raise DataError(
            f"{truth_csv} tem {len(truth)} linhas, {intervals_csv} tem {len(table)}"
        )

    overall = coverage_report(truth, table, alpha=alpha)
    rows: List[Dict[str, object]] = [{
        "scope": "overall",
        "key": "",
        "coverage": overall.coverage,
        "n": overall.n,
        "mean_width": overall.mean_width,
        "mae": None,
    }]
    reports = {"overall": overall.model_dump()}
    for column in group_by:
        report = coverage_report(truth, table, keys=_keys_for(column, table, truth, truth_frame, bin_spec), alpha=alpha)
        reports[column] = report.model_dump()
        for key, cov in report.by_key.items():
            rows.append({
                "scope": column,
                "key": key,
                "coverage": cov.coverage,
                "n": cov.n,
                "mean_width": cov.mean_width,
                "mae": report.mae,
            })
    frame = pd.DataFrame(rows, columns=["scope", "key", "coverage", "n", "mean_width", "mae"])

    print(f"Cobertura: {overall.coverage:.6g} (n = {overall.n}, nominal {1 - alpha:.6g})")
    print(f"Largura média: {overall.mean_width:.6g} (finitas: {overall.finite_mean_width:.6g}, "
          f"ilimitadas: {overall.n_unbounded})")
    if group_by:
        print(render_text(frame))

    if out_dir:
        out = Path(out_dir)
        write_frame(frame, out / "evaluation.csv")
        if as_json:
            (out / "evaluation.json").write_text(json.dumps(reports, indent=2), encoding="utf-8")
        logger.info(f"Avaliação gravada em {out}")
    elif as_json:
        print(json.dumps(reports, indent=2))
    return EXIT_OK


def _synth_spec(config: RunConfig, args: argparse.Namespace) -> SynthSpec:
    base = config.synth.model_dump() if config.synth else {}
    overrides = {
        "n": args.n,
        "noise": args.noise,
        "n_groups": args.n_groups,
        "sigmas": args.sigmas,
        "seed": args.seed,
    }
    try:
        return SynthSpec.model_validate({**base, **{k: v for k, v in overrides.items() if v is not None}})
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(f"Especificação sintética inválida em '{'.'.join(map(str, first['loc']))}': {first['msg']}")


def cmd_simulate(config: RunConfig, data_csv: Optional[str], out_dir: str, as_json: bool) -> int:
    """Simulação Monte Carlo sobre um CSV ou sobre o dataset sintético de [synth]."""
    if data_csv:
        data = _read_inputs(config, data_csv, require_truth=True)
    elif config.synth is not None:
        frame = generate_dataset(config.synth)
        data = dataset_from_frame(
            frame,
            pred_col="pred",
            truth_col="truth",
            group_col=config.group_col,
            feature_cols=config.feature_cols,
            require_truth=True,
        )
    else:
        raise ConfigError("simulate requer --data ou uma seção [synth] na configuração")

    result = simulate(config, data, out_dir, threads=config.threads, write_json=as_json)
    print(result.render(), end="")
    return EXIT_OK


def cmd_synth(spec: SynthSpec, out_csv: Optional[str]) -> int:
    frame = generate_dataset(spec)
    if out_csv:
        write_frame(frame, out_csv)
        logger.info(f"Dataset sintético gravado em {out_csv}")
    else:
        frame.to_csv(sys.stdout, index=False)
    return EXIT_OK


# ==================== PARSER ====================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="Arquivo TOML de configuração.")
    common.add_argument("--seed", type=int, default=None, help="Semente mestre.")
    common.add_argument("--alpha", type=float, default=None, help="Nível alpha (cobertura nominal 1 - alpha).")
    common.add_argument("--out", type=str, default=None, help="Arquivo ou diretório de saída.")
    common.add_argument("--threads", type=int, default=None, help="Threads para a simulação.")
    common.add_argument(
        "--log-level",
        type=str,
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Nível de log (padrão: Settings.log_level).",
    )
    common.add_argument("--json", action="store_true", help="Também emite o relatório em JSON.")

    parser = argparse.ArgumentParser(
        prog="python -m app.main",
        description="Intervalos de predição conformais, bootstrap e paramétricos",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_interval = sub.add_parser("interval", parents=[common], help="Constrói intervalos de predição.")
    p_interval.add_argument("--calib", required=True, help="CSV de calibração (pred e truth).")
    p_interval.add_argument("--test", required=True, help="CSV de teste (pred).")

    p_evaluate = sub.add_parser("evaluate", parents=[common], help="Avalia um CSV de intervalos.")
    p_evaluate.add_argument("--intervals", required=True, help="CSV gerado por 'interval'.")
    p_evaluate.add_argument("--truth", required=True, help="CSV com os valores observados, alinhado por linha.")
    p_evaluate.add_argument(
        "--group-by",
        nargs="*",
        default=[],
        help="Colunas de agrupamento (group, cluster, bin ou colunas do CSV de valores observados).",
    )
    p_evaluate.add_argument(
        "--calib",
        default=None,
        help="CSV de calibração; com [bccp] n_bins, define os bins de --group-by bin.",
    )

    p_simulate = sub.add_parser("simulate", parents=[common], help="Simulação Monte Carlo.")
    p_simulate.add_argument("--data", default=None, help="CSV de dados (padrão: seção [synth]).")

    p_synth = sub.add_parser("synth", parents=[common], help="Gera dataset sintético.")
    p_synth.add_argument("--n", type=int, default=None, help="Número de linhas.")
    p_synth.add_argument(
        "--noise",
        default=None,
        choices=["homoskedastic", "group-heteroskedastic", "outcome-dependent"],
        help="Modelo de ruído.",
    )
    p_synth.add_argument("--n-groups", type=int, default=None, help="Número de grupos.")
    p_synth.add_argument("--sigmas", type=float, nargs="+", default=None, help="Desvios do ruído.")
    return parser


def configure_logging(level: Optional[str]) -> None:
    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        config = load_run_config(
            args.config,
            overrides={"seed": args.seed, "alpha": args.alpha, "threads": args.threads},
        )
        if args.command == "interval":
            return cmd_interval(config, args.calib, args.test, args.out)
        if args.command == "evaluate":
            bin_spec = evaluation_bin_spec(config, args.calib) if "bin" in args.group_by else None
            return cmd_evaluate(
                args.intervals,
                args.truth,
                config.truth_col,
                args.group_by,
                config.alpha,
                args.out,
                args.json,
                bin_spec,
            )
        if args.command == "simulate":
            return cmd_simulate(config, args.data, args.out or "simulation", args.json)
        return cmd_synth(_synth_spec(config, args), args.out)
    except ConfigError as e:
        logger.error(f"Erro de configuração: {e}")
        return EXIT_CONFIG
    except DataError as e:
        logger.error(f"Erro de dados: {e}")
        return EXIT_DATA
    except AllIterationsFailedError as e:
        logger.error(str(e))
        return EXIT_ALL_FAILED
    except ValidationError as e:
        logger.error(f"Erro de configuração: {e}")
        return EXIT_CONFIG
    except ValueError as e:
        logger.error(f"Erro de dados: {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
