"""
Configurações da ferramenta de intervalos de predição.

Settings carrega padrões do ambiente (arquivo .env); o arquivo TOML de
execução é validado por RunConfig. Precedência: flag > arquivo > ambiente > padrão.
"""
import logging
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.errors import ConfigError
from app.models.schemas import RunConfig, deep_merge

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Padrões da aplicação (variáveis de ambiente com prefixo PINT_)"""
    model_config = SettingsConfigDict(
        env_prefix="PINT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",  # Ignora campos extras no .env
    )

    alpha: float = 0.1
    seed: int = 2024
    threads: int = 1
    log_level: str = "INFO"

    # Padrões dos métodos
    n_bootstrap: int = 1000
    ridge: float = 1e-8
    test_weight: Union[str, float] = "max"

    # Simulação
    calib_fraction: float = 0.5
    n_iterations: int = 1000


# Instância global de configurações
settings = Settings()


def _settings_defaults(current: Settings) -> Dict[str, Any]:
    """Valores do ambiente no formato do arquivo de execução."""
    test_weight = current.test_weight
    if isinstance(test_weight, str) and test_weight != "max":
        test_weight = float(test_weight)
    return {
        "alpha": current.alpha,
        "seed": current.seed,
        "threads": current.threads,
        "calib_fraction": current.calib_fraction,
        "n_iterations": current.n_iterations,
        "bootstrap": {"n_bootstrap": current.n_bootstrap},
        "distance": {"ridge": current.ridge, "test_weight": test_weight},
    }


def _validation_message(error: ValidationError, prefix: str = "") -> str:
    first = error.errors()[0]
    where = ".".join(str(part) for part in (*([prefix] if prefix else []), *first["loc"])) or "config"
    return f"Configuração inválida em '{where}': {first['msg']}"


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    current: Optional[Settings] = None,
) -> RunConfig:
    """
    Carrega e valida a configuração de execução.

    Args:
        path: Arquivo TOML (opcional)
        overrides: Valores das flags da linha de comando (None = não informado)
        current: Settings a usar como base (padrão: instância global)

    Returns:
        RunConfig validado, inclusive as entradas de [[methods]]

    Raises:
        ConfigError: arquivo ilegível, TOML inválido ou chave/valor rejeitado
    """
    data = _settings_defaults(current or settings)

    if path is not None:
        try:
            with open(path, "rb") as f:
                file_data = tomllib.load(f)
        except FileNotFoundError:
            raise ConfigError(f"Arquivo de configuração não encontrado: {path}")
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"TOML inválido em {path}: {e}")
        data = deep_merge(data, file_data)
        logger.info(f"Configuração carregada de {path}")

    if overrides:
        data = deep_merge(data, {k: v for k, v in overrides.items() if v is not None})

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_validation_message(e))

    for index in range(len(config.methods)):
        try:
            config.method_entry(index)
        except ValidationError as e:
            raise ConfigError(_validation_message(e, f"methods[{index}]"))
    return config
