"""
Hierarquia de erros do toolkit de intervalos de predição.

ConfigError -> código de saída 2 na CLI
DataError   -> código de saída 3 na CLI
"""
from typing import Any, Iterable, Optional


class IntervalError(Exception):
    """Erro base do toolkit"""


class ConfigError(IntervalError, ValueError):
    """Configuração inválida (parâmetros, blocos de método, alpha)"""


class DataError(IntervalError, ValueError):
    """Dados inválidos (calibração, colunas, valores fora do domínio)"""


# ==================== CONFIGURAÇÃO ====================

class InvalidAlphaError(ConfigError):
    def __init__(self, alpha: Any):
        self.alpha = alpha
        super().__init__(f"alpha deve estar em (0, 1), recebido {alpha!r}")


class UnsupportedInversionError(ConfigError):
    def __init__(self, kind: str):
        self.kind = kind
        super().__init__(
            f"O score '{kind}' não é invertível automaticamente; "
            "forneça custom_inverse(pred, q) -> (lower, upper) no ScoreFunction"
        )


class InvalidClusterCountError(ConfigError):
    def __init__(self, n_clusters: Any):
        self.n_clusters = n_clusters
        super().__init__(f"Número de clusters inválido: {n_clusters!r} (mínimo 1)")


class AmbiguousParametersError(ConfigError):
    def __init__(self, dist: str):
        super().__init__(
            f"Distribuição '{dist}': informe calibração OU pars, não ambos"
        )


class MissingParametersError(ConfigError):
    def __init__(self, dist: str, missing: Iterable[str] = ()):
        missing = list(missing)
        detalhe = f" (faltando: {', '.join(missing)})" if missing else ""
        super().__init__(
            f"Distribuição '{dist}' requer calibração ou pars{detalhe}"
        )


# ==================== DADOS ====================

class EmptyCalibrationError(DataError):
    def __init__(self, what: str = "scores"):
        super().__init__(f"Conjunto de calibração vazio ({what})")


class InvalidScoreError(DataError):
    def __init__(self, index: int, value: Any):
        self.index = index
        self.value = value
        super().__init__(
            f"Score não finito no índice {index}: {value!r}"
        )


class DegenerateWeightsError(DataError):
    def __init__(self, row: Optional[int] = None):
        self.row = row
        onde = f" (ponto de teste {row})" if row is not None else ""
        super().__init__(f"Todos os pesos são zero{onde}")


class InvalidWeightsError(DataError):
    def __init__(self, message: str):
        super().__init__(f"Pesos inválidos do kernel customizado: {message}")


class SingularCovarianceError(DataError):
    def __init__(self):
        super().__init__(
            "Matriz de covariância singular; use ridge > 0 "
            "(ex.: ridge = 1e-8) ou distance_type = 'euclidean'"
        )


class UnknownGroupError(DataError):
    def __init__(self, labels: Iterable[Any]):
        self.labels = sorted({str(label) for label in labels})
        super().__init__(
            f"Grupos do teste ausentes na calibração: {', '.join(self.labels)}"
        )


class UndefinedIndexError(DataError):
    def __init__(self, n_clusters: int, n_points: int):
        super().__init__(
            f"Índice de Caliński-Harabasz indefinido para {n_clusters} "
            f"clusters e {n_points} pontos (requer 2 <= M < n)"
        )


class EmptyBinError(DataError):
    def __init__(self, bin_id: int):
        self.bin_id = bin_id
        super().__init__(f"Bin {bin_id} não possui pontos de calibração")


class OutOfRangeError(DataError):
    def __init__(self, index: int, value: float, low: float, high: float):
        self.index = index
        super().__init__(
            f"Valor {value!r} (linha {index}) fora do intervalo dos bins [{low}, {high})"
        )


class DomainError(DataError):
    """Valor fora do domínio da distribuição ou da probabilidade"""


class DegenerateDistributionError(DataError):
    def __init__(self, dist: str, param: str):
        super().__init__(
            f"Distribuição '{dist}' degenerada: parâmetro '{param}' estimado como 0"
        )


class UnderdispersionError(DataError):
    def __init__(self):
        super().__init__(
            "Dados sem sobredispersão: estimador de momentos da binomial negativa "
            "não é positivo; considere dist = 'poisson'"
        )


class ColumnMissingError(DataError):
    def __init__(self, column: str, path: Any = None):
        self.column = column
        origem = f" em {path}" if path is not None else ""
        super().__init__(f"Coluna '{column}' não encontrada{origem}")


class AllIterationsFailedError(IntervalError):
    def __init__(self, n_iterations: int):
        super().__init__(f"Todas as {n_iterations} iterações da simulação falharam")
