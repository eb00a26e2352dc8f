"""
Schemas Pydantic para configuração e relatórios.
"""
import math
from enum import Enum
from typing import Any, Callable, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator, model_validator


class ScoreType(str, Enum):
    ABSOLUTE = "absolute"
    RAW = "raw"
    RELATIVE = "relative"
    ZERO_ADJUSTED_RELATIVE = "zero_adjusted_relative"
    HETEROGENEOUS = "heterogeneous"
    CUSTOM = "custom"


class DistanceType(str, Enum):
    MAHALANOBIS = "mahalanobis"
    EUCLIDEAN = "euclidean"


class NormalizeMode(str, Enum):
    NONE = "none"
    MINMAX = "minmax"
    SD = "sd"


class KernelType(str, Enum):
    GAUSSIAN = "gaussian"
    CAUCHY = "cauchy"
    LOGISTIC = "logistic"
    RECIPROCAL_LINEAR = "reciprocal_linear"
    CUSTOM = "custom"


class ErrorType(str, Enum):
    RAW = "raw"
    ABSOLUTE = "absolute"


class DistName(str, Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    LOGISTIC = "logistic"
    POISSON = "poisson"
    NEGBIN = "negbin"
    CHISQ = "chisq"
    BETA = "beta"
    CUSTOM = "custom"


class Method(str, Enum):
    CONFORMAL = "conformal"
    MONDRIAN = "mondrian"
    CCP = "ccp"
    BCCP = "bccp"
    BOOTSTRAP = "bootstrap"
    PARAMETRIC = "parametric"


class NoiseModel(str, Enum):
    HOMOSKEDASTIC = "homoskedastic"
    GROUP_HETEROSKEDASTIC = "group-heteroskedastic"
    OUTCOME_DEPENDENT = "outcome-dependent"


class ChDirection(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class StatusIteracao(str, Enum):
    SUCESSO = "sucesso"
    PARCIAL = "parcial"
    ERRO = "erro"


# ==================== PESOS POR DISTÂNCIA ====================

class DistanceWeightConfig(BaseModel):
    """Configuração da ponderação por distância (DWCP e bootstrap ponderado)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    enabled: bool = False
    distance_type: DistanceType = DistanceType.MAHALANOBIS
    normalize: NormalizeMode = NormalizeMode.NONE
    kernel: KernelType = KernelType.GAUSSIAN
    custom_kernel: Optional[Callable[..., Any]] = Field(default=None, exclude=True)
    ridge: float = Field(default=1e-8, ge=0)
    # Massa do ponto de teste no quantil ponderado: "max" = maior peso da calibração
    test_weight: Union[Literal["max"], PositiveFloat] = "max"

    @model_validator(mode="after")
    def _check_custom_kernel(self):
        if (self.kernel == KernelType.CUSTOM) != (self.custom_kernel is not None):
            raise ValueError("custom_kernel deve ser informado se e somente se kernel = 'custom'")
        return self


# ==================== BINS ====================

class BinSpec(BaseModel):
    """Bins [b_{t-1}, b_t) do espaço do desfecho; extremos podem ser ±inf"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    breaks: List[float]

    @field_validator("breaks")
    @classmethod
    def _check_breaks(cls, breaks: List[float]) -> List[float]:
        # B = 1 (um único bin) é aceito como redução ao CP padrão
        if len(breaks) < 2:
            raise ValueError("São necessários ao menos 2 breaks")
        if any(math.isnan(b) for b in breaks):
            raise ValueError("breaks não podem conter NaN")
        if any(b >= a for b, a in zip(breaks, breaks[1:])):
            raise ValueError("breaks devem ser estritamente crescentes")
        return [float(b) for b in breaks]

    @property
    def n_bins(self) -> int:
        return len(self.breaks) - 1

    @property
    def labels(self) -> List[int]:
        return list(range(1, self.n_bins + 1))

    def bounds(self, bin_id: int) -> tuple:
        return self.breaks[bin_id - 1], self.breaks[bin_id]


# ==================== BOOTSTRAP ====================

class BootstrapConfig(BaseModel):
    """Configuração do bootstrap de erros da calibração"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_bootstrap: int = Field(default=1000, ge=1)
    error_type: ErrorType = ErrorType.RAW
    seed: int = 2024
    dw: DistanceWeightConfig = Field(default_factory=DistanceWeightConfig)


# ==================== PARAMÉTRICO ====================

class DistSpec(BaseModel):
    """Distribuição assumida para o erro (ou desfecho) e seus parâmetros"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    dist: DistName = DistName.NORMAL
    pars: Optional[Dict[str, float]] = None
    custom_quantile: Optional[Callable[..., Any]] = Field(default=None, exclude=True)
    # Fixa a locação do erro em zero (intervalo centrado na predição)
    center_at_zero: bool = False

    @model_validator(mode="after")
    def _check_custom(self):
        if (self.dist == DistName.CUSTOM) != (self.custom_quantile is not None):
            raise ValueError("custom_quantile deve ser informado se e somente se dist = 'custom'")
        if self.dist == DistName.CUSTOM and self.pars is None:
            raise ValueError("dist = 'custom' requer pars")
        return self


# ==================== CONFIGURAÇÃO DE EXECUÇÃO ====================

class CCPBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_clusters: Optional[int] = Field(default=None, ge=1)
    optimize_n_clusters: bool = False
    max_n_clusters: int = Field(default=5, ge=2)
    clustering_fraction: float = Field(default=0.5, gt=0, le=1)
    quantile_levels: List[float] = Field(default_factory=lambda: [0.5, 0.6, 0.7, 0.8, 0.9])
    ch_direction: ChDirection = ChDirection.MAXIMIZE
    max_iter: int = Field(default=100, ge=1)

    @field_validator("quantile_levels")
    @classmethod
    def _check_levels(cls, levels: List[float]) -> List[float]:
        if not levels or any(not (0 < q < 1) for q in levels):
            raise ValueError("quantile_levels devem estar em (0, 1)")
        return levels


class BCCPBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    breaks: Optional[List[float]] = None
    # Alternativa a breaks: bins balanceados pelos quantis da calibração
    n_bins: Optional[int] = Field(default=None, ge=1)
    contiguize: bool = False

    @model_validator(mode="after")
    def _check_exclusive(self):
        if self.breaks is not None and self.n_bins is not None:
            raise ValueError("Informe breaks OU n_bins, não ambos")
        if self.breaks is not None:
            BinSpec(breaks=self.breaks)
        return self


class BootstrapBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_bootstrap: int = Field(default=1000, ge=1)
    error_type: ErrorType = ErrorType.RAW


class ParametricBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dist: DistName = DistName.NORMAL
    pars: Optional[Dict[str, float]] = None
    center_at_zero: bool = False

    @field_validator("dist")
    @classmethod
    def _no_custom(cls, dist: DistName) -> DistName:
        if dist == DistName.CUSTOM:
            raise ValueError("dist = 'custom' só está disponível pela API Python")
        return dist


class MethodConfig(BaseModel):
    """Bloco de um método: tipo, score e parâmetros específicos"""
    model_config = ConfigDict(extra="forbid")

    method: Method = Method.CONFORMAL
    label: Optional[str] = None
    alpha: float = Field(default=0.1, gt=0, lt=1)
    score: ScoreType = ScoreType.ABSOLUTE
    distance: DistanceWeightConfig = Field(default_factory=DistanceWeightConfig)
    ccp: CCPBlock = Field(default_factory=CCPBlock)
    bccp: BCCPBlock = Field(default_factory=BCCPBlock)
    bootstrap: BootstrapBlock = Field(default_factory=BootstrapBlock)
    parametric: ParametricBlock = Field(default_factory=ParametricBlock)

    @field_validator("score")
    @classmethod
    def _no_custom_score(cls, score: ScoreType) -> ScoreType:
        if score == ScoreType.CUSTOM:
            raise ValueError("score = 'custom' só está disponível pela API Python")
        return score

    @model_validator(mode="after")
    def _check_method_blocks(self):
        if self.method == Method.BCCP and self.bccp.breaks is None and self.bccp.n_bins is None:
            raise ValueError("method = 'bccp' requer [bccp] breaks ou n_bins")
        if (
            self.method == Method.CCP
            and self.ccp.n_clusters is None
            and not self.ccp.optimize_n_clusters
        ):
            raise ValueError("method = 'ccp' requer [ccp] n_clusters ou optimize_n_clusters = true")
        return self

    @property
    def display_label(self) -> str:
        """Rótulo informado ou o rótulo usual do método (SCP, MCP, CCP, DWCP, BCCP(d), ...)."""
        if self.label:
            return self.label
        if self.method == Method.CONFORMAL:
            return "DWCP" if self.distance.enabled else "SCP"
        if self.method == Method.MONDRIAN:
            return "MCP"
        if self.method == Method.CCP:
            return "CCP"
        if self.method == Method.BCCP:
            return "BCCP(c)" if self.bccp.contiguize else "BCCP(d)"
        if self.method == Method.BOOTSTRAP:
            return "Bootstrap"
        return self.parametric.dist.value.capitalize()


class SynthSpec(BaseModel):
    """Especificação do gerador sintético de dados"""
    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=1000, ge=0)
    noise: NoiseModel = NoiseModel.HOMOSKEDASTIC
    n_groups: int = Field(default=4, ge=1)
    sigmas: List[float] = Field(default_factory=lambda: [1.0])
    pred_mean: float = 10.0
    pred_sd: float = Field(default=2.0, ge=0)
    # Crescimento do desvio do ruído com |z| da predição (outcome-dependent)
    tail_factor: float = Field(default=1.0, ge=0)
    seed: int = 2024

    @field_validator("sigmas")
    @classmethod
    def _check_sigmas(cls, sigmas: List[float]) -> List[float]:
        if not sigmas or any(s < 0 or not math.isfinite(s) for s in sigmas):
            raise ValueError("sigmas deve ser não vazio e não negativo")
        return sigmas


class RunConfig(MethodConfig):
    """
    Configuração completa de execução (arquivo TOML + flags).

    Entradas em [[methods]] herdam os valores de topo que não definem.
    """
    seed: int = 2024
    calib_fraction: float = Field(default=0.5, gt=0, lt=1)
    n_iterations: int = Field(default=1000, ge=1)
    threads: int = Field(default=1, ge=1)
    pred_col: str = "pred"
    truth_col: str = "truth"
    group_col: Optional[str] = None
    feature_cols: List[str] = Field(default_factory=list)
    synth: Optional[SynthSpec] = None
    methods: List[Dict[str, Any]] = Field(default_factory=list)

    def method_entry(self, index: int) -> MethodConfig:
        """Entrada index de [[methods]] com herança dos valores de topo."""
        base = self.model_dump(include=set(MethodConfig.model_fields) - {"label"})
        return MethodConfig.model_validate(deep_merge(base, self.methods[index]))

    def method_entries(self) -> List[MethodConfig]:
        """Lista de métodos com herança dos valores de topo."""
        if not self.methods:
            base = self.model_dump(include=set(MethodConfig.model_fields) - {"label"})
            return [MethodConfig.model_validate({**base, "label": self.label})]
        return [self.method_entry(index) for index in range(len(self.methods))]


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


# ==================== RELATÓRIOS ====================

class KeyCoverage(BaseModel):
    """Cobertura dentro de um grupo/bin"""
    model_config = ConfigDict(ser_json_inf_nan="constants")

    coverage: float = Field(ge=0, le=1)
    n: int = Field(ge=0)
    mean_width: float


class CoverageReport(BaseModel):
    """Cobertura empírica, largura média e MAE da cobertura"""
    model_config = ConfigDict(ser_json_inf_nan="constants")

    coverage: float = Field(ge=0, le=1)
    n: int = Field(ge=0)
    mean_width: float
    finite_mean_width: float
    n_unbounded: int = 0
    by_key: Optional[Dict[str, KeyCoverage]] = None
    mae: Optional[float] = None
    alpha: Optional[float] = None

    @model_validator(mode="after")
    def _check_count(self):
        hits = self.coverage * self.n
        if abs(hits - round(hits)) > 1e-6:
            raise ValueError("coverage * n deve ser inteiro")
        return self
