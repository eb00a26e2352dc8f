"""
Intervalos paramétricos: distribuição assumida para o erro ou para o desfecho,
com parâmetros estimados na calibração ou informados diretamente.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import stats

from app.core.errors import (
    AmbiguousParametersError,
    DegenerateDistributionError,
    DomainError,
    MissingParametersError,
    UnderdispersionError,
)
from app.core.types import CalibrationSet, IntervalTable, as_alpha
from app.models.schemas import DistName, DistSpec

logger = logging.getLogger(__name__)

# Famílias sem calibração: o parâmetro vem da própria predição
ONE_PARAMETER = {DistName.POISSON, DistName.CHISQ}

# Parâmetros obrigatórios e de locação (padrão 0) quando informados via pars
REQUIRED_PARS: Dict[DistName, Tuple[str, ...]] = {
    DistName.NORMAL: ("sd",),
    DistName.LOGISTIC: ("scale",),
    DistName.LOGNORMAL: ("sdlog",),
    DistName.NEGBIN: ("dispersion",),
    DistName.BETA: ("precision",),
}
LOCATION_PARS: Dict[DistName, str] = {
    DistName.NORMAL: "mean",
    DistName.LOGISTIC: "location",
    DistName.LOGNORMAL: "meanlog",
}
POSITIVE_PARS = ("sd", "scale", "sdlog", "dispersion", "precision")


@dataclass(frozen=True)
class EstimatedParams:
    """Parâmetros da distribuição e sua origem (estimated | supplied)"""
    values: Dict[str, float] = field(default_factory=dict)
    provenance: str = "estimated"

    def __post_init__(self):
        if self.provenance not in ("estimated", "supplied"):
            raise ValueError(f"provenance inválida: {self.provenance}")
        for name in POSITIVE_PARS:
            if name in self.values and not self.values[name] > 0:
                raise DomainError(f"Parâmetro '{name}' deve ser positivo, recebido {self.values[name]}")

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def get(self, name: str, default: float = 0.0) -> float:
        return self.values.get(name, default)


# ==================== ESTIMAÇÃO ====================

def _positive_sd(values: np.ndarray, dist: DistName, name: str) -> float:
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    if not sd > 0:
        raise DegenerateDistributionError(dist.value, name)
    return sd


def estimate_params(dist: DistName, calib: CalibrationSet) -> EstimatedParams:
    """
    Estima os parâmetros da distribuição a partir da calibração.

    normal: média e desvio (n - 1) dos erros truth - pred;
    logistic: locação = média, escala = desvio * sqrt(3) / pi (momentos);
    lognormal: média e desvio de log(truth) - log(pred);
    negbin: dispersão theta por momentos, Var = mu + mu^2 / theta com mu = pred;
    beta: precisão phi por momentos, Var = mu (1 - mu) / (1 + phi) com mu = pred;
    poisson/chisq: sem parâmetros (vêm da predição).
    """
    dist = DistName(dist)
    preds, truths = calib.preds, calib.truths

    if dist in ONE_PARAMETER:
        return EstimatedParams({})

    if dist == DistName.NORMAL:
        errors = truths - preds
        return EstimatedParams({
            "mean": float(np.mean(errors)),
            "sd": _positive_sd(errors, dist, "sd"),
        })

    if dist == DistName.LOGISTIC:
        errors = truths - preds
        sd = _positive_sd(errors, dist, "scale")
        return EstimatedParams({
            "location": float(np.mean(errors)),
            "scale": sd * math.sqrt(3) / math.pi,
        })

    if dist == DistName.LOGNORMAL:
        if np.any(truths <= 0) or np.any(preds <= 0):
            raise DomainError("lognormal requer truths e preds positivos")
        log_ratio = np.log(truths) - np.log(preds)
        return EstimatedParams({
            "meanlog": float(np.mean(log_ratio)),
            "sdlog": _positive_sd(log_ratio, dist, "sdlog"),
        })

    if dist == DistName.NEGBIN:
        if np.any(truths < 0) or np.any(preds <= 0):
            raise DomainError("negbin requer truths não negativos e preds positivos")
        denominator = float(np.sum(np.square(truths - preds) - preds))
        if denominator <= 0:
            raise UnderdispersionError()
        return EstimatedParams({"dispersion": float(np.sum(np.square(preds)) / denominator)})

    if dist == DistName.BETA:
        if np.any((truths <= 0) | (truths >= 1)) or np.any((preds <= 0) | (preds >= 1)):
            raise DomainError("beta requer truths e preds em (0, 1)")
        spread = float(np.sum(np.square(truths - preds)))
        if spread <= 0:
            raise DegenerateDistributionError(dist.value, "precision")
        precision = float(np.sum(preds * (1 - preds)) / spread) - 1.0
        if precision <= 0:
            raise DegenerateDistributionError(dist.value, "precision")
        return EstimatedParams({"precision": precision})

    raise MissingParametersError(dist.value)


def supplied_params(dist: DistName, pars: Dict[str, float], center_at_zero: bool = False) -> EstimatedParams:
    """Valida os parâmetros informados e completa a locação (padrão 0)."""
    dist = DistName(dist)
    values = {name: float(value) for name, value in pars.items()}
    missing = [name for name in REQUIRED_PARS.get(dist, ()) if name not in values]
    if missing:
        raise MissingParametersError(dist.value, missing)
    location = LOCATION_PARS.get(dist)
    if location is not None:
        values.setdefault(location, 0.0)
        if center_at_zero:
            values[location] = 0.0
    return EstimatedParams(values, provenance="supplied")


# ==================== QUANTIS ====================

def dist_quantile(
    dist: DistName,
    p,
    params: EstimatedParams,
    pred=0.0,
    custom_quantile: Optional[Callable] = None,
):
    """
    Quantil de nível p da distribuição.

    normal/logistic: quantil do erro (a predição é somada pelo chamador);
    lognormal: quantil do desfecho pred * exp(Q_log(p));
    poisson (lambda = pred), negbin (média pred, dispersão theta), chisq
    (df = pred), beta (média pred, precisão phi): quantil do desfecho;
    discretas devolvem o menor inteiro k com CDF(k) >= p.
    """
    dist = DistName(dist)
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0) | (p_arr >= 1)) or np.any(np.isnan(p_arr)):
        raise DomainError(f"Probabilidade deve estar em (0, 1), recebido {p!r}")
    pred = np.asarray(pred, dtype=float)

    if dist == DistName.NORMAL:
        return stats.norm.ppf(p_arr, loc=params.get("mean"), scale=params["sd"])
    if dist == DistName.LOGISTIC:
        return stats.logistic.ppf(p_arr, loc=params.get("location"), scale=params["scale"])
    if dist == DistName.LOGNORMAL:
        _require(pred > 0, dist, "pred > 0")
        scale = pred * math.exp(params.get("meanlog"))
        return stats.lognorm.ppf(p_arr, s=params["sdlog"], scale=scale)
    if dist == DistName.POISSON:
        _require(pred >= 0, dist, "pred >= 0")
        return stats.poisson.ppf(p_arr, mu=pred)
    if dist == DistName.NEGBIN:
        _require(pred > 0, dist, "pred > 0")
        theta = params["dispersion"]
        return stats.nbinom.ppf(p_arr, n=theta, p=theta / (theta + pred))
    if dist == DistName.CHISQ:
        _require(pred > 0, dist, "pred > 0")
        return stats.chi2.ppf(p_arr, df=pred)
    if dist == DistName.BETA:
        _require((pred > 0) & (pred < 1), dist, "0 < pred < 1")
        phi = params["precision"]
        return stats.beta.ppf(p_arr, a=pred * phi, b=(1 - pred) * phi)

    if custom_quantile is None:
        raise MissingParametersError(dist.value, ["custom_quantile"])
    return custom_quantile(p, params.values, pred)


def dist_cdf(dist: DistName, x, params: EstimatedParams, pred=0.0):
    """CDF correspondente a dist_quantile (famílias nativas)."""
    dist = DistName(dist)
    pred = np.asarray(pred, dtype=float)
    if dist == DistName.NORMAL:
        return stats.norm.cdf(x, loc=params.get("mean"), scale=params["sd"])
    if dist == DistName.LOGISTIC:
        return stats.logistic.cdf(x, loc=params.get("location"), scale=params["scale"])
    if dist == DistName.LOGNORMAL:
        return stats.lognorm.cdf(x, s=params["sdlog"], scale=pred * math.exp(params.get("meanlog")))
    if dist == DistName.POISSON:
        return stats.poisson.cdf(x, mu=pred)
    if dist == DistName.NEGBIN:
        theta = params["dispersion"]
        return stats.nbinom.cdf(x, n=theta, p=theta / (theta + pred))
    if dist == DistName.CHISQ:
        return stats.chi2.cdf(x, df=pred)
    if dist == DistName.BETA:
        phi = params["precision"]
        return stats.beta.cdf(x, a=pred * phi, b=(1 - pred) * phi)
    raise MissingParametersError(dist.value, ["cdf"])


def _require(condition, dist: DistName, what: str) -> None:
    if not np.all(condition):
        raise DomainError(f"{dist.value} requer {what}")


# ==================== INTERVALOS ====================

def resolve_params(spec: DistSpec, calib: Optional[CalibrationSet]) -> EstimatedParams:
    """Parâmetros a usar: estimados OU informados, nunca ambos."""
    if spec.dist in ONE_PARAMETER:
        if calib is not None:
            logger.info(f"{spec.dist.value}: calibração ignorada (parâmetro vem da predição)")
        return EstimatedParams({})
    if spec.dist == DistName.CUSTOM:
        return EstimatedParams(dict(spec.pars), provenance="supplied")
    if calib is not None and spec.pars is not None:
        raise AmbiguousParametersError(spec.dist.value)
    if spec.pars is not None:
        return supplied_params(spec.dist, spec.pars, spec.center_at_zero)
    if calib is None:
        raise MissingParametersError(spec.dist.value, REQUIRED_PARS.get(spec.dist, ()))

    params = estimate_params(spec.dist, calib)
    location = LOCATION_PARS.get(spec.dist)
    if spec.center_at_zero and location is not None:
        params = EstimatedParams({**params.values, location: 0.0})
    return params


def pinterval_parametric(
    pred,
    spec: Optional[DistSpec] = None,
    calib: Optional[CalibrationSet] = None,
    alpha: float = 0.1,
) -> IntervalTable:
    """
    Intervalos paramétricos.

    normal/logistic: [pred + Q(alpha/2), pred + Q(1 - alpha/2)] com Q o quantil
    do erro; lognormal: [pred * exp(Q_log(alpha/2)), pred * exp(Q_log(1 - alpha/2))];
    poisson/negbin/chisq/beta: quantis do desfecho no parâmetro do ponto;
    custom: custom_quantile(alpha/2, pars, pred) e custom_quantile(1 - alpha/2, pars, pred).

    Args:
        pred: Predições do teste
        spec: Distribuição, pars opcionais e quantil customizado
        calib: Calibração para estimar os parâmetros (opcional)
        alpha: Nível alpha

    Returns:
        IntervalTable com pred, lower e upper
    """
    alpha = as_alpha(alpha)
    spec = spec or DistSpec()
    pred = np.atleast_1d(np.asarray(pred, dtype=float))
    params = resolve_params(spec, calib)
    low_p, high_p = alpha / 2, 1 - alpha / 2

    if spec.dist == DistName.NORMAL:
        half = params["sd"] * stats.norm.ppf(high_p)
        center = pred + params.get("mean")
        lower, upper = center - half, center + half
    elif spec.dist == DistName.LOGISTIC:
        half = params["scale"] * stats.logistic.ppf(high_p)
        center = pred + params.get("location")
        lower, upper = center - half, center + half
    elif spec.dist == DistName.CUSTOM:
        lower = np.array([
            float(dist_quantile(spec.dist, low_p, params, p, spec.custom_quantile)) for p in pred
        ])
        upper = np.array([
            float(dist_quantile(spec.dist, high_p, params, p, spec.custom_quantile)) for p in pred
        ])
    else:
        lower = np.asarray(dist_quantile(spec.dist, low_p, params, pred), dtype=float)
        upper = np.asarray(dist_quantile(spec.dist, high_p, params, pred), dtype=float)

    logger.debug(f"Paramétrico {spec.dist.value} ({params.provenance}): {params.values}")
    return IntervalTable(pred=pred, lower=lower, upper=upper)
