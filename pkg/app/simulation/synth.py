"""
Gerador de dados sintéticos no formato dos dados de entrada.

Cada linha tem pred, truth = pred + ruído, um grupo e duas features
geográficas (latitude/longitude) concentradas em torno do centro do grupo.
"""
import logging

import numpy as np
import pandas as pd

from app.models.schemas import NoiseModel, SynthSpec

logger = logging.getLogger(__name__)

# Caixa de coordenadas dos centros dos grupos
LATITUDE_RANGE = (25.0, 49.0)
LONGITUDE_RANGE = (-124.0, -67.0)
# Espalhamento das coordenadas em torno do centro do grupo
COORD_SPREAD = 1.0


def group_labels(n_groups: int) -> list:
    return [f"g{i + 1}" for i in range(n_groups)]


def generate_dataset(spec: SynthSpec) -> pd.DataFrame:
    """
    Gera um dataset determinístico dada a semente.

    homoskedastic: ruído N(0, sigmas[0]);
    group-heteroskedastic: o grupo g usa sigmas[g % len(sigmas)];
    outcome-dependent: desvio sigmas[0] * (1 + tail_factor * |z|), com z a
    predição padronizada, de modo que as caudas do desfecho são mais ruidosas.

    Args:
        spec: Tamanho, modelo de ruído, grupos e semente

    Returns:
        DataFrame com colunas pred, truth, group, latitude, longitude
    """
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n, spec.n_groups

    centers_lat = rng.uniform(*LATITUDE_RANGE, size=k)
    centers_lon = rng.uniform(*LONGITUDE_RANGE, size=k)
    group_idx = rng.integers(0, k, size=n)
    pred = rng.normal(spec.pred_mean, spec.pred_sd, size=n)
    standard_noise = rng.standard_normal(n)
    latitude = centers_lat[group_idx] + rng.normal(0.0, COORD_SPREAD, size=n)
    longitude = centers_lon[group_idx] + rng.normal(0.0, COORD_SPREAD, size=n)

    sigmas = np.asarray(spec.sigmas, dtype=float)
    if spec.noise == NoiseModel.HOMOSKEDASTIC:
        sigma = np.full(n, sigmas[0])
    elif spec.noise == NoiseModel.GROUP_HETEROSKEDASTIC:
        sigma = sigmas[group_idx % len(sigmas)]
    else:
        z = (pred - spec.pred_mean) / spec.pred_sd if spec.pred_sd > 0 else np.zeros(n)
        sigma = sigmas[0] * (1.0 + spec.tail_factor * np.abs(z))

    labels = np.asarray(group_labels(k), dtype=object)
    frame = pd.DataFrame({
        "pred": pred,
        "truth": pred + sigma * standard_noise,
        "group": labels[group_idx],
        "latitude": latitude,
        "longitude": longitude,
    })
    logger.info(f"Dataset sintético gerado: {n} linhas, {k} grupos, ruído {spec.noise.value}")
    return frame
