from app.models.schemas import (
    ScoreType,
    DistanceType,
    NormalizeMode,
    KernelType,
    ErrorType,
    DistName,
    Method,
    NoiseModel,
    ChDirection,
    DistanceWeightConfig,
    BinSpec,
    BootstrapConfig,
    DistSpec,
    MethodConfig,
    RunConfig,
    SynthSpec,
    CoverageReport,
    KeyCoverage,
)

__all__ = [
    "ScoreType",
    "DistanceType",
    "NormalizeMode",
    "KernelType",
    "ErrorType",
    "DistName",
    "Method",
    "NoiseModel",
    "ChDirection",
    "DistanceWeightConfig",
    "BinSpec",
    "BootstrapConfig",
    "DistSpec",
    "MethodConfig",
    "RunConfig",
    "SynthSpec",
    "CoverageReport",
    "KeyCoverage",
]
