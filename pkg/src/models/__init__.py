"""
Pydantic models for run configuration.
"""

from src.models.config import (
    PROMPT_SEGMENTS,
    AnnotationStyle,
    EvalConfig,
    LoggingConfig,
    ObservabilityConfig,
    Obstacle,
    OracleConfig,
    PivotConfig,
    PromptConfig,
    RemoteConfig,
    ReplayOracleConfig,
    RunConfig,
    RunSettings,
    SyntheticOracleConfig,
    TextBaselineConfig,
    WorldConfig,
)

__all__ = [
    "PROMPT_SEGMENTS",
    "AnnotationStyle",
    "EvalConfig",
    "LoggingConfig",
    "ObservabilityConfig",
    "Obstacle",
    "OracleConfig",
    "PivotConfig",
    "PromptConfig",
    "RemoteConfig",
    "ReplayOracleConfig",
    "RunConfig",
    "RunSettings",
    "SyntheticOracleConfig",
    "TextBaselineConfig",
    "WorldConfig",
]
