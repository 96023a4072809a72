"""
Configuration models for PIVOT runs.

Every section of the TOML run config maps to one model here; RunConfig is the
merged view the CLI and library entry points consume.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.action_space.camera import CameraModel
from src.action_space.spaces import ActionSpaceSpec

RGB = Tuple[int, int, int]

PROMPT_SEGMENTS = ("preamble", "image", "task")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PivotConfig(_Section):
    """Optimizer settings."""

    samples: int = Field(10, ge=1, description="Candidates per iteration (M)")
    iterations: int = Field(3, ge=1, description="Maximum iterations (N)")
    k: int = Field(3, ge=1, description="Labels the oracle is asked to pick (K)")
    parallel: int = Field(3, ge=1, description="Parallel instances (E)")
    aggregation: Literal["refit", "arbitrate"] = Field("refit", description="Parallel join")
    sigma_floor: Optional[float] = Field(
        None, ge=0.0, description="Minimum sigma; defaults to 1% of the largest bound extent"
    )
    shrink: float = Field(1.0, gt=0.0, le=1.0, description="Per-iteration sigma cap factor")
    seed: int = Field(0, description="RNG seed")
    oracle_retries: int = Field(2, ge=0, description="Retries of a failed oracle call")
    early_stop: bool = Field(True, description="Stop once the distribution has converged")

    @model_validator(mode="after")
    def _k_within_samples(self) -> "PivotConfig":
        if self.k > self.samples:
            raise ValueError(f"k={self.k} exceeds samples={self.samples}")
        return self

    def floor_for(self, spec: ActionSpaceSpec) -> float:
        """Resolved sigma floor for a given action space."""
        if self.sigma_floor is not None:
            return self.sigma_floor
        return 0.01 * spec.max_extent


class AnnotationStyle(_Section):
    """Drawing parameters for candidate markers."""

    arrow_thickness_px: int = Field(2, ge=1)
    arrowhead_ratio: float = Field(0.15, gt=0.0, le=1.0)
    label_radius_px: int = Field(12, ge=1)
    color_near: RGB = Field((0, 0, 255), description="Color at z_min (toward the camera)")
    color_far: RGB = Field((255, 0, 0), description="Color at z_max (away from the camera)")
    font_height_px: int = Field(14, ge=4)
    min_spacing_px: float = Field(18.0, ge=0.0)
    label_fill: RGB = Field((255, 255, 255))
    label_text: RGB = Field((0, 0, 0))

    @field_validator("color_near", "color_far", "label_fill", "label_text")
    @classmethod
    def _check_rgb(cls, value: RGB) -> RGB:
        if any(c < 0 or c > 255 for c in value):
            raise ValueError("RGB channels must be in [0, 255]")
        return value

    @model_validator(mode="after")
    def _label_fits_font(self) -> "AnnotationStyle":
        if self.label_radius_px < self.font_height_px / 2:
            raise ValueError("label_radius_px must be at least font_height_px / 2")
        return self


class PromptConfig(_Section):
    """Prompt template selection."""

    task_kind: Literal[
        "navigation", "manipulation", "manipulation-online", "keypoint", "pickplace"
    ] = "navigation"
    prompt_style: Literal[
        "zero-shot-cot", "zero-shot-direct", "few-shot-cot", "few-shot-direct"
    ] = "zero-shot-cot"
    ordering: List[str] = Field(default_factory=lambda: list(PROMPT_SEGMENTS))
    exemplars: List[str] = Field(default_factory=list)
    exemplars_file: Optional[str] = None

    @field_validator("ordering")
    @classmethod
    def _check_ordering(cls, value: List[str]) -> List[str]:
        if sorted(value) != sorted(PROMPT_SEGMENTS):
            raise ValueError(f"ordering must be a permutation of {list(PROMPT_SEGMENTS)}")
        return value


class RemoteConfig(_Section):
    """Remote vision-language endpoint."""

    endpoint: str = Field("https://api.openai.com/v1", description="Base URL")
    api_key_env: str = Field("OPENAI_API_KEY", description="Environment variable with the key")
    model: str = "gpt-4o"
    timeout: float = Field(60.0, gt=0.0)
    max_retries: int = Field(3, ge=0)
    wire_schema: Literal["openai-chat", "gemini-generate"] = "openai-chat"
    max_in_flight: int = Field(4, ge=1)
    requests_per_minute: int = Field(60, ge=1)
    temperature: float = Field(0.0, ge=0.0)
    max_tokens: int = Field(1024, ge=1)


class SyntheticOracleConfig(_Section):
    """Geometry-driven stand-in oracle."""

    noise_sigma: float = Field(0.0, ge=0.0, description="Score noise as a fraction of extent")
    truth: Optional[List[float]] = Field(None, description="Fixed hidden truth action")


class ReplayOracleConfig(_Section):
    """Scripted oracle."""

    script: List[str] = Field(default_factory=list)
    script_file: Optional[str] = Field(None, description="JSON list or one response per line")


class TextBaselineConfig(_Section):
    """Text-only comparison oracle."""

    mode: Literal["region", "direction"] = "region"
    backend: Literal["synthetic", "remote"] = "synthetic"
    direction_step: float = Field(0.1, gt=0.0, description="Meters per named direction")


class OracleConfig(_Section):
    """Oracle selection; exactly one kind is active."""

    kind: Literal["remote", "synthetic", "replay", "text-baseline"] = "synthetic"
    remote: RemoteConfig = Field(default_factory=RemoteConfig)
    synthetic: SyntheticOracleConfig = Field(default_factory=SyntheticOracleConfig)
    replay: ReplayOracleConfig = Field(default_factory=ReplayOracleConfig)
    text_baseline: TextBaselineConfig = Field(default_factory=TextBaselineConfig)


class RunSettings(_Section):
    """Invocation-level settings."""

    seed: int = 0
    jobs: int = Field(4, ge=1)
    out_dir: str = "runs"


class EvalConfig(_Section):
    """Offline evaluation settings."""

    manifest: Optional[str] = None
    iterations: List[int] = Field(default_factory=lambda: [1, 2, 3])
    parallel: List[int] = Field(default_factory=lambda: [0, 2, 3])
    repeats: int = Field(3, ge=1)
    subset: Optional[int] = Field(None, ge=1)
    bbox_metric: Literal["hit", "center_distance"] = "hit"

    @field_validator("iterations")
    @classmethod
    def _positive_iterations(cls, value: List[int]) -> List[int]:
        if not value or any(v < 1 for v in value):
            raise ValueError("iterations must be a nonempty list of positive integers")
        return value

    @field_validator("parallel")
    @classmethod
    def _nonnegative_parallel(cls, value: List[int]) -> List[int]:
        if not value or any(v < 0 for v in value):
            raise ValueError("parallel must be a nonempty list of nonnegative integers")
        return value


class Obstacle(_Section):
    center: List[float]
    radius: float = Field(gt=0.0)


class WorldConfig(_Section):
    """Simulator world definition."""

    dims: Literal[2, 3] = 2
    agent: List[float] = Field(default_factory=lambda: [0.0, -3.0])
    target: List[float] = Field(default_factory=lambda: [0.0, 0.0])
    obstacles: List[Obstacle] = Field(default_factory=list)
    max_step: float = Field(1.0, gt=0.0)
    success_radius: float = Field(0.5, gt=0.0)
    budget: int = Field(10, ge=0)
    action_extent: Optional[float] = Field(
        None, gt=0.0, description="Action bound per axis; defaults to 2 x max_step"
    )
    camera_height: float = Field(10.0, gt=0.0)
    focal_px: float = Field(400.0, gt=0.0, description="Focal length in pixels")
    image_w: int = Field(640, ge=16)
    image_h: int = Field(480, ge=16)
    jitter: float = Field(0.0, ge=0.0, description="Per-episode start/target jitter, meters")
    instruction: str = "navigate to the red circle"

    @model_validator(mode="after")
    def _consistent_dims(self) -> "WorldConfig":
        for name in ("agent", "target"):
            if len(getattr(self, name)) != self.dims:
                raise ValueError(f"{name} needs {self.dims} coordinates")
        for obstacle in self.obstacles:
            if len(obstacle.center) != self.dims:
                raise ValueError(f"obstacle center needs {self.dims} coordinates")
        return self


class LoggingConfig(_Section):
    level: str = "INFO"
    format: Literal["console", "json"] = "console"


class ObservabilityConfig(_Section):
    """Configuration for observability features."""

    tracing_enabled: bool = Field(False, description="Enable OpenTelemetry tracing")
    tracing_exporter: Literal["console", "otlp", "none"] = "console"
    tracing_endpoint: str = Field("http://localhost:4317", description="OTLP endpoint")
    tracing_sample_rate: float = Field(1.0, ge=0.0, le=1.0)
    metrics_enabled: bool = Field(False, description="Enable metrics collection")
    metrics_exporter: Literal["console", "otlp", "none"] = "console"
    service_name: str = Field("pivot", description="Service name for telemetry")


class RunConfig(_Section):
    """Merged view of every config section."""

    pivot: PivotConfig = Field(default_factory=PivotConfig)
    action_space: Dict[str, Any] = Field(
        default_factory=lambda: {"kind": "nav2d", "lower": [0, 0], "upper": [639, 479]}
    )
    camera: Optional[Dict[str, Any]] = None
    style: AnnotationStyle = Field(default_factory=AnnotationStyle)
    prompt: PromptConfig = Field(default_factory=PromptConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    run: RunSettings = Field(default_factory=RunSettings)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    world: WorldConfig = Field(default_factory=WorldConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    observability: ObservabilityConfig = Field(default_factory=ObservabilityConfig)

    def action_space_spec(self) -> ActionSpaceSpec:
        return ActionSpaceSpec.from_dict(self.action_space)

    def camera_model(self) -> Optional[CameraModel]:
        if self.camera is None:
            return None
        return CameraModel.from_dict(self.camera)
