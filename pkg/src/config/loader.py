"""
Run configuration loading from TOML files.

Loads the run config from an explicit path (TOML, or a JSON snapshot from a
run directory), config/pivot.toml or the [tool.pivot] table of pyproject.toml.
Environment variables with the PIVOT_ prefix override file values; CLI flags
override both.
"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import structlog
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import ConfigurationError, WorldConfigError
from src.models.config import RunConfig, WorldConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    try:
        import tomli as tomllib
    except ImportError:
        raise ImportError("Please install 'tomli' for Python < 3.11: pip install tomli")

logger = structlog.get_logger(__name__)

DEFAULT_CONFIG_PATH = Path("config/pivot.toml")


class EnvironmentOverrides(BaseSettings):
    """
    Run settings that may come from PIVOT_* environment variables.

    PIVOT_SEED seeds the optimizer as well as eval, sim and dataset generation.
    """

    model_config = SettingsConfigDict(env_prefix="PIVOT_", extra="ignore")

    seed: Optional[int] = None
    jobs: Optional[int] = None
    out_dir: Optional[str] = None
    oracle: Optional[str] = None

    def as_overrides(self) -> Dict[str, Any]:
        mapping = {
            "run.seed": self.seed,
            "pivot.seed": self.seed,
            "run.jobs": self.jobs,
            "run.out_dir": self.out_dir,
            "oracle.kind": self.oracle,
        }
        return {k: v for k, v in mapping.items() if v is not None}


def _read_config_file(path: Path) -> Dict[str, Any]:
    if path.suffix == ".json":
        # config.json snapshots written into run directories
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Invalid JSON in {path}: {e.msg}", field=None) from e
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"Invalid TOML in {path}: {e}", field=None) from e


def find_config_data(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Locate and read the raw run config table.

    Searches in order:
    1. Explicit config_path if provided (must exist)
    2. config/pivot.toml
    3. pyproject.toml [tool.pivot] section

    Returns:
        Raw config mapping, empty when nothing was found
    """
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {config_path}", field="config")
        logger.info("Loading configuration", path=str(path))
        data = _read_config_file(path)
        if path.name == "pyproject.toml":
            return data.get("tool", {}).get("pivot", {})
        return data

    if DEFAULT_CONFIG_PATH.exists():
        logger.info("Loading configuration", path=str(DEFAULT_CONFIG_PATH))
        return _read_config_file(DEFAULT_CONFIG_PATH)

    pyproject = Path("pyproject.toml")
    if pyproject.exists():
        data = _read_config_file(pyproject).get("tool", {}).get("pivot", {})
        if data:
            logger.info("Loading configuration", path=str(pyproject), section="tool.pivot")
            return data
        logger.debug("No [tool.pivot] section in pyproject.toml")

    logger.info("No configuration file found, using defaults")
    return {}


def apply_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """
    Set dotted-path values in a nested mapping (copying touched tables).

    Example:
        apply_overrides(data, {"pivot.iterations": 5, "run.seed": 7})
    """
    result = dict(data)
    for dotted, value in overrides.items():
        if value is None:
            continue
        parts = dotted.split(".")
        node = result
        for part in parts[:-1]:
            child = node.get(part)
            child = dict(child) if isinstance(child, dict) else {}
            node[part] = child
            node = child
        node[parts[-1]] = value
    return result


def _format_validation_error(error: ValidationError) -> ConfigurationError:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"])
    message = first["msg"]
    if first["type"] == "missing":
        message = f"Missing required field {field}"
    elif first["type"] == "extra_forbidden":
        message = f"Unknown field {field}"
    else:
        message = f"Invalid value for {field}: {message}"
    return ConfigurationError(message, field=field or None)


def load_run_config(
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Load and validate the run configuration.

    Args:
        config_path: Optional explicit path to a TOML file
        overrides: Dotted-path values applied last (CLI flags)

    Returns:
        Validated RunConfig

    Raises:
        ConfigurationError: Naming the offending dotted field path
    """
    data = find_config_data(config_path)
    data = apply_overrides(data, EnvironmentOverrides().as_overrides())
    if overrides:
        data = apply_overrides(data, overrides)

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise _format_validation_error(e) from e

    # Nested dataclasses validate on construction
    config.action_space_spec()
    config.camera_model()

    logger.debug(
        "Configuration validated",
        action_space=config.action_space.get("kind"),
        oracle=config.oracle.kind,
        samples=config.pivot.samples,
        iterations=config.pivot.iterations,
        parallel=config.pivot.parallel,
    )
    return config


def load_world_config(path: str) -> WorldConfig:
    """
    Load a simulator world from a TOML file.

    The file may hold the fields under a [world] table or at top level.

    Raises:
        WorldConfigError: Naming the offending field
    """
    world_path = Path(path)
    if not world_path.exists():
        raise WorldConfigError(f"World file not found: {path}", field="world")
    data = _read_config_file(world_path)
    table = data.get("world", data)
    try:
        return WorldConfig.model_validate(table)
    except ValidationError as e:
        error = _format_validation_error(e)
        field = f"world.{error.field}" if error.field else "world"
        raise WorldConfigError(str(error), field=field) from e
