"""Run configuration loading."""

from .loader import apply_overrides, find_config_data, load_run_config, load_world_config

__all__ = [
    "apply_overrides",
    "find_config_data",
    "load_run_config",
    "load_world_config",
]
