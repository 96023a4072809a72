"""
Oracle construction from the [oracle] config section.
"""

from typing import Optional

import httpx
import structlog

from src.action_space.spaces import ActionSpaceSpec
from src.errors import ConfigurationError
from src.models.config import OracleConfig
from src.oracle.base import BaseOracle
from src.oracle.remote import RemoteOracle
from src.oracle.replay import ReplayOracle, load_script
from src.oracle.synthetic import SyntheticOracle
from src.oracle.text_baseline import RemoteTextBaseline, SyntheticTextBaseline

logger = structlog.get_logger(__name__)


def build_oracle(
    config: OracleConfig,
    seed: int = 0,
    spec: Optional[ActionSpaceSpec] = None,
    http_client: Optional[httpx.AsyncClient] = None,
) -> BaseOracle:
    """
    Build the oracle selected by config.kind.

    Args:
        config: Oracle config section
        seed: Seed for synthetic oracles
        spec: Action space, needed to interpret a fixed synthetic truth
        http_client: Optional shared HTTP client for remote oracles

    Raises:
        ConfigurationError: For inconsistent oracle settings
    """
    kind = config.kind
    logger.debug("Building oracle", kind=kind)

    if kind == "synthetic":
        truth = None
        if config.synthetic.truth is not None:
            if spec is None:
                raise ConfigurationError(
                    "A fixed synthetic truth needs an action space", field="oracle.synthetic.truth"
                )
            try:
                truth = spec.action(config.synthetic.truth)
            except Exception as e:
                raise ConfigurationError(str(e), field="oracle.synthetic.truth") from e
        return SyntheticOracle(noise_sigma=config.synthetic.noise_sigma, seed=seed, truth=truth)

    if kind == "replay":
        script = list(config.replay.script)
        if config.replay.script_file:
            script.extend(load_script(config.replay.script_file))
        if not script:
            raise ConfigurationError("Replay oracle needs a script", field="oracle.replay.script")
        return ReplayOracle(script)

    if kind == "remote":
        return RemoteOracle(config.remote, http_client=http_client)

    baseline = config.text_baseline
    if baseline.backend == "remote":
        return RemoteTextBaseline(
            RemoteOracle(config.remote, http_client=http_client),
            mode=baseline.mode,
            direction_step=baseline.direction_step,
        )
    return SyntheticTextBaseline(
        mode=baseline.mode,
        noise_sigma=config.synthetic.noise_sigma,
        seed=seed,
        direction_step=baseline.direction_step,
    )
