"""
Isotropic Gaussian proposal distribution over an action space.

Sampling draws i.i.d. Gaussian candidates around the mean with one shared
standard deviation and clamps them into the bounds. Fitting moves the mean to
the average of the oracle's selected actions and contracts sigma toward their
spread. Frozen dimensions are never sampled: they always carry the mean.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import structlog

from src.action_space.spaces import Action, ActionSpaceSpec, clamp
from src.errors import EmptySelection
from src.models.config import PivotConfig

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class ProposalDistribution:
    """
    Attributes:
        mean: Center of the proposal, one value per action dimension
        sigma: Shared standard deviation
        space: Action space the distribution lives in
    """

    mean: np.ndarray
    sigma: float
    space: ActionSpaceSpec

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).copy()
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma", float(self.sigma))
        if mean.shape != (self.space.dims,):
            raise ValueError(f"mean has shape {mean.shape}, expected ({self.space.dims},)")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")

    def mean_action(self) -> Action:
        """The clamped mean as an action."""
        return clamp(self.space, self.space.action(self.mean))

    def to_dict(self) -> dict:
        return {"mean": [float(x) for x in self.mean], "sigma": self.sigma}


def init_distribution(spec: ActionSpaceSpec) -> ProposalDistribution:
    """
    Broad initial proposal covering the whole space.

    The mean is the bounds midpoint (frozen dimensions take their frozen
    value) and sigma is half the largest extent among the sampled dimensions.
    """
    frozen = spec.frozen_mask
    mean = np.where(frozen, spec.frozen_value(), (spec.lower_array + spec.upper_array) / 2.0)
    free = spec.extent[~frozen]
    sigma = float(np.max(free)) / 2.0 if free.size else 0.0
    return ProposalDistribution(mean=mean, sigma=sigma, space=spec)


def sample(dist: ProposalDistribution, count: int, rng: np.random.Generator) -> List[Action]:
    """
    Draw count clamped candidates.

    The full (count, dims) normal block is always drawn, so the RNG stream
    does not depend on which dimensions are frozen.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    spec = dist.space
    draws = dist.mean + dist.sigma * rng.standard_normal((count, spec.dims))
    draws[:, spec.frozen_mask] = dist.mean[spec.frozen_mask]
    draws = np.clip(draws, spec.lower_array, spec.upper_array)
    return [spec.action(row) for row in draws]


def spread(points: np.ndarray, mask: np.ndarray) -> float:
    """Root mean squared deviation from the centroid over the masked components."""
    if not mask.any():
        return 0.0
    selected = points[:, mask]
    deviation = selected - selected.mean(axis=0)
    return float(np.sqrt(np.mean(deviation**2)))


def fit(
    selected: Sequence[Action],
    prev: ProposalDistribution,
    config: PivotConfig,
) -> ProposalDistribution:
    """
    Refit the proposal to the oracle's selected actions.

    sigma' = max(floor, min(shrink * sigma, spread)); sigma never grows.

    Raises:
        EmptySelection: If selected is empty
    """
    if not selected:
        raise EmptySelection("Cannot fit a distribution to zero actions")
    spec = prev.space
    frozen = spec.frozen_mask
    points = np.stack([a.as_array() for a in selected])
    mean = np.where(frozen, prev.mean, points.mean(axis=0))
    mean = np.clip(mean, spec.lower_array, spec.upper_array)

    floor = config.floor_for(spec)
    sigma = max(floor, min(config.shrink * prev.sigma, spread(points, ~frozen)))
    logger.debug(
        "Fitted proposal",
        selected=len(selected),
        sigma_before=round(prev.sigma, 6),
        sigma_after=round(sigma, 6),
    )
    return ProposalDistribution(mean=mean, sigma=sigma, space=spec)
