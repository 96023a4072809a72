"""
Geometry-driven stand-in oracle.

Ranks labels by the distance of their actions to a hidden truth, optionally
perturbed by Gaussian score noise. It never looks at pixels.
"""

from typing import Optional

import numpy as np
import structlog

from src.action_space.spaces import Action
from src.errors import OracleError
from src.oracle.base import BaseOracle, SelectionQuery, SelectionResponse

logger = structlog.get_logger(__name__)


def synthetic_select(
    query: SelectionQuery,
    hidden_truth: Action,
    noise_sigma: float,
    rng: np.random.Generator,
    extent: Optional[float] = None,
) -> SelectionResponse:
    """
    Rank the query's labels by distance to a hidden truth.

    score(label) = |action - truth| + noise_sigma * extent * N(0, 1)

    Args:
        query: Query whose labels map to actions
        hidden_truth: Target action in the query's action space
        noise_sigma: Noise scale as a fraction of the bound extent
        rng: Random generator; one normal draw per label is always consumed
        extent: Bound extent; defaults to the query space's largest extent

    Returns:
        The k lowest-scoring labels, best first (ties toward the lower label)
    """
    labels = sorted(query.annotated.labels)
    if extent is None:
        extent = query.spec.max_extent if query.spec is not None else 1.0
    truth = hidden_truth.as_array()
    distances = np.array(
        [np.linalg.norm(query.annotated.labels[label].as_array() - truth) for label in labels]
    )
    noise = rng.standard_normal(len(labels))
    scores = distances + noise_sigma * extent * noise
    order = sorted(range(len(labels)), key=lambda i: (scores[i], labels[i]))
    ranked = tuple(labels[i] for i in order[: query.k])
    text = '{"points": [' + ", ".join(str(label) for label in ranked) + "]}"
    return SelectionResponse(ranked_labels=ranked, raw_text=text)


class SyntheticOracle(BaseOracle):
    """
    Seeded synthetic oracle.

    The hidden truth is fixed at construction or read from each query.
    Forks get independent generators, so parallel instances may run
    concurrently and stay reproducible.
    """

    name = "synthetic"
    concurrent = True

    def __init__(
        self,
        noise_sigma: float = 0.0,
        seed: int = 0,
        truth: Optional[Action] = None,
    ):
        self.noise_sigma = noise_sigma
        self.seed = seed
        self.truth = truth
        self._rng = np.random.default_rng(seed)

    def fork(self, seed: int) -> "SyntheticOracle":
        return SyntheticOracle(noise_sigma=self.noise_sigma, seed=seed, truth=self.truth)

    async def select(self, query: SelectionQuery) -> SelectionResponse:
        truth = self.truth if self.truth is not None else query.truth
        if truth is None:
            raise OracleError("Synthetic oracle needs a hidden truth")
        return synthetic_select(query, truth, self.noise_sigma, self._rng)
