"""
The PIVOT optimizer: proposal sampling, oracle-guided refitting, and
parallel-instance aggregation.
"""

from src.optimize.distribution import (
    ProposalDistribution,
    fit,
    init_distribution,
    sample,
    spread,
)
from src.optimize.engine import (
    IterationRecord,
    PivotProblem,
    PivotTrace,
    ask_oracle,
    pivot_run,
    pivot_step,
)
from src.optimize.parallel import (
    PivotResult,
    arbitrate,
    derive_seeds,
    parallel_pivot,
    refit_candidates,
    solve,
)

__all__ = [
    "IterationRecord",
    "PivotProblem",
    "PivotResult",
    "PivotTrace",
    "ProposalDistribution",
    "arbitrate",
    "ask_oracle",
    "derive_seeds",
    "fit",
    "init_distribution",
    "parallel_pivot",
    "pivot_run",
    "pivot_step",
    "refit_candidates",
    "sample",
    "solve",
    "spread",
]
