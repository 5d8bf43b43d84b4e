"""
joblib fan-out shared by the pairwise and bootstrap stages.
"""

import os
from typing import Callable, List, Sequence, TypeVar

from joblib import Parallel, delayed

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(function: Callable[[T], R], inputs: Sequence[T], workers: int = 1) -> List[R]:
    """
    Apply function to every input, keeping input order in the result.

    Args:
        function: Picklable callable (module-level function or functools.partial)
        inputs: Task inputs
        workers: Number of worker processes; 1 runs inline

    Returns:
        Results in the same order as inputs
    """
    if workers <= 1 or len(inputs) <= 1:
        return [function(item) for item in inputs]
    n_jobs = min(os.cpu_count() or 1, workers)
    return Parallel(n_jobs=n_jobs)(delayed(function)(item) for item in inputs)
