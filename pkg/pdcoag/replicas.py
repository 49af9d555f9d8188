"""Replica-parallel Monte Carlo execution.

Replica r always draws from RngStream(seed, base + r), so results do not
depend on the number of worker processes.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, TypeVar

from .errors import DomainError
from .numerics import RngStream

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _run_block(fn: Callable[[RngStream], T], seed: int, indices: range) -> list[T]:
    return [fn(RngStream(seed, r)) for r in indices]


def run_replicas(
    fn: Callable[[RngStream], T],
    count: int,
    seed: int,
    jobs: int = 1,
    base: int = 0,
) -> list[T]:
    """Evaluate fn once per replica and return results in replica order.

    fn must be picklable (a module-level function or a functools.partial of
    one) when jobs > 1.
    """
    if count < 0:
        raise DomainError(f"replica count must be nonnegative, got {count}")
    if jobs < 1:
        raise DomainError(f"jobs must be positive, got {jobs}")
    if jobs == 1 or count < 2:
        return _run_block(fn, seed, range(base, base + count))

    size = -(-count // jobs)
    blocks = [range(base + start, base + min(start + size, count)) for start in range(0, count, size)]
    logger.debug("running %d replicas in %d blocks", count, len(blocks))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_block, fn, seed, block) for block in blocks]
        results: list[T] = []
        for future in futures:
            results.extend(future.result())
    return results
