import asyncio
import logging
from typing import Callable, Iterable, TypeVar

from src import config


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def worker_limit(n_jobs: int | None = None) -> int:
    """Requested worker count capped by AOCC_THREADS; None means the cap itself."""
    return max(1, min(n_jobs or config.AOCC_THREADS, config.AOCC_THREADS))


#-----------------------------
# :: Run Bounded Function
#-----------------------------

"""
Runs `func` over `items` on worker threads, at most `limit` at a time, and returns the
results in input order whatever the completion order. A failing item cancels nothing:
its exception is logged and re-raised once every task has settled.
"""

async def run_bounded_async(func: Callable[[T], R], items: Iterable[T], limit: int) -> list[R]:
    semaphore = asyncio.Semaphore(limit)

    async def safe_process(index: int, item: T) -> R:
        async with semaphore:
            try:
                return await asyncio.to_thread(func, item)
            except Exception as e:
                logger.error(f"Worker failed on item {index} ({type(e).__name__}): {e}")
                raise

    results = await asyncio.gather(*(safe_process(i, item) for i, item in enumerate(items)), return_exceptions=True)
    for result in results:
        if isinstance(result, BaseException):
            raise result
    return results


def run_sequential(func: Callable[[T], R], items: list[T]) -> list[R]:
    """In-thread counterpart of `run_bounded_async` with the same failure contract."""
    results, failures = [], []
    for index, item in enumerate(items):
        try:
            results.append(func(item))
        except Exception as e:
            logger.error(f"Worker failed on item {index} ({type(e).__name__}): {e}")
            failures.append(e)
    if failures:
        raise failures[0]
    return results


def run_bounded(func: Callable[[T], R], items: Iterable[T], n_jobs: int | None = None) -> list[R]:
    """Synchronous entry point; one worker or one item skips the event loop."""
    items = list(items)
    limit = worker_limit(n_jobs)
    if limit == 1 or len(items) <= 1:
        return run_sequential(func, items)
    return asyncio.run(run_bounded_async(func, items, limit))
