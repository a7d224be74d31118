# morphforge/tasks/pool.py

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from morphforge.config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_tasks(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> list[R]:
    """Map a pure per-item task, results in input order.

    ``fn`` and the items must be picklable when more than one worker is used.
    ``workers`` defaults to the ``workers`` setting; 1 runs in-process.
    """
    items = list(items)
    workers = workers or get_settings().workers
    name = getattr(fn, "__name__", repr(fn))
    if workers <= 1 or len(items) <= 1:
        logger.debug(f"Running {len(items)} {name} tasks in-process")
        return [fn(item) for item in items]

    workers = min(workers, len(items))
    logger.info(f"Running {len(items)} {name} tasks on {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
