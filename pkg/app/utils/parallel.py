import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

# Shared pool for per-function work, created on first use
_executor: Optional[ThreadPoolExecutor] = None
_executor_workers = 0


def _get_executor(threads: int) -> ThreadPoolExecutor:
    global _executor, _executor_workers
    if _executor is None or _executor_workers != threads:
        cleanup_executor()
        _executor = ThreadPoolExecutor(max_workers=threads, thread_name_prefix="dfi_worker")
        _executor_workers = threads
    return _executor


def run_parallel(func: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """
    Apply func to every item, results in input order.

    Usage:
        states = run_parallel(build_state, module.functions, settings.threads)

    Args:
        func: Work for one item; must not touch state shared with other items
        items: Inputs (typically functions of a module)
        threads: Worker count; 1 runs inline on the calling thread

    Returns:
        [func(item) for item in items]
    """
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    executor = _get_executor(threads)
    try:
        return list(executor.map(func, items))
    except Exception as e:
        logger.error(f"Error executing {getattr(func, '__name__', func)} in worker pool: {e}", exc_info=True)
        raise


def cleanup_executor():
    """
    Shut the worker pool down.
    Called by the CLI on exit.
    """
    global _executor, _executor_workers
    if _executor:
        logger.debug("Shutting down worker pool...")
        _executor.shutdown(wait=True)
        _executor = None
        _executor_workers = 0
