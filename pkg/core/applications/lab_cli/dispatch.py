import logging
from collections.abc import Callable
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import Any

from celery import Task
from celery import group
from django.conf import settings

from core.helper.enums import DispatchBackend

logger = logging.getLogger(__name__)


def resolve_jobs(jobs: int | None) -> int:
    return max(1, jobs if jobs is not None else settings.LAB_DEFAULT_JOBS)


def dispatch(
    task: Task,
    payloads: Iterable[dict],
    *,
    jobs: int | None = None,
    key: Callable[[dict], Any] | None = None,
) -> list[dict]:
    """Run ``task`` over JSON payloads and return the results, sorted by ``key`` when given.

    With ``LAB_DISPATCH = "celery"`` the payloads go out as one group; otherwise
    they run in-process, sequentially for a single job and on a thread pool
    beyond that.
    """
    payloads = list(payloads)
    if not payloads:
        return []
    if settings.LAB_DISPATCH == DispatchBackend.CELERY:
        logger.info("Dispatching %d %s payloads to celery", len(payloads), task.name)
        results = group(task.s(payload) for payload in payloads).apply_async().get()
    else:
        workers = resolve_jobs(jobs)
        logger.info("Running %d %s payloads on %d local job(s)", len(payloads), task.name, workers)
        if workers == 1:
            results = [task(payload) for payload in payloads]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(task, payloads))
    if key is not None:
        results = sorted(results, key=key)
    return results
