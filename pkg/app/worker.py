from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence

from app.logging_config import configure_logging
from app.models import CheckJob, CheckResult

logger = logging.getLogger(__name__)


def _init_worker(log_level: str) -> None:
    configure_logging(log_level)


def run_jobs(
    jobs: Sequence[CheckJob],
    runner: Callable[[CheckJob], CheckResult],
    workers: int = 1,
) -> List[CheckResult]:
    """Run jobs with at most ``workers`` processes; results keep the job order."""
    if workers <= 1 or len(jobs) <= 1:
        return [runner(job) for job in jobs]
    pool_size = min(workers, len(jobs))
    logger.info("worker.pool.started", extra={"workers": pool_size, "jobs": len(jobs)})
    with ProcessPoolExecutor(
        max_workers=pool_size,
        initializer=_init_worker,
        initargs=(jobs[0].config.log_level,),
    ) as pool:
        results = list(pool.map(runner, jobs))
    logger.info("worker.pool.finished", extra={"workers": pool_size, "jobs": len(jobs)})
    return results
