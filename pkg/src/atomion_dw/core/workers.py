from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from atomion_dw.core.settings import get_threads

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None
) -> list[R]:
    """입력 순서를 유지하는 스레드 풀 map.

    LAPACK 호출은 GIL 을 놓기 때문에 per-d 대각화에는 스레드로 충분합니다.
    threads == 1 이면 풀 없이 순차 실행합니다.
    """
    work = list(items)
    n_threads = get_threads() if threads is None else int(threads)
    if n_threads <= 1 or len(work) <= 1:
        return [fn(x) for x in work]

    n_threads = min(n_threads, len(work))
    logger.debug("parallel_map: %d tasks on %d threads", len(work), n_threads)
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(fn, work))
