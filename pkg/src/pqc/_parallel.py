import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "PQC_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None


def ordered_map(fn, items):
    """``list(map(fn, items))``, spread over up to ``PQC_THREADS`` threads.

    Result order always follows ``items``.
    """
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
