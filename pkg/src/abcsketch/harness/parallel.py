"""Process-level parallelism capped by the ``ABCS_THREADS`` environment variable."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_VAR = "ABCS_THREADS"


def worker_count() -> int:
    """Workers allowed by ``ABCS_THREADS`` (default 1, i.e. serial)."""
    raw = os.environ.get(ENV_VAR, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer >= 1, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{ENV_VAR} must be an integer >= 1, got {raw!r}")
    return n


def parallel_map(fn, items) -> list:
    """``list(map(fn, items))``, spread over worker processes when allowed.

    Output order always matches input order, so results are identical to the
    serial run whenever ``fn`` is deterministic in its argument.
    """
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
