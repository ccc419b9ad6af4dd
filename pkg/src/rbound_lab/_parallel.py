import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(n_tasks):
    """Workers to use for ``n_tasks`` independent tasks, capped by ``RBLAB_THREADS``."""
    cap = os.environ.get("RBLAB_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_tasks))


def ordered_map(fn, items):
    """Map ``fn`` over ``items``; results keep input order so reductions stay deterministic."""
    items = list(items)
    workers = worker_count(len(items))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
