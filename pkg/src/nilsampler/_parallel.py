import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    """NILSAMPLER_THREADS caps the pool; defaults to the visible CPU count."""
    env = os.environ.get("NILSAMPLER_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), 256))
        except ValueError:
            pass
    return cpus


def map_ordered(fn, items):
    """Apply fn to items, possibly in threads; results come back in input order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
