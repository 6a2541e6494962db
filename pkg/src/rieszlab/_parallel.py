from concurrent.futures import ThreadPoolExecutor

from . import _config

# Work is always split at this granularity regardless of the thread count,
# so every partial result is computed from identically shaped inputs.
CHUNK = 256


def chunk_bounds(n, chunk=CHUNK):
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def ordered_map(func, bounds, threads=None):
    """Apply ``func(lo, hi)`` to every chunk and return results in chunk order."""
    nthreads = _config.threads(threads)
    if nthreads == 1 or len(bounds) <= 1:
        return [func(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        return list(pool.map(lambda b: func(*b), bounds))
