"""
Deterministic random streams and an ordered parallel map.

Every sample cell draws from its own generator keyed by (seed, stream, cell),
so results do not depend on how cells are scheduled across workers.
"""

import logging
import os

import numpy as np
from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

_thread_cap = None


def set_thread_cap(threads):
    global _thread_cap
    _thread_cap = int(threads) if threads else None


def thread_cap() -> int:
    if _thread_cap:
        return _thread_cap
    return int(os.environ.get('UCLAB_THREADS') or 1)


def stream(seed: int, *key) -> np.random.Generator:
    """Generator for one cell; key entries must be non-negative integers."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in key]])


def chunks(total: int, size: int):
    """(index, count) pairs covering range(total) in fixed-size cells."""
    for index, start in enumerate(range(0, total, size)):
        yield index, min(size, total - start)


def parallel_map(fn, items, threads=None):
    """fn over items, results in input order."""
    items = list(items)
    n_jobs = threads or thread_cap()
    if n_jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug(f'Dispatching {len(items)} cells over {n_jobs} threads')
    return Parallel(n_jobs=n_jobs, prefer='threads')(delayed(fn)(item) for item in items)


def log_uniform(rng: np.random.Generator, lo: float, hi: float, size):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))
