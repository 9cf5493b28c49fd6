"""
Replica scheduling with per-replica RNG streams and resumable chunk storage.

Each replica ``i`` of an ensemble draws from its own stream, so the result
array does not depend on how replicas are grouped into chunks or on the
number of worker threads.  Completed chunks are written atomically as
``.npy`` files; a rerun over the same directory only computes what is
missing.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

THREADS_ENV = "BMID_THREADS"

# stream tags, high byte of the 64-bit stream id
TAG_CONTINUUM = 1
TAG_SZU = 2
TAG_XN = 3
TAG_COUPLING = 4
TAG_PERMUTATION = 5
TAG_LEMMA = 6
TAG_SKOROHOD = 7


def stream_id(tag: int, n: int, replica: int) -> int:
    """Pack ``(tag, n, replica)`` into a 64-bit stream id."""
    if not (0 <= tag < 256 and 0 <= n < 256 and 0 <= replica < 2**48):
        raise ValueError(f"stream components out of range: {(tag, n, replica)}")
    return (tag << 56) | (n << 48) | replica


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
    return 1


class ChunkStore:
    """Directory of finished chunks for one or more named ensembles."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, key: str, start: int, stop: int) -> Path:
        return self.root / key / f"chunk_{start:09d}_{stop:09d}.npy"

    def load(self, key: str, start: int, stop: int):
        path = self._path(key, start, stop)
        if not path.exists():
            return None
        try:
            arr = np.load(path, allow_pickle=False)
        except (OSError, ValueError):
            log.warning("discarding unreadable chunk %s", path)
            return None
        return arr if arr.shape[0] == stop - start else None

    def save(self, key: str, start: int, stop: int, arr: np.ndarray) -> None:
        path = self._path(key, start, stop)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npy")
        np.save(tmp, arr, allow_pickle=False)
        os.replace(tmp, path)


def run_ensemble(
    task: Callable[[int], np.ndarray],
    count: int,
    *,
    threads: int | None = None,
    chunk_size: int = 500,
    store: ChunkStore | None = None,
    key: str = "ensemble",
) -> np.ndarray:
    """Evaluate ``task(i)`` for ``i in range(count)`` and stack the rows in index order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    threads = default_threads() if threads is None else max(1, int(threads))
    bounds = [(s, min(s + chunk_size, count)) for s in range(0, count, chunk_size)]

    def do_chunk(b):
        start, stop = b
        if store is not None:
            cached = store.load(key, start, stop)
            if cached is not None:
                return cached
        arr = np.stack([np.asarray(task(i), dtype=np.float64) for i in range(start, stop)])
        if store is not None:
            store.save(key, start, stop, arr)
        return arr

    if threads == 1:
        parts = [do_chunk(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(do_chunk, bounds))
    return np.concatenate(parts, axis=0)
