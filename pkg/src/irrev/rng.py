"""Seeded Gaussian streams that do not depend on the number of worker threads."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

DEFAULT_SEED = 20240611
CHUNK_ROWS = 1 << 16


def default_seed() -> int:
    """``IRREV_SEED`` if set, else :data:`DEFAULT_SEED`."""
    v = os.environ.get("IRREV_SEED")
    return int(v) if v not in (None, "") else DEFAULT_SEED


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed


def _chunk(args):
    seed, stream, idx, rows, cols = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, stream, idx]))
    return rng.standard_normal((rows, cols))


def normal_stream(seed, rows, cols, stream=0, workers=1) -> np.ndarray:
    """``rows x cols`` standard normals.

    Rows are produced in fixed chunks of :data:`CHUNK_ROWS`, chunk ``i`` from
    the substream ``(seed, stream, i)``, and placed in chunk order. Threads only
    change who fills a chunk, never its content.
    """
    seed = _check_seed(seed)
    jobs = [(seed, int(stream), i, min(CHUNK_ROWS, rows - start), cols) for i, start in enumerate(range(0, rows, CHUNK_ROWS))]
    out = np.empty((rows, cols))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(_chunk, jobs))
    else:
        parts = [_chunk(j) for j in jobs]
    for i, part in enumerate(parts):
        out[i * CHUNK_ROWS : i * CHUNK_ROWS + part.shape[0]] = part
    return out


def ensemble(fn, count, seed, workers=1):
    """Run ``fn(path_seed, index)`` for ``count`` paths, results in index order.

    Path seeds come from ``SeedSequence(seed).spawn``; the list is fixed before
    any work is scheduled.
    """
    seeds = [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(_check_seed(seed)).spawn(count)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, seeds, range(count)))
    return [fn(s, i) for i, s in enumerate(seeds)]
