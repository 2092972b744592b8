"""Deterministic fan-out helper for independent propagations."""

from concurrent.futures import ThreadPoolExecutor


def ordered_map(fn, items, max_workers=None):
    """Map fn over items, optionally on a thread pool.

    Results always come back in input order, so worker count never
    changes the output.
    """
    items = list(items)
    if max_workers is None or max_workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        return list(ex.map(fn, items))
