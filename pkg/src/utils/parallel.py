"""
Block-parallel helpers for the pairwise kernels.

Work is split into contiguous index blocks and mapped on a thread pool; results
come back in block order, so concatenations and max-reductions are identical
for every thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

from .. import config
from .logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T")

Block = Tuple[int, int]


def resolve_threads(threads: Optional[int] = None) -> int:
    """
    Resolve a thread-count request.

    Args:
        threads: Requested threads; None uses the configured default, 0 means one per CPU.

    Returns:
        The effective number of worker threads (at least 1).
    """
    if threads is None:
        threads = config.THREADS
    if threads < 0:
        raise ValueError(f"threads must be >= 0, got {threads}")
    if threads == 0:
        threads = os.cpu_count() or 1
    return max(1, threads)


def split_blocks(n_items: int, block_size: Optional[int] = None) -> List[Block]:
    """Split range(n_items) into contiguous half-open blocks."""
    if block_size is None:
        block_size = config.BLOCK_SIZE
    block_size = max(1, int(block_size))
    return [(start, min(start + block_size, n_items)) for start in range(0, n_items, block_size)]


def map_blocks(fn: Callable[[int, int], T], blocks: Sequence[Block], threads: Optional[int] = None) -> List[T]:
    """
    Apply fn(start, stop) to every block, preserving block order.

    Args:
        fn: Function evaluated on one block.
        blocks: Blocks from split_blocks (or any ordered sequence of ranges).
        threads: Worker threads (see resolve_threads).

    Returns:
        The per-block results in the order of blocks.
    """
    workers = min(resolve_threads(threads), max(1, len(blocks)))
    if workers == 1 or len(blocks) <= 1:
        return [fn(start, stop) for start, stop in blocks]

    logger.debug(f"Mapping {len(blocks)} blocks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda block: fn(*block), blocks))
