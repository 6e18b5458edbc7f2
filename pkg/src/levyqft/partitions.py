"""Set partitions and moment/cumulant conversion on the partition lattice.

Partitions are tuples of blocks, each block a sorted tuple of 0-based
indices; blocks are ordered by their smallest element.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations
from typing import Callable, Hashable, Iterator, Mapping, Sequence

Partition = tuple[tuple[int, ...], ...]

MAX_PARTITION_SIZE = 10


def _restricted_growth(n: int) -> Iterator[list[int]]:
    a = [0] * n
    while True:
        yield a
        # increment the rightmost position that may grow
        i = n - 1
        while i > 0 and a[i] > max(a[:i]):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0


def iter_partitions(items: Sequence[Hashable]) -> Iterator[tuple[tuple, ...]]:
    """All partitions of ``items`` (any length), via restricted growth strings."""
    n = len(items)
    if n == 0:
        yield ()
        return
    for code in _restricted_growth(n):
        blocks: list[list] = [[] for _ in range(max(code) + 1)]
        for pos, b in enumerate(code):
            blocks[b].append(items[pos])
        yield tuple(tuple(b) for b in blocks)


@lru_cache(maxsize=None)
def set_partitions(n: int) -> tuple[Partition, ...]:
    """Every partition of ``{0, ..., n-1}``; there are Bell(n) of them."""
    if not 1 <= n <= MAX_PARTITION_SIZE:
        raise ValueError(f"n must lie in [1, {MAX_PARTITION_SIZE}], got {n}")
    return tuple(iter_partitions(tuple(range(n))))


def bell_number(n: int) -> int:
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def subsets(n: int) -> list[tuple[int, ...]]:
    """Nonempty subsets of ``range(n)`` as sorted tuples, by size."""
    return [c for r in range(1, n + 1) for c in combinations(range(n), r)]


def _check_table(table: Mapping[tuple[int, ...], float], n: int) -> None:
    missing = [s for s in subsets(n) if s not in table]
    if missing:
        raise KeyError(f"table incomplete: missing {len(missing)} subsets, e.g. {missing[0]}")


def moments_from_cumulants(cumulant_table: Mapping[tuple[int, ...], float], n: int) -> dict:
    """Compose: ``M(S) = sum over partitions of S of the product of block cumulants``."""
    if not 1 <= n <= MAX_PARTITION_SIZE:
        raise ValueError(f"n must lie in [1, {MAX_PARTITION_SIZE}]")
    _check_table(cumulant_table, n)
    out = {}
    for s in subsets(n):
        total = 0.0
        for part in iter_partitions(s):
            prod = 1.0
            for block in part:
                prod *= cumulant_table[block]
            total += prod
        out[s] = total
    return out


def cumulants_from_moments(moment_table: Mapping[tuple[int, ...], float], n: int) -> dict:
    """Moebius inversion on the partition lattice.

    ``k(S) = sum_pi (-1)^(|pi|-1) (|pi|-1)! prod_{B in pi} M(B)``.
    """
    if not 1 <= n <= 6:
        raise ValueError("cumulant inversion is supported for 1 <= n <= 6")
    _check_table(moment_table, n)
    out = {}
    for s in subsets(n):
        total = 0.0
        for part in iter_partitions(s):
            b = len(part)
            prod = (-1) ** (b - 1) * math.factorial(b - 1)
            for block in part:
                prod *= moment_table[block]
            total += prod
        out[s] = total
    return out


def moment_table(func: Callable[[tuple[int, ...]], float], n: int) -> dict:
    """Tabulate ``func`` on every nonempty subset of ``range(n)``."""
    return {s: func(s) for s in subsets(n)}
