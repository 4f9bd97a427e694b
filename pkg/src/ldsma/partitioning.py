"""Subcarrier partitioning schemes and majorization utilities.

A partition groups a user's subcarriers into spreading subsets; each
subset carries one modulated symbol. Groups are stored canonically:
indices ascending within a group, groups ordered by their first index.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Partition:
    """Grouping of subcarrier indices into spreading subsets."""

    groups: tuple
    spreading: int

    def __post_init__(self):
        groups = tuple(tuple(sorted(int(i) for i in g)) for g in self.groups)
        groups = tuple(sorted(groups, key=lambda g: g[0]))
        object.__setattr__(self, "groups", groups)
        seen = set()
        for g in groups:
            if not g:
                raise ValueError("empty group")
            for i in g:
                if i in seen:
                    raise ValueError("groups must be pairwise disjoint")
                seen.add(i)

    @property
    def indices(self) -> tuple:
        return tuple(sorted(i for g in self.groups for i in g))

    @property
    def num_symbols(self) -> int:
        return len(self.groups)


def _descending_order(gains: np.ndarray) -> np.ndarray:
    """Indices by gain descending; ties broken by ascending subcarrier index."""
    gains = np.asarray(gains, dtype=np.float64)
    return np.lexsort((np.arange(gains.size), -gains))


def partition_greedy(gains, spreading: int) -> Partition:
    """Sort by gain descending and group consecutive blocks.

    When the subcarrier count is not divisible by the spreading factor the
    final group keeps the remainder.
    """
    gains = np.asarray(gains, dtype=np.float64)
    if gains.size < 1:
        raise ValueError("need at least one subcarrier")
    order = _descending_order(gains)
    groups = [tuple(order[i : i + spreading]) for i in range(0, gains.size, spreading)]
    return Partition(groups=tuple(groups), spreading=spreading)


def partition_lmv(gains, spreading: int) -> Partition:
    """Best-with-worst pairing that flattens the symbol-gain vector."""
    gains = np.asarray(gains, dtype=np.float64)
    n = gains.size
    if spreading not in (2, 3):
        raise ValueError("least-majorized partitioning supports spreading 2 or 3 only")
    if n % spreading != 0:
        raise ValueError("subcarrier count must be divisible by the spreading factor")
    order = _descending_order(gains)
    m_sym = n // spreading
    groups = []
    for m in range(1, m_sym + 1):
        if spreading == 2:
            groups.append((order[m - 1], order[n - m]))
        else:
            groups.append((order[m - 1], order[n - 2 * m], order[n - 2 * m + 1]))
    return Partition(groups=tuple(groups), spreading=spreading)


def partition_random(gains, spreading: int, seed: int) -> Partition:
    """Uniformly random partition into groups of the spreading size.

    A uniform shuffle followed by blocking hits every unordered partition
    with equal probability.
    """
    gains = np.asarray(gains, dtype=np.float64)
    n = gains.size
    if n % spreading != 0:
        raise ValueError("subcarrier count must be divisible by the spreading factor")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    groups = [tuple(order[i : i + spreading]) for i in range(0, n, spreading)]
    return Partition(groups=tuple(groups), spreading=spreading)


def count_lds_partitions(num_subcarriers: int, spreading: int) -> int:
    """Number of ways to split the subcarriers into unordered groups.

    Exact integer arithmetic: n! / ((d_v!)^m * m!) with m = n / d_v.
    """
    if num_subcarriers % spreading != 0:
        raise ValueError("subcarrier count must be divisible by the spreading factor")
    m_sym = num_subcarriers // spreading
    return math.factorial(num_subcarriers) // (
        math.factorial(spreading) ** m_sym * math.factorial(m_sym)
    )


def enumerate_partitions(num_subcarriers: int, spreading: int):
    """Yield every partition exactly once, lexicographically.

    The smallest unplaced index anchors each new group, so each unordered
    partition appears once.
    """
    if num_subcarriers % spreading != 0:
        raise ValueError("subcarrier count must be divisible by the spreading factor")
    from itertools import combinations

    def rec(remaining, acc):
        if not remaining:
            yield tuple(acc)
            return
        anchor = remaining[0]
        rest = remaining[1:]
        for combo in combinations(rest, spreading - 1):
            group = (anchor,) + combo
            left = [i for i in rest if i not in combo]
            acc.append(group)
            yield from rec(left, acc)
            acc.pop()

    yield from rec(list(range(num_subcarriers)), [])


def majorizes(x, y, rel_tol: float = 1e-9) -> bool:
    """True when x weakly dominates y in sorted prefix sums with equal totals."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("vectors must have the same length")
    xs = np.sort(x)[::-1]
    ys = np.sort(y)[::-1]
    cx = np.cumsum(xs)
    cy = np.cumsum(ys)
    scale = max(abs(cx[-1]), abs(cy[-1]), 1.0)
    if abs(cx[-1] - cy[-1]) > rel_tol * scale:
        return False
    return bool(np.all(cx[:-1] >= cy[:-1] - rel_tol * scale))
