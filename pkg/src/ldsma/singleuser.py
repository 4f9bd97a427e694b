"""Single-user power allocation over a fixed or optimized partition.

The two-stage scheme water-fills the per-symbol powers over the effective
symbol gains (sum of the normalized gains in each group) and then splits
each symbol's power across its subcarriers by maximum ratio transmission.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .partitioning import Partition, count_lds_partitions, enumerate_partitions

ENUMERATION_CAP = 10**6


@dataclass
class SUPowerAllocation:
    """Result of the two-stage allocation for one user."""

    symbol_powers: np.ndarray
    subcarrier_powers: np.ndarray
    water_level: float
    symbol_gains: np.ndarray
    symbol_rates: np.ndarray
    total_rate: float


def symbol_rate(powers, gains) -> float:
    """Rate of one spread symbol: log2(1 + (sum sqrt(p*g))^2)."""
    powers = np.asarray(powers, dtype=np.float64)
    gains = np.asarray(gains, dtype=np.float64)
    if powers.shape != gains.shape:
        raise ValueError("powers and gains must have the same length")
    if np.any(powers < 0):
        raise ValueError("powers must be nonnegative")
    if np.any(gains <= 0):
        raise ValueError("gains must be strictly positive")
    amp = np.sum(np.sqrt(powers * gains))
    return float(np.log2(1.0 + amp * amp))


def mrt_split(symbol_power: float, group_gains) -> np.ndarray:
    """Split a symbol's power across its subcarriers proportionally to gain."""
    group_gains = np.asarray(group_gains, dtype=np.float64)
    if group_gains.size == 0:
        raise ValueError("empty group")
    if symbol_power < 0:
        raise ValueError("symbol power must be nonnegative")
    if np.any(group_gains <= 0):
        raise ValueError("gains must be strictly positive")
    return group_gains / group_gains.sum() * symbol_power


def waterfill(symbol_gains, total_power: float):
    """Water-fill a power budget over symbol gains.

    Returns (symbol_powers, water_level). The powers sum to the budget
    exactly; symbols whose inverse gain sits above the water level stay at
    zero. A zero budget returns zeros with level 0.
    """
    symbol_gains = np.asarray(symbol_gains, dtype=np.float64)
    if symbol_gains.size == 0:
        raise ValueError("empty symbol set")
    if np.any(symbol_gains <= 0):
        raise ValueError("symbol gains must be strictly positive")
    if total_power < 0:
        raise ValueError("total power must be nonnegative")
    powers, level = kernels.waterfill_flat(symbol_gains, float(total_power))
    return powers, float(level)


def effective_symbol_gains(partition: Partition, gains) -> np.ndarray:
    gains = np.asarray(gains, dtype=np.float64)
    return np.array([gains[list(g)].sum() for g in partition.groups])


def mrt_wf(partition: Partition, gains, total_power: float) -> SUPowerAllocation:
    """Two-stage allocation: water-filling over symbols, MRT within groups."""
    gains = np.asarray(gains, dtype=np.float64)
    covered = set(partition.indices)
    if covered != set(range(gains.size)) and not covered.issubset(range(gains.size)):
        raise ValueError("partition indices out of range")
    sg = effective_symbol_gains(partition, gains)
    sym_powers, level = waterfill(sg, total_power)
    sc_powers = np.zeros(gains.size)
    sym_rates = np.empty(len(partition.groups))
    for m, group in enumerate(partition.groups):
        idx = list(group)
        sc_powers[idx] = mrt_split(sym_powers[m], gains[idx])
        sym_rates[m] = symbol_rate(sc_powers[idx], gains[idx])
    return SUPowerAllocation(
        symbol_powers=sym_powers,
        subcarrier_powers=sc_powers,
        water_level=level,
        symbol_gains=sg,
        symbol_rates=sym_rates,
        total_rate=float(sym_rates.sum()),
    )


def partition_bruteforce(gains, spreading: int, total_power: float):
    """Exhaustive search over all partitions; returns (best partition, rate).

    Ties go to the lexicographically smallest grouping, which is the
    enumeration order. Refuses when the partition count exceeds the cap.
    """
    gains = np.asarray(gains, dtype=np.float64)
    n = gains.size
    count = count_lds_partitions(n, spreading)
    if count > ENUMERATION_CAP:
        raise ValueError(
            f"partition count {count} exceeds enumeration cap {ENUMERATION_CAP}"
        )
    best_rate = -1.0
    best_groups = None
    for groups in enumerate_partitions(n, spreading):
        sg = np.array([sum(gains[i] for i in g) for g in groups])
        powers, level = waterfill(sg, total_power)
        rate = float(np.sum(np.log2(1.0 + powers * sg)))
        if rate > best_rate:
            best_rate = rate
            best_groups = groups
    return Partition(groups=best_groups, spreading=spreading), best_rate


def rate_via_esp(symbol_gains, total_power: float) -> float:
    """User rate through the elementary-symmetric-polynomial identity.

    Valid only when water-filling over these symbol gains activates every
    symbol; raises otherwise.
    """
    sg = np.asarray(symbol_gains, dtype=np.float64)
    if sg.size == 0:
        raise ValueError("empty symbol set")
    powers, level = waterfill(sg, total_power)
    if np.any(powers <= 0):
        raise ValueError("water-filling leaves inactive symbols; identity not applicable")
    m = sg.size
    s_m = float(np.prod(sg))
    s_m1 = float(sum(np.prod(np.delete(sg, i)) for i in range(m)))
    return float(m * np.log2((s_m * total_power + s_m1) / (m * s_m)) + np.log2(s_m))


def schur_power_bound(num_symbols: int) -> float:
    """Power threshold below which more-spread symbol gains can only help."""
    if num_symbols < 2:
        raise ValueError("bound requires at least two symbols")
    m = num_symbols
    return float(m**3 - m**2 - m)
