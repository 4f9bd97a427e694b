"""Multiuser subcarrier and power allocation.

Two iterative heuristics share a skeleton: per iteration every user runs a
single-user power allocation over its allocated plus still-available
subcarriers against the current interference view, per-resource utilities
are computed, and a selection criterion hands one resource to one user.
The spreading-aware variant moves whole groups of subcarriers and uses the
two-stage (water-filling + maximum ratio) allocation; the per-subcarrier
variant moves single subcarriers with plain water-filling and applies the
spreading only in a final pass. Selection criterion "sa1" takes the
largest utility, "sa2" the user with the largest weighted rate increase.

After the assignment loop a finalization pass walks users in decreasing
weight order, reallocates power on the final assignment (greedy grouping
plus two-stage allocation) and books the exact interference each user
leaves behind, so stored rates, powers and interference are mutually
consistent.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import ChannelGains
from .kernels import UTILITY_TOL
from .mac import UserWeights
from .partitioning import Partition

CRITERIA = ("sa1", "sa2")


@dataclass
class AllocationResult:
    """Final assignment, powers and rates of one multiuser allocation run."""

    assignment: np.ndarray          # (K, N) 0/1
    powers: np.ndarray              # (K, N) final transmit powers, W
    interference: np.ndarray        # (K, N) from strictly-higher-weight users, W
    loop_powers: np.ndarray         # (K, N) at-assignment power snapshots
    loop_interference: np.ndarray   # (K, N) interference view kept by the loop
    partitions: list                # per-user Partition of its subcarriers
    rates: np.ndarray               # (K,) bits per subcarrier use
    weighted_sum_rate: float
    iterations: int
    weights: np.ndarray             # (K,)
    group_of: np.ndarray            # (K,)
    objective_trace: np.ndarray     # sa2 only: sum_k w_k * rate on allocated set, per iteration
    gain_trace: np.ndarray          # sa2 only: winning weighted rate increase, per iteration

    @property
    def allocated_sets(self) -> list:
        return [np.flatnonzero(self.assignment[k]).tolist() for k in range(self.assignment.shape[0])]


def utility_mumrt(weight: float, h_group, p_group, j_group, noise: float) -> float:
    """Weighted rate of one spread symbol against the interference view."""
    h_group = np.asarray(h_group, dtype=np.float64)
    p_group = np.asarray(p_group, dtype=np.float64)
    j_group = np.asarray(j_group, dtype=np.float64)
    amp = np.sum(np.sqrt(h_group * p_group / (j_group + noise)))
    return float(weight * np.log2(1.0 + amp * amp))


def utility_muwf(weight: float, h: float, p: float, j: float, noise: float) -> float:
    """Weighted rate of one subcarrier against the interference view."""
    return float(weight * np.log2(1.0 + h * p / (j + noise)))


def _finalize(h, noise, weights, group_of, power, x, spreading):
    """Reallocate power on the final assignment in decreasing weight order.

    Each user greedily groups its subcarriers by effective gain (the last
    group may hold a remainder), water-fills the symbol powers and splits
    them by maximum ratio; the resulting interference is booked exactly
    onto every strictly-lower-weight user before that user is processed.
    """
    k_users, n_sub = h.shape
    order = sorted(range(k_users), key=lambda k: (-weights[k], k))
    j_fin = np.zeros((k_users, n_sub))
    p_fin = np.zeros((k_users, n_sub))
    rates = np.zeros(k_users)
    partitions = [None] * k_users
    for k in order:
        idx = np.flatnonzero(x[k])
        if idx.size == 0:
            partitions[k] = Partition(groups=(), spreading=spreading)
            continue
        e_row = h[k] / (noise + j_fin[k])
        ordpos = np.lexsort((idx, -e_row[idx]))
        sorted_sc = idx[ordpos]
        blocks = [sorted_sc[i : i + spreading] for i in range(0, sorted_sc.size, spreading)]
        sg = np.array([e_row[b].sum() for b in blocks])
        sym_p, _level = kernels.waterfill_flat(sg, power)
        for b, pb, gb in zip(blocks, sym_p, sg):
            p_fin[k, b] = pb * e_row[b] / gb
        rates[k] = float(np.sum(np.log2(1.0 + sym_p * sg)))
        partitions[k] = Partition(groups=tuple(tuple(int(s) for s in b) for b in blocks), spreading=spreading)
        lower = weights < weights[k]
        if lower.any():
            j_fin[np.ix_(lower, idx)] += (h[k, idx] * p_fin[k, idx])[None, :]
    return p_fin, j_fin, rates, partitions


def _run(gains, weights, max_power_w, loading, spreading, criterion, kernel, orthogonal=False):
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    if weights.num_groups != loading:
        raise ValueError("weight grouping must match the subcarrier loading")
    h = gains.gains
    noise = gains.noise_power_per_subcarrier
    w = np.asarray(weights.weights, dtype=np.float64)
    gid = np.asarray(weights.group_of, dtype=np.int64)
    use_sa2 = criterion == "sa2"
    if kernel is kernels.mumrt_loop:
        if gains.num_subcarriers % spreading != 0:
            raise ValueError("subcarrier count must be divisible by the spreading factor")
        x, p_snap, j_loop, iters, obj_trace, gain_trace = kernels.mumrt_loop(
            h, noise, w, gid, float(max_power_w), loading, spreading, use_sa2, UTILITY_TOL
        )
        final_spreading = spreading
    else:
        x, p_snap, j_loop, iters, obj_trace, gain_trace = kernels.muwf_loop(
            h, noise, w, gid, float(max_power_w), loading, use_sa2, orthogonal, UTILITY_TOL
        )
        final_spreading = 1 if orthogonal else spreading
    p_fin, j_fin, rates, partitions = _finalize(
        h, noise, w, gid, float(max_power_w), x, final_spreading
    )
    return AllocationResult(
        assignment=x,
        powers=p_fin,
        interference=j_fin,
        loop_powers=p_snap,
        loop_interference=j_loop,
        partitions=partitions,
        rates=rates,
        weighted_sum_rate=float(np.dot(w, rates)),
        iterations=int(iters),
        weights=w,
        group_of=gid,
        objective_trace=obj_trace,
        gain_trace=gain_trace,
    )


def mumrt(gains: ChannelGains, weights: UserWeights, max_power_w: float,
          loading: int, spreading: int, criterion: str = "sa1") -> AllocationResult:
    """Spreading-aware iterative allocation (groups of subcarriers per step)."""
    return _run(gains, weights, max_power_w, loading, spreading, criterion, kernels.mumrt_loop)


def muwf(gains: ChannelGains, weights: UserWeights, max_power_w: float,
         loading: int, spreading: int, criterion: str = "sa1") -> AllocationResult:
    """Per-subcarrier iterative allocation with a final spreading pass."""
    return _run(gains, weights, max_power_w, loading, spreading, criterion, kernels.muwf_loop)


def ofdma_baseline(gains: ChannelGains, weights: UserWeights, max_power_w: float) -> AllocationResult:
    """Orthogonal stand-in baseline: single occupancy, no spreading.

    The per-subcarrier machinery runs with every assigned subcarrier
    removed from all users, so at most one user holds any subcarrier; the
    grouped weights still steer priorities. Comparisons against this
    baseline are qualitative-trend only.
    """
    return _run(
        gains, weights, max_power_w, weights.num_groups, 1, "sa1",
        kernels.muwf_loop, orthogonal=True,
    )


def static_baseline(gains: ChannelGains, max_power_w: float, spreading: int) -> AllocationResult:
    """Orthogonal equal split: contiguous blocks of subcarriers, equal power.

    Each user gets floor(N/K) subcarriers (when K > N the first N users
    get one each), power is divided equally over them, and rates are
    evaluated on the greedy grouping. No interference anywhere.
    """
    k_users = gains.num_users
    n_sub = gains.num_subcarriers
    g = gains.normalized_gains
    per_user = n_sub // k_users
    x = np.zeros((k_users, n_sub), np.uint8)
    if per_user >= 1:
        for k in range(k_users):
            x[k, k * per_user : (k + 1) * per_user] = 1
    else:
        for k in range(n_sub):
            x[k, k] = 1
    powers = np.zeros((k_users, n_sub))
    rates = np.zeros(k_users)
    partitions = []
    weights = np.ones(k_users)
    for k in range(k_users):
        idx = np.flatnonzero(x[k])
        if idx.size == 0:
            partitions.append(Partition(groups=(), spreading=spreading))
            continue
        p_each = max_power_w / idx.size
        powers[k, idx] = p_each
        ordpos = np.lexsort((idx, -g[k, idx]))
        sorted_sc = idx[ordpos]
        blocks = [sorted_sc[i : i + spreading] for i in range(0, sorted_sc.size, spreading)]
        rate = 0.0
        for b in blocks:
            amp = np.sum(np.sqrt(p_each * g[k, b]))
            rate += np.log2(1.0 + amp * amp)
        rates[k] = rate
        partitions.append(Partition(groups=tuple(tuple(int(s) for s in b) for b in blocks), spreading=spreading))
    zeros = np.zeros((k_users, n_sub))
    return AllocationResult(
        assignment=x,
        powers=powers,
        interference=zeros,
        loop_powers=powers.copy(),
        loop_interference=zeros.copy(),
        partitions=partitions,
        rates=rates,
        weighted_sum_rate=float(rates.sum()),
        iterations=0,
        weights=weights,
        group_of=np.ones(k_users, dtype=np.int64),
        objective_trace=np.zeros(0),
        gain_trace=np.zeros(0),
    )


def recompute_interference(result: AllocationResult, gains: ChannelGains) -> np.ndarray:
    """Interference each user sees from strictly-higher-weight users,
    rebuilt from scratch out of the stored final powers."""
    h = gains.gains
    w = result.weights
    k_users, n_sub = h.shape
    signal = result.assignment * h * result.powers
    j = np.zeros((k_users, n_sub))
    for k in range(k_users):
        higher = w > w[k]
        j[k] = signal[higher].sum(axis=0)
    return j


def weighted_sum_rate(result: AllocationResult, gains: ChannelGains, weights=None) -> float:
    """Weighted sum of per-symbol rates recomputed from the stored state.

    Interference comes only from strictly-higher-weight users; rates are
    evaluated on the stored partitions with the stored powers.
    """
    h = gains.gains
    noise = gains.noise_power_per_subcarrier
    w = result.weights if weights is None else np.asarray(weights, dtype=np.float64)
    j = recompute_interference(result, gains)
    total = 0.0
    for k, part in enumerate(result.partitions):
        user_rate = 0.0
        for group in part.groups:
            idx = list(group)
            amp = np.sum(np.sqrt(h[k, idx] * result.powers[k, idx] / (j[k, idx] + noise)))
            user_rate += np.log2(1.0 + amp * amp)
        total += w[k] * user_rate
    return float(total)
