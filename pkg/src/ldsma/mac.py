"""Relaxed-optimal reference allocator for the multiuser uplink.

The continuous-frequency optimum is applied per subcarrier: at every
interference level the user with the largest positive utility
w/(noise + q) - lambda/h receives power, multipliers are tuned by
per-user bisection inside Gauss-Seidel sweeps until every power budget is
met, and rates follow from successive decoding in increasing weight
order. Grouping users into as many equal-weight groups as the subcarrier
loading keeps at most one active user per group on every subcarrier.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import ChannelGains, UserPosition

LAMBDA_FLOOR = 1e-12


@dataclass(frozen=True)
class UserWeights:
    """Per-user priority weights from distance-based grouping."""

    weights: np.ndarray        # (K,) weight of each user
    group_of: np.ndarray       # (K,) group label in 1..num_groups (1 = nearest)
    group_weights: np.ndarray  # (num_groups,) strictly increasing

    @property
    def num_groups(self) -> int:
        return len(self.group_weights)


@dataclass
class LagrangeState:
    lambdas: np.ndarray
    consumed_power: np.ndarray
    converged: bool
    sweeps: int


@dataclass
class SubcarrierAllocation:
    """Active users on one subcarrier with their dominance intervals."""

    active_users: list         # decoding order: increasing weight
    intervals: dict            # user -> (q_lo, q_hi)
    received_power: np.ndarray
    transmit_power: np.ndarray


@dataclass
class MacResult:
    transmit_power: np.ndarray   # (K, N)
    received_power: np.ndarray   # (K, N) interference-level measures
    allocation: list             # per-subcarrier SubcarrierAllocation
    rates: np.ndarray            # (K,) bits per subcarrier use
    state: LagrangeState

    @property
    def converged(self) -> bool:
        return self.state.converged


def utility(weight: float, q: float, gain: float, lam: float, noise: float) -> float:
    """Marginal value of granting a user power at interference level q:
    w/(noise + q) - lambda/gain."""
    if q < 0:
        raise ValueError("interference level must be nonnegative")
    if gain <= 0:
        raise ValueError("gain must be strictly positive")
    if lam < 0:
        raise ValueError("multiplier must be nonnegative")
    return weight / (noise + q) - lam / gain


def group_users(positions: list[UserPosition], num_groups: int) -> UserWeights:
    """Distance-based grouping with larger weights for farther users.

    Users sorted by distance descending are split into num_groups
    contiguous near-equal groups; the remainder goes to the farthest
    groups. Group l (1 = nearest) gets weight l / sum(1..num_groups).
    """
    k_users = len(positions)
    if k_users < num_groups:
        raise ValueError("need at least as many users as groups")
    order = sorted(range(k_users), key=lambda i: (-positions[i].distance_m, i))
    base = k_users // num_groups
    rem = k_users % num_groups
    total = num_groups * (num_groups + 1) // 2
    group_weights = np.array([l / total for l in range(1, num_groups + 1)])
    group_of = np.empty(k_users, dtype=np.int64)
    pos = 0
    # farthest-first fill: labels run num_groups..1
    for slot, label in enumerate(range(num_groups, 0, -1)):
        size = base + (1 if slot < rem else 0)
        for i in order[pos : pos + size]:
            group_of[i] = label
        pos += size
    weights = group_weights[group_of - 1]
    return UserWeights(weights=weights, group_of=group_of, group_weights=group_weights)


def greedy_per_subcarrier(gains_n, weights: UserWeights, lambdas, noise_power: float) -> SubcarrierAllocation:
    """Closed-form dominance structure of the utilities on one subcarrier."""
    gains_n = np.asarray(gains_n, dtype=np.float64)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    k_users = gains_n.size
    a = np.asarray(weights.weights, dtype=np.float64)
    b = lambdas / gains_n
    recv = np.empty(k_users)
    s_hi = np.empty(k_users)
    s_lo = np.empty(k_users)
    kernels.mac_envelope(a, b, 1.0 / noise_power, recv, s_hi, s_lo)
    transmit = recv / gains_n
    active = [k for k in range(k_users) if recv[k] > 0.0]
    active.sort(key=lambda k: (a[k], k))
    intervals = {
        k: (1.0 / s_hi[k] - noise_power, 1.0 / s_lo[k] - noise_power) for k in active
    }
    return SubcarrierAllocation(
        active_users=active,
        intervals=intervals,
        received_power=recv,
        transmit_power=transmit,
    )


def successive_decoding_rates(h, transmit_power, weights, noise_power: float) -> np.ndarray:
    """Per-user rates with interference from strictly higher-weight users."""
    k_users, n_sub = h.shape
    w = np.asarray(weights, dtype=np.float64)
    signal = transmit_power * h
    rates = np.zeros(k_users)
    for k in range(k_users):
        higher = w > w[k]
        interference = signal[higher].sum(axis=0)
        rates[k] = np.sum(np.log2(1.0 + signal[k] / (noise_power + interference)))
    return rates


def solve_mac(
    gains: ChannelGains,
    weights: UserWeights,
    max_power_w: float,
    tol: float = 1e-6,
    max_sweeps: int = 200,
    bisect_iters: int = 64,
    repair_sweeps: int = 50,
) -> MacResult:
    """Tune all multipliers until every user's consumed power meets its budget.

    Gauss-Seidel sweeps of per-user bisection; convergence when every
    consumed power is within tol of the budget (relative) or a user is
    power-starved at the multiplier floor. Same-group users can leapfrog
    each other's multiplier indefinitely on a discrete subcarrier grid
    (the underlying result assumes continuous frequency), in which case
    the result is flagged, never silent. A monotone repair phase raises
    the multipliers of over-budget users afterwards so the returned
    allocation is always power-feasible.
    """
    h = gains.gains
    noise = gains.noise_power_per_subcarrier
    k_users = h.shape[0]
    a = np.asarray(weights.weights, dtype=np.float64)
    lambdas = np.full(k_users, LAMBDA_FLOOR)
    consumed = np.zeros(k_users)
    converged = False
    sweeps = 0
    prev = lambdas.copy()
    for sweep in range(1, max_sweeps + 1):
        sweeps = sweep
        for k in range(k_users):
            kernels.mac_bisect(k, a, lambdas, h, noise, max_power_w, LAMBDA_FLOOR, bisect_iters)
        for k in range(k_users):
            consumed[k] = kernels.mac_consumed(k, a, lambdas, h, noise)
        ok = True
        for k in range(k_users):
            within = abs(consumed[k] - max_power_w) <= tol * max_power_w
            starved = lambdas[k] <= LAMBDA_FLOOR * 1.01 and consumed[k] <= max_power_w
            if not (within or starved):
                ok = False
                break
        if ok:
            converged = True
            break
        stalled = np.all(np.abs(lambdas - prev) <= 1e-12 * np.maximum(lambdas, LAMBDA_FLOOR))
        if stalled:
            break
        prev[:] = lambdas
    if not converged:
        # raising a multiplier only ever shrinks that user's own share, so
        # this phase is monotone and restores feasibility
        for _ in range(repair_sweeps):
            changed = False
            for k in range(k_users):
                consumed[k] = kernels.mac_consumed(k, a, lambdas, h, noise)
                if consumed[k] > max_power_w * (1.0 + tol):
                    kernels.mac_bisect(
                        k, a, lambdas, h, noise, max_power_w, lambdas[k], bisect_iters
                    )
                    changed = True
            if not changed:
                break
        for k in range(k_users):
            consumed[k] = kernels.mac_consumed(k, a, lambdas, h, noise)
    recv, s_hi, s_lo = kernels.mac_measures(a, lambdas, h, noise)
    transmit = recv / h
    over = transmit.sum(axis=1) > max_power_w * (1.0 + tol)
    if np.any(over):
        scale = np.ones(k_users)
        totals = transmit.sum(axis=1)
        scale[over] = max_power_w / totals[over]
        transmit = transmit * scale[:, None]
        recv = recv * scale[:, None]
    consumed = transmit.sum(axis=1)
    rates = successive_decoding_rates(h, transmit, a, noise)
    allocation = []
    for n in range(h.shape[1]):
        active = [k for k in range(k_users) if recv[k, n] > 0.0]
        active.sort(key=lambda k: (a[k], k))
        intervals = {
            k: (1.0 / s_hi[k, n] - noise, 1.0 / s_lo[k, n] - noise) for k in active
        }
        allocation.append(
            SubcarrierAllocation(
                active_users=active,
                intervals=intervals,
                received_power=recv[:, n],
                transmit_power=transmit[:, n],
            )
        )
    state = LagrangeState(
        lambdas=lambdas, consumed_power=consumed, converged=converged, sweeps=sweeps
    )
    return MacResult(
        transmit_power=transmit,
        received_power=recv,
        allocation=allocation,
        rates=rates,
        state=state,
    )
