"""Resource allocation for uplink multicarrier low-density-spreading access.

Subpackages cover scenario generation (channel), single-user power
allocation and subcarrier partitioning (singleuser, partitioning), the
relaxed multiple-access-channel reference allocator (mac), the multiuser
allocation algorithms and baselines (multiuser), and the Monte Carlo
harness and CLI (harness, cli).
"""

__version__ = "0.1.0"

from .config import ChannelGains, SystemConfig, UserPosition
from .channel import build_channel, drop_users, fading_profile, path_loss
from .partitioning import (
    Partition,
    count_lds_partitions,
    majorizes,
    partition_greedy,
    partition_lmv,
    partition_random,
)
from .singleuser import (
    SUPowerAllocation,
    mrt_split,
    mrt_wf,
    partition_bruteforce,
    rate_via_esp,
    schur_power_bound,
    symbol_rate,
    waterfill,
)
from .mac import UserWeights, greedy_per_subcarrier, group_users, solve_mac, utility
from .multiuser import (
    AllocationResult,
    mumrt,
    muwf,
    ofdma_baseline,
    static_baseline,
    weighted_sum_rate,
)
from .harness import ExperimentSpec, TrialMetrics, run_experiment, run_trial

__all__ = [
    "AllocationResult",
    "ChannelGains",
    "ExperimentSpec",
    "Partition",
    "SUPowerAllocation",
    "SystemConfig",
    "TrialMetrics",
    "UserPosition",
    "UserWeights",
    "build_channel",
    "count_lds_partitions",
    "drop_users",
    "fading_profile",
    "greedy_per_subcarrier",
    "group_users",
    "majorizes",
    "mrt_split",
    "mrt_wf",
    "mumrt",
    "muwf",
    "ofdma_baseline",
    "partition_bruteforce",
    "partition_greedy",
    "partition_lmv",
    "partition_random",
    "path_loss",
    "rate_via_esp",
    "run_experiment",
    "run_trial",
    "schur_power_bound",
    "solve_mac",
    "static_baseline",
    "symbol_rate",
    "utility",
    "waterfill",
    "weighted_sum_rate",
]
