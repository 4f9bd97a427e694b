"""Monte Carlo experiment runner.

A trial draws one scenario (positions + channel) from a per-trial seed
derived from the master seed, runs the selected allocator and reduces the
outcome to spectral efficiency (sum of all delivered bits per subcarrier
use divided by the subcarrier count, i.e. bits/s/Hz) and the outage
fraction (users with zero rate over total users). Trials are independent
and keyed by index, so partial runs merge deterministically.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import multiuser
from .channel import build_channel, drop_users
from .config import SystemConfig, derive_trial_seed
from .mac import group_users, solve_mac

ALGORITHMS = ("mumrt", "muwf", "static", "ofdma", "macref")
ZERO_RATE_EPS = 1e-9


@dataclass
class TrialMetrics:
    spectral_efficiency: float
    outage_fraction: float
    per_user_rates: np.ndarray
    algorithm: str
    criterion: str | None
    trial_index: int
    trial_seed: int
    weighted_sum_rate: float
    iterations: int
    valid: bool


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a base config, the swept parameter and its values."""

    base: SystemConfig
    parameter: str               # K, d_c, d_v, algorithm or criterion
    values: tuple
    trials: int
    algorithm: str = "mumrt"
    criterion: str | None = "sa1"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.parameter not in ("K", "d_c", "d_v", "algorithm", "criterion"):
            raise ValueError("unknown sweep parameter")
        if not self.values:
            raise ValueError("sweep values must be non-empty")


@dataclass
class PointSummary:
    parameter: str
    value: object
    algorithm: str
    criterion: str | None
    n_trials: int
    n_invalid: int
    mean_se: float
    ci95_se: float | None
    mean_outage: float
    ci95_outage: float | None


def _metrics_from_rates(rates: np.ndarray, n_sub: int) -> tuple[float, float]:
    se = float(rates.sum() / n_sub)
    outage = float(np.count_nonzero(rates < ZERO_RATE_EPS) / rates.size)
    return se, outage


def run_trial(
    config: SystemConfig,
    algorithm: str,
    criterion: str | None,
    trial_index: int,
    fading_profile=None,
) -> TrialMetrics:
    """Run one allocation on a freshly drawn scenario."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    trial_seed = derive_trial_seed(config.rng_seed, trial_index)
    trial_cfg = dataclasses.replace(config, rng_seed=trial_seed)
    positions = drop_users(trial_cfg)
    gains = build_channel(trial_cfg, profile=fading_profile, positions=positions)
    power = trial_cfg.max_power_w
    iterations = 0
    weighted = 0.0
    valid = True
    if algorithm == "static":
        result = multiuser.static_baseline(gains, power, trial_cfg.spreading)
        rates = result.rates
        iterations = result.iterations
        weighted = result.weighted_sum_rate
    elif algorithm == "macref":
        weights = group_users(positions, trial_cfg.loading)
        res = solve_mac(gains, weights, power)
        rates = res.rates
        weighted = float(np.dot(weights.weights, rates))
        iterations = res.state.sweeps
        valid = res.converged
    else:
        weights = group_users(positions, trial_cfg.loading)
        if algorithm == "mumrt":
            result = multiuser.mumrt(
                gains, weights, power, trial_cfg.loading, trial_cfg.spreading, criterion or "sa1"
            )
        elif algorithm == "muwf":
            result = multiuser.muwf(
                gains, weights, power, trial_cfg.loading, trial_cfg.spreading, criterion or "sa1"
            )
        else:
            result = multiuser.ofdma_baseline(gains, weights, power)
        rates = result.rates
        iterations = result.iterations
        weighted = result.weighted_sum_rate
    se, outage = _metrics_from_rates(rates, trial_cfg.num_subcarriers)
    return TrialMetrics(
        spectral_efficiency=se,
        outage_fraction=outage,
        per_user_rates=rates,
        algorithm=algorithm,
        criterion=criterion if algorithm in ("mumrt", "muwf") else None,
        trial_index=trial_index,
        trial_seed=trial_seed,
        weighted_sum_rate=weighted,
        iterations=iterations,
        valid=valid,
    )


def _apply_point(spec: ExperimentSpec, value):
    config = spec.base
    algorithm = spec.algorithm
    criterion = spec.criterion
    if spec.parameter == "K":
        config = dataclasses.replace(config, num_users=int(value))
    elif spec.parameter == "d_c":
        config = dataclasses.replace(config, loading=int(value))
    elif spec.parameter == "d_v":
        config = dataclasses.replace(config, spreading=int(value))
    elif spec.parameter == "algorithm":
        algorithm = str(value)
    elif spec.parameter == "criterion":
        criterion = str(value)
    return config, algorithm, criterion


def mean_ci95(values: np.ndarray) -> tuple[float, float | None]:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, None
    half = 1.96 * float(np.std(values, ddof=1)) / math.sqrt(values.size)
    return mean, half


def run_experiment(spec: ExperimentSpec, fading_profile=None):
    """Run all sweep points; returns (summaries, trials per point)."""
    summaries = []
    all_trials = {}
    for value in spec.values:
        config, algorithm, criterion = _apply_point(spec, value)
        trials = [
            run_trial(config, algorithm, criterion, t, fading_profile=fading_profile)
            for t in range(spec.trials)
        ]
        all_trials[value] = trials
        valid = [t for t in trials if t.valid]
        n_invalid = len(trials) - len(valid)
        se = np.array([t.spectral_efficiency for t in valid])
        outage = np.array([t.outage_fraction for t in valid])
        mean_se, ci_se = mean_ci95(se) if valid else (float("nan"), None)
        mean_out, ci_out = mean_ci95(outage) if valid else (float("nan"), None)
        summaries.append(
            PointSummary(
                parameter=spec.parameter,
                value=value,
                algorithm=algorithm,
                criterion=criterion if algorithm in ("mumrt", "muwf") else None,
                n_trials=len(valid),
                n_invalid=n_invalid,
                mean_se=mean_se,
                ci95_se=ci_se,
                mean_outage=mean_out,
                ci95_outage=ci_out,
            )
        )
    return summaries, all_trials
