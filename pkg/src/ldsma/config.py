"""System configuration and channel containers."""

from dataclasses import dataclass, field

import numpy as np


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * np.log10(watt) + 30.0


@dataclass(frozen=True)
class SystemConfig:
    """Single-cell uplink scenario parameters.

    Powers are dBm, the noise is a power spectral density in dBm/Hz, and
    the per-user maximum transmit power is uniform across users. loading
    is the maximum number of users per subcarrier, spreading the number of
    subcarriers carrying each modulated symbol.
    """

    num_users: int = 30
    num_subcarriers: int = 30
    bandwidth_hz: float = 5e6
    max_power_dbm: float = 23.0
    noise_psd_dbm_hz: float = -173.0
    cell_inradius_m: float = 1000.0
    loading: int = 6
    spreading: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.num_subcarriers < 1:
            raise ValueError("num_subcarriers must be >= 1")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")
        if self.loading < 1:
            raise ValueError("loading must be >= 1")
        if self.spreading < 1:
            raise ValueError("spreading must be >= 1")
        if self.spreading > self.num_subcarriers:
            raise ValueError("spreading must not exceed num_subcarriers")
        if self.cell_inradius_m <= 0:
            raise ValueError("cell_inradius_m must be > 0")

    @property
    def max_power_w(self) -> float:
        return dbm_to_watt(self.max_power_dbm)

    @property
    def noise_power_per_subcarrier_w(self) -> float:
        """sigma^2 * W / N in watts."""
        psd_w_hz = dbm_to_watt(self.noise_psd_dbm_hz)
        return psd_w_hz * self.bandwidth_hz / self.num_subcarriers

    @property
    def subcarrier_spacing_hz(self) -> float:
        return self.bandwidth_hz / self.num_subcarriers


@dataclass(frozen=True)
class UserPosition:
    user_id: int
    distance_m: float
    angle_rad: float


@dataclass
class ChannelGains:
    """Per-user per-subcarrier linear power gains and their normalization.

    normalized_gains[k, n] = gains[k, n] / noise_power_per_subcarrier.
    Treated as immutable after construction; safe to share across trials.
    """

    gains: np.ndarray
    noise_power_per_subcarrier: float
    normalized_gains: np.ndarray = field(default=None)

    def __post_init__(self):
        self.gains = np.asarray(self.gains, dtype=np.float64)
        if self.normalized_gains is None:
            self.normalized_gains = self.gains / self.noise_power_per_subcarrier
        else:
            self.normalized_gains = np.asarray(self.normalized_gains, dtype=np.float64)
        self.validate()

    @property
    def num_users(self) -> int:
        return self.gains.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.gains.shape[1]

    def validate(self):
        if self.gains.ndim != 2:
            raise ValueError("gains must be a (K, N) matrix")
        if not np.all(np.isfinite(self.gains)) or np.any(self.gains <= 0):
            raise ValueError("all channel gains must be strictly positive and finite")
        if self.noise_power_per_subcarrier <= 0:
            raise ValueError("noise power must be strictly positive")
        recon = self.normalized_gains * self.noise_power_per_subcarrier
        if not np.allclose(recon, self.gains, rtol=1e-12, atol=0.0):
            raise ValueError("normalized gains inconsistent with gains and noise power")


# RNG substream purposes. Independent generators are derived from the
# master seed as default_rng(SeedSequence(seed, spawn_key=(purpose, index)))
# so that e.g. adding users never perturbs the draws of existing ones.
STREAM_POSITION = 0
STREAM_FADING = 1
STREAM_TRIAL = 2
STREAM_GAINS = 3


def substream(seed: int, purpose: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(purpose, index)))


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(STREAM_TRIAL, trial_index))
    return int(ss.generate_state(1, np.uint64)[0])
