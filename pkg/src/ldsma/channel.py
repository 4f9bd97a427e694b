"""Scenario generation: user drop, path loss and frequency-selective fading.

The cell is a regular hexagon given by its inradius, users are uniform over
the cell area with a minimum-distance exclusion around the base station.
The link gain is path loss times the squared magnitude of a tapped-delay-
line frequency response evaluated at the subcarrier centers (ITU
pedestrian B power-delay profile by default, block-static per drop).
"""

import math

import numpy as np

from .config import (
    ChannelGains,
    STREAM_FADING,
    STREAM_POSITION,
    SystemConfig,
    UserPosition,
    substream,
)

SPEED_OF_LIGHT = 299792458.0
CARRIER_FREQ_HZ = 2e9
PATHLOSS_REF_DISTANCE_M = 100.0
PATHLOSS_EXPONENT = 3.5
MIN_USER_DISTANCE_M = 35.0

# ITU pedestrian B tapped-delay-line profile (delays in seconds, relative
# tap powers in dB); tap powers are renormalized to unit total.
PED_B_DELAYS_S = np.array([0.0, 200e-9, 800e-9, 1200e-9, 2300e-9, 3700e-9])
PED_B_POWERS_DB = np.array([0.0, -0.9, -4.9, -8.0, -7.8, -23.9])

# free-space power gain at the reference distance
PATHLOSS_REF_GAIN = (
    SPEED_OF_LIGHT / (4.0 * math.pi * CARRIER_FREQ_HZ * PATHLOSS_REF_DISTANCE_M)
) ** 2

_HEX_NORMALS = np.array([0.0, math.pi / 3.0, 2.0 * math.pi / 3.0])


def in_hexagon(x: float, y: float, inradius_m: float) -> bool:
    """Point-in-cell test for the regular hexagon centered at the origin."""
    for theta in _HEX_NORMALS:
        if abs(x * math.cos(theta) + y * math.sin(theta)) > inradius_m:
            return False
    return True


def hexagon_area(inradius_m: float) -> float:
    return 2.0 * math.sqrt(3.0) * inradius_m**2


def path_loss(distance_m) -> float:
    """Simplified distance power law K0 * (d0/d)^gamma (linear gain)."""
    d = np.asarray(distance_m, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("distance must be > 0")
    gain = PATHLOSS_REF_GAIN * (PATHLOSS_REF_DISTANCE_M / d) ** PATHLOSS_EXPONENT
    return float(gain) if np.isscalar(distance_m) else gain


def drop_users(config: SystemConfig) -> list[UserPosition]:
    """Drop num_users positions uniformly over the hexagonal cell.

    Positions closer than MIN_USER_DISTANCE_M to the base station are
    redrawn. Each user has its own RNG substream, so the draw of user k is
    independent of the total user count.
    """
    a = config.cell_inradius_m
    circum = 2.0 * a / math.sqrt(3.0)
    positions = []
    for k in range(config.num_users):
        rng = substream(config.rng_seed, STREAM_POSITION, k)
        while True:
            x = rng.uniform(-circum, circum)
            y = rng.uniform(-circum, circum)
            r = math.hypot(x, y)
            if r >= MIN_USER_DISTANCE_M and in_hexagon(x, y, a):
                break
        positions.append(UserPosition(user_id=k, distance_m=r, angle_rad=math.atan2(y, x)))
    return positions


def subcarrier_frequencies(config: SystemConfig) -> np.ndarray:
    """Baseband subcarrier center frequencies: N points spaced W/N, spanning W."""
    n = config.num_subcarriers
    spacing = config.subcarrier_spacing_hz
    return (np.arange(n) - (n - 1) / 2.0) * spacing


def fading_profile(config: SystemConfig, user_id: int, profile=None) -> np.ndarray:
    """Complex frequency response of one user's tapped-delay-line channel.

    profile optionally overrides the (delays_s, powers_db) pair; a single
    tap at delay zero yields a flat response. Deterministic given
    (rng_seed, user_id).
    """
    if profile is None:
        delays, powers_db = PED_B_DELAYS_S, PED_B_POWERS_DB
    else:
        delays, powers_db = profile
        delays = np.asarray(delays, dtype=np.float64)
        powers_db = np.asarray(powers_db, dtype=np.float64)
    powers = 10.0 ** (powers_db / 10.0)
    powers = powers / powers.sum()
    rng = substream(config.rng_seed, STREAM_FADING, user_id)
    taps = (rng.standard_normal(len(delays)) + 1j * rng.standard_normal(len(delays)))
    taps = taps * np.sqrt(powers / 2.0)
    freqs = subcarrier_frequencies(config)
    phase = np.exp(-2j * np.pi * np.outer(freqs, delays))
    return phase @ taps


def build_channel(config: SystemConfig, profile=None, positions=None) -> ChannelGains:
    """Compose path loss and fading into per-user per-subcarrier gains."""
    if positions is None:
        positions = drop_users(config)
    k_users = config.num_users
    n_sub = config.num_subcarriers
    h = np.empty((k_users, n_sub))
    for pos in positions:
        response = fading_profile(config, pos.user_id, profile=profile)
        h[pos.user_id] = path_loss(pos.distance_m) * np.abs(response) ** 2
    return ChannelGains(
        gains=h,
        noise_power_per_subcarrier=config.noise_power_per_subcarrier_w,
    )
