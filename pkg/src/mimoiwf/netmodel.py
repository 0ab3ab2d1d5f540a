"""Network description and random channel generation for MIMO interference links.

A network is a set of transmit-receive pairs that interfere with each other.
Channel matrices are drawn as circularly symmetric complex Gaussian entries
with a distance-based power-law attenuation applied per link.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConfigError(ValueError):
    """Raised when a network description is inconsistent or out of range."""


@dataclass(frozen=True)
class NetworkConfig:
    """Static description of an interference network.

    Attributes:
        num_users: number of transmit-receive pairs.
        tx_antennas: transmit antenna count per user.
        rx_antennas: receive antenna count per user.
        power_budget: per-user total transmit power (linear scale).
        noise_power: per-user receiver noise power (linear scale).
        direct_distance: distance of each user's own link.
        cross_distance: cross_distance[r][q] is the distance from
            transmitter r to receiver q; the diagonal repeats
            direct_distance by convention.
        pathloss_exponent: exponent of the power-law attenuation.
    """

    num_users: int
    tx_antennas: tuple[int, ...]
    rx_antennas: tuple[int, ...]
    power_budget: tuple[float, ...]
    noise_power: tuple[float, ...]
    direct_distance: tuple[float, ...]
    cross_distance: tuple[tuple[float, ...], ...]
    pathloss_exponent: float


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of all channel matrices.

    matrices[r][q] has shape (rx_antennas[q], tx_antennas[r]) and maps the
    signal of transmitter r into receiver q. Arrays are read-only.
    """

    matrices: tuple[tuple[np.ndarray, ...], ...]
    seed: int


def validate_config(config: NetworkConfig) -> NetworkConfig:
    """Check a NetworkConfig for consistency and return it unchanged.

    Raises:
        ConfigError: naming the offending field.
    """
    q_count = config.num_users
    if not isinstance(q_count, int) or q_count < 1:
        raise ConfigError(f"num_users must be a positive integer, got {q_count!r}")

    per_user = {
        "tx_antennas": config.tx_antennas,
        "rx_antennas": config.rx_antennas,
        "power_budget": config.power_budget,
        "noise_power": config.noise_power,
        "direct_distance": config.direct_distance,
    }
    for name, values in per_user.items():
        if len(values) != q_count:
            raise ConfigError(f"{name} must have length {q_count}, got {len(values)}")

    for name in ("tx_antennas", "rx_antennas"):
        for k, v in enumerate(getattr(config, name)):
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name}[{k}] must be a positive integer, got {v!r}")

    for name in ("power_budget", "noise_power", "direct_distance"):
        for k, v in enumerate(getattr(config, name)):
            if not np.isfinite(v) or v <= 0:
                raise ConfigError(f"{name}[{k}] must be positive and finite, got {v!r}")

    cross = config.cross_distance
    if len(cross) != q_count:
        raise ConfigError(f"cross_distance must have {q_count} rows, got {len(cross)}")
    for r, row in enumerate(cross):
        if len(row) != q_count:
            raise ConfigError(f"cross_distance[{r}] must have length {q_count}")
        for q, d in enumerate(row):
            if not np.isfinite(d) or d <= 0:
                raise ConfigError(f"cross_distance[{r}][{q}] must be positive and finite")
        if row[r] != config.direct_distance[r]:
            raise ConfigError(
                f"cross_distance[{r}][{r}] must equal direct_distance[{r}] "
                f"({row[r]!r} != {config.direct_distance[r]!r})"
            )

    if not np.isfinite(config.pathloss_exponent) or config.pathloss_exponent < 0:
        raise ConfigError(
            f"pathloss_exponent must be nonnegative, got {config.pathloss_exponent!r}"
        )
    return config


def symmetric_config(
    num_users: int,
    tx_antennas: int,
    rx_antennas: int,
    power_budget: float,
    noise_power: float,
    direct_distance: float,
    cross_distance: float,
    pathloss_exponent: float,
) -> NetworkConfig:
    """Build a config where every user shares the same scalar parameters."""
    cross = tuple(
        tuple(direct_distance if r == q else cross_distance for q in range(num_users))
        for r in range(num_users)
    )
    cfg = NetworkConfig(
        num_users=num_users,
        tx_antennas=(tx_antennas,) * num_users,
        rx_antennas=(rx_antennas,) * num_users,
        power_budget=(float(power_budget),) * num_users,
        noise_power=(float(noise_power),) * num_users,
        direct_distance=(float(direct_distance),) * num_users,
        cross_distance=cross,
        pathloss_exponent=float(pathloss_exponent),
    )
    return validate_config(cfg)


def pathloss_power_gain(distance: float, exponent: float) -> float:
    """Power attenuation distance**-exponent of a link.

    Raises:
        ConfigError: if distance is not strictly positive or exponent negative.
    """
    if not np.isfinite(distance) or distance <= 0:
        raise ConfigError(f"distance must be positive and finite, got {distance!r}")
    if not np.isfinite(exponent) or exponent < 0:
        raise ConfigError(f"exponent must be nonnegative, got {exponent!r}")
    return float(distance) ** -float(exponent)


def sample_channels(config: NetworkConfig, seed: int) -> ChannelRealization:
    """Draw one realization of every channel matrix.

    Entries are complex Gaussian with unit power (real and imaginary parts
    each have variance 1/2) scaled by the amplitude attenuation
    distance**(-exponent/2) of the link. The stream order is fixed:
    transmitter-major, receiver-minor, entries row-major with the real part
    drawn before the imaginary part, so a given seed always produces the
    same matrices.
    """
    validate_config(config)
    rng = np.random.default_rng(seed)
    gamma = config.pathloss_exponent
    rows: list[tuple[np.ndarray, ...]] = []
    for r in range(config.num_users):
        row: list[np.ndarray] = []
        for q in range(config.num_users):
            shape = (config.rx_antennas[q], config.tx_antennas[r])
            z = rng.standard_normal(shape + (2,))
            amp = np.sqrt(pathloss_power_gain(config.cross_distance[r][q], gamma))
            h = (z[..., 0] + 1j * z[..., 1]) * (amp / np.sqrt(2.0))
            h.setflags(write=False)
            row.append(h)
        rows.append(tuple(row))
    return ChannelRealization(matrices=tuple(rows), seed=int(seed))
