import numpy as np
import pytest

from mimoiwf.netmodel import (
    ConfigError,
    NetworkConfig,
    pathloss_power_gain,
    sample_channels,
    symmetric_config,
    validate_config,
)


def small_config(**overrides):
    kwargs = dict(
        num_users=2,
        tx_antennas=(2, 2),
        rx_antennas=(2, 2),
        power_budget=(10.0, 10.0),
        noise_power=(1.0, 1.0),
        direct_distance=(15.0, 15.0),
        cross_distance=((15.0, 40.0), (40.0, 15.0)),
        pathloss_exponent=2.5,
    )
    kwargs.update(overrides)
    return NetworkConfig(**kwargs)


def test_validate_accepts_consistent_config():
    cfg = small_config()
    assert validate_config(cfg) is cfg


@pytest.mark.parametrize(
    "overrides, field",
    [
        (dict(num_users=0), "num_users"),
        (dict(tx_antennas=(2,)), "tx_antennas"),
        (dict(tx_antennas=(0, 2)), "tx_antennas"),
        (dict(rx_antennas=(2, -1)), "rx_antennas"),
        (dict(power_budget=(10.0, 0.0)), "power_budget"),
        (dict(power_budget=(10.0, float("inf"))), "power_budget"),
        (dict(noise_power=(0.0, 1.0)), "noise_power"),
        (dict(direct_distance=(15.0, -3.0)), "direct_distance"),
        (dict(cross_distance=((15.0, 40.0),)), "cross_distance"),
        (dict(cross_distance=((15.0, 0.0), (40.0, 15.0))), "cross_distance"),
        (dict(cross_distance=((14.0, 40.0), (40.0, 15.0))), "cross_distance"),
        (dict(pathloss_exponent=-2.5), "pathloss_exponent"),
    ],
)
def test_validate_rejects_and_names_field(overrides, field):
    with pytest.raises(ConfigError, match=field):
        validate_config(small_config(**overrides))


def test_symmetric_config_fills_diagonal():
    cfg = symmetric_config(3, 2, 2, 10.0, 1.0, 15.0, 40.0, 2.5)
    assert cfg.cross_distance[1][1] == 15.0
    assert cfg.cross_distance[0][2] == 40.0
    validate_config(cfg)


def test_pathloss_values():
    assert pathloss_power_gain(1.0, 2.5) == 1.0
    assert pathloss_power_gain(2.0, 3.0) == pytest.approx(0.125, rel=1e-12)
    assert pathloss_power_gain(15.0, 2.5) == pytest.approx(15.0**-2.5, rel=1e-12)
    assert pathloss_power_gain(15.0, 2.5) == pytest.approx(1.1476e-3, abs=1e-7)
    assert pathloss_power_gain(7.0, 0.0) == 1.0


@pytest.mark.parametrize("distance", [0.0, -1.0, float("nan")])
def test_pathloss_rejects_bad_distance(distance):
    with pytest.raises(ConfigError):
        pathloss_power_gain(distance, 2.5)


def test_pathloss_rejects_negative_exponent():
    with pytest.raises(ConfigError):
        pathloss_power_gain(10.0, -1.0)


def test_sample_shapes_and_immutability():
    cfg = NetworkConfig(
        num_users=2,
        tx_antennas=(3, 2),
        rx_antennas=(2, 4),
        power_budget=(10.0, 10.0),
        noise_power=(1.0, 1.0),
        direct_distance=(15.0, 15.0),
        cross_distance=((15.0, 40.0), (40.0, 15.0)),
        pathloss_exponent=2.5,
    )
    real = sample_channels(cfg, 3)
    for r in range(2):
        for q in range(2):
            h = real.matrices[r][q]
            assert h.shape == (cfg.rx_antennas[q], cfg.tx_antennas[r])
            assert h.dtype == complex
            with pytest.raises(ValueError):
                h[0, 0] = 0.0
    assert real.seed == 3


def test_sample_determinism():
    cfg = small_config()
    a = sample_channels(cfg, 11)
    b = sample_channels(cfg, 11)
    c = sample_channels(cfg, 12)
    for r in range(2):
        for q in range(2):
            np.testing.assert_array_equal(a.matrices[r][q], b.matrices[r][q])
    assert not np.array_equal(a.matrices[0][0], c.matrices[0][0])


def test_entry_statistics_unit_distance():
    # one big draw gives 1e5 entries; tolerances are four standard errors
    cfg = symmetric_config(1, 250, 400, 10.0, 1.0, 1.0, 1.0, 2.5)
    h = sample_channels(cfg, 2024).matrices[0][0]
    n = h.size
    assert n == 100_000
    power = np.abs(h) ** 2
    se_power = 1.0 / np.sqrt(n)  # |h|^2 is exponential with unit mean and std
    assert abs(power.mean() - 1.0) < 4 * se_power
    se_part = np.sqrt(0.5) / np.sqrt(n)
    assert abs(h.real.mean()) < 4 * se_part
    assert abs(h.imag.mean()) < 4 * se_part
    # circular symmetry splits power evenly between parts
    assert abs((h.real**2).mean() - 0.5) < 4 * np.sqrt(0.5) / np.sqrt(n)


def test_entry_statistics_attenuated():
    cfg = symmetric_config(1, 250, 400, 10.0, 1.0, 15.0, 15.0, 2.5)
    h = sample_channels(cfg, 77).matrices[0][0]
    mean_gain = float((np.abs(h) ** 2).mean())
    assert mean_gain == pytest.approx(15.0**-2.5, rel=0.02)
