import numpy as np
import pytest

from mimoiwf.netmodel import sample_channels, symmetric_config
from mimoiwf.precode import (
    DegenerateChannelError,
    build_effective_network,
    svd_decompose,
)

from oracles import brute_force_cross_gain, explicit_net


def test_svd_identity():
    link = svd_decompose(np.eye(2))
    np.testing.assert_allclose(link.singular_values, [1.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(link.U @ link.U.conj().T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(link.V @ link.V.conj().T, np.eye(2), atol=1e-12)


def test_svd_antidiagonal_orders_descending():
    link = svd_decompose(np.array([[0.0, 2.0], [1.0, 0.0]]))
    np.testing.assert_allclose(link.singular_values, [2.0, 1.0], atol=1e-14)


@pytest.mark.parametrize("shape", [(1, 1), (2, 2), (2, 3), (3, 2), (4, 4)])
def test_svd_reconstruction_random(shape):
    rng = np.random.default_rng(hash(shape) % 2**32)
    for _ in range(20):
        h = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        link = svd_decompose(h)
        m, n = shape
        sig = np.zeros((m, n))
        k = min(m, n)
        sig[:k, :k] = np.diag(link.singular_values)
        np.testing.assert_allclose(link.U @ sig @ link.V.conj().T, h, atol=1e-10)
        np.testing.assert_allclose(link.U.conj().T @ link.U, np.eye(m), atol=1e-10)
        np.testing.assert_allclose(link.V.conj().T @ link.V, np.eye(n), atol=1e-10)
        assert np.all(np.diff(link.singular_values) <= 0)
        assert link.singular_values.size == k


def test_svd_rejects_bad_input():
    with pytest.raises(ValueError):
        svd_decompose(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        svd_decompose(np.zeros(3))


def test_single_user_network_has_no_cross_terms():
    net = explicit_net([np.diag([3.0, 1.0])], {}, [10.0], [1.0])
    assert net.cross_gain == {}
    np.testing.assert_allclose(net.sigma_sq[0], [9.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(net.noise_floor[0], [1.0 / 9.0, 1.0], atol=1e-12)


def test_degenerate_direct_channel_rejected():
    with pytest.raises(DegenerateChannelError, match="user 0"):
        explicit_net([np.array([[1.0, 0.0], [0.0, 0.0]])], {}, [10.0], [1.0])


def test_cross_gain_matches_brute_force():
    cfg = symmetric_config(3, 3, 2, 10.0, 1.0, 15.0, 30.0, 2.5)
    real = sample_channels(cfg, 5)
    net = build_effective_network(real, cfg)
    for (r, q), gain in net.cross_gain.items():
        streams = net.num_streams(q)
        expected = brute_force_cross_gain(
            real.matrices[r][q], net.svd[q].U, net.svd[r].V, streams
        )
        assert gain.shape == (streams, cfg.tx_antennas[r])
        np.testing.assert_allclose(gain, expected, atol=1e-12)


def test_cross_gain_energy_bounded_by_frobenius():
    cfg = symmetric_config(2, 4, 2, 10.0, 1.0, 15.0, 25.0, 2.5)
    real = sample_channels(cfg, 9)
    net = build_effective_network(real, cfg)
    for (r, q), gain in net.cross_gain.items():
        frob = float(np.sum(np.abs(real.matrices[r][q]) ** 2))
        assert gain.sum() <= frob + 1e-9
    # full receive basis keeps the energy exactly
    cfg2 = symmetric_config(2, 2, 2, 10.0, 1.0, 15.0, 25.0, 2.5)
    real2 = sample_channels(cfg2, 9)
    net2 = build_effective_network(real2, cfg2)
    for (r, q), gain in net2.cross_gain.items():
        frob = float(np.sum(np.abs(real2.matrices[r][q]) ** 2))
        assert gain.sum() == pytest.approx(frob, rel=1e-10)


def test_gains_invariant_under_basis_phases():
    # per-column phase rotations of both unitaries leave |U^H H V|^2 alone
    cfg = symmetric_config(2, 2, 2, 10.0, 1.0, 15.0, 25.0, 2.5)
    real = sample_channels(cfg, 21)
    net = build_effective_network(real, cfg)
    rng = np.random.default_rng(4)
    for (r, q), gain in net.cross_gain.items():
        u = net.svd[q].U * np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
        v = net.svd[r].V * np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
        rotated = np.abs(u.conj().T @ real.matrices[r][q] @ v) ** 2
        np.testing.assert_allclose(rotated, gain, atol=1e-12)


def test_coupling_normalization_and_stacking():
    cfg = symmetric_config(3, 2, 2, 10.0, 2.0, 15.0, 30.0, 2.5)
    net = build_effective_network(sample_channels(cfg, 13), cfg)
    offsets = [0, 2, 4, 6]
    for q in range(3):
        np.testing.assert_allclose(
            net.noise_floor[q], 2.0 / net.sigma_sq[q], atol=1e-15
        )
        block = net.stacked_coupling[q]
        assert block.shape == (2, 6)
        np.testing.assert_array_equal(block[:, offsets[q] : offsets[q] + 2], 0.0)
        for r in range(3):
            if r == q:
                continue
            np.testing.assert_allclose(
                block[:, offsets[r] : offsets[r] + 2],
                net.cross_gain[(r, q)] / net.sigma_sq[q][:, None],
                atol=1e-15,
            )


def test_more_tx_than_rx_truncates_streams():
    cfg = symmetric_config(2, 4, 2, 10.0, 1.0, 15.0, 25.0, 2.5)
    net = build_effective_network(sample_channels(cfg, 31), cfg)
    assert net.num_streams(0) == 2
    assert net.cross_gain[(1, 0)].shape == (2, 4)
