"""Singular-value precoding and the resulting effective interference network.

Each direct link is diagonalized by its SVD; transmitters precode with the
right singular basis and receivers project onto the left one. Cross links
seen through those bases couple the users' per-stream powers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import ChannelRealization, NetworkConfig, validate_config

# Singular values at or below this are treated as a rank loss.
SINGULAR_FLOOR = 1e-12


class SvdError(RuntimeError):
    """Raised when the SVD routine fails to converge numerically."""


class DegenerateChannelError(ValueError):
    """Raised when a direct channel has a vanishing singular value."""


@dataclass(frozen=True)
class LinkSVD:
    """Factorization H = U @ diag(singular_values) @ V^H (rectangular diag).

    U has shape (rx, rx), V has shape (tx, tx), singular_values is sorted
    in descending order with length min(rx, tx).
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class EffectiveNetwork:
    """Interference network expressed in the per-user singular bases.

    Attributes:
        config: the validated network description.
        svd: per-user LinkSVD of the direct channel.
        cross_gain: maps (r, q) with r != q to the matrix of squared
            magnitudes of the rotated cross channel U_q^H H_rq V_r,
            truncated to the first len(svd[q].singular_values) rows.
        sigma_sq: per-user squared singular values of the direct link.
        noise_floor: per-user noise_power / sigma_sq.
        coupling: cross_gain entries divided by the receiving stream's
            squared singular value; the linear map from interferer powers
            to normalized interference.
        stacked_coupling: per-user matrix of shape (streams, total tx
            antennas) concatenating coupling blocks over all transmitters
            with zeros in the user's own block.
    """

    config: NetworkConfig
    svd: tuple[LinkSVD, ...]
    cross_gain: dict[tuple[int, int], np.ndarray]
    sigma_sq: tuple[np.ndarray, ...]
    noise_floor: tuple[np.ndarray, ...]
    coupling: dict[tuple[int, int], np.ndarray]
    stacked_coupling: tuple[np.ndarray, ...]

    def num_streams(self, q: int) -> int:
        """Number of usable parallel streams of user q."""
        return int(self.svd[q].singular_values.size)


def svd_decompose(channel: np.ndarray) -> LinkSVD:
    """SVD of a single channel matrix with descending singular values.

    Raises:
        SvdError: if the underlying routine fails to converge.
        ValueError: on empty or non-2D input.
    """
    h = np.asarray(channel)
    if h.ndim != 2 or h.size == 0:
        raise ValueError(f"channel must be a non-empty 2-D matrix, got shape {h.shape}")
    try:
        u, s, vh = np.linalg.svd(h, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise SvdError(f"SVD failed to converge for a {h.shape} channel") from exc
    return LinkSVD(U=u, singular_values=s, V=vh.conj().T)


def build_effective_network(
    realization: ChannelRealization, config: NetworkConfig
) -> EffectiveNetwork:
    """Rotate a channel realization into the per-user singular bases.

    Raises:
        DegenerateChannelError: when some direct channel is rank deficient,
            so the realization should be redrawn.
    """
    validate_config(config)
    n_users = config.num_users
    svds = []
    for q in range(n_users):
        link = svd_decompose(realization.matrices[q][q])
        if link.singular_values.min() <= SINGULAR_FLOOR:
            raise DegenerateChannelError(
                f"direct channel of user {q} has a singular value at or below "
                f"{SINGULAR_FLOOR:g}"
            )
        svds.append(link)

    sigma_sq = tuple(link.singular_values**2 for link in svds)
    noise_floor = tuple(
        config.noise_power[q] / sigma_sq[q] for q in range(n_users)
    )
    for q in range(n_users):
        if not np.all(np.isfinite(noise_floor[q])):
            raise DegenerateChannelError(f"noise floor of user {q} is not finite")

    cross_gain: dict[tuple[int, int], np.ndarray] = {}
    coupling: dict[tuple[int, int], np.ndarray] = {}
    for q in range(n_users):
        streams = svds[q].singular_values.size
        u_h = svds[q].U.conj().T[:streams, :]
        for r in range(n_users):
            if r == q:
                continue
            rotated = u_h @ realization.matrices[r][q] @ svds[r].V
            gain = np.abs(rotated) ** 2
            gain.setflags(write=False)
            cross_gain[(r, q)] = gain
            norm = gain / sigma_sq[q][:, None]
            norm.setflags(write=False)
            coupling[(r, q)] = norm

    offsets = np.concatenate(([0], np.cumsum(config.tx_antennas)))
    total_tx = int(offsets[-1])
    stacked = []
    for q in range(n_users):
        streams = svds[q].singular_values.size
        block = np.zeros((streams, total_tx))
        for r in range(n_users):
            if r == q:
                continue
            block[:, offsets[r] : offsets[r + 1]] = coupling[(r, q)]
        block.setflags(write=False)
        stacked.append(block)

    return EffectiveNetwork(
        config=config,
        svd=tuple(svds),
        cross_gain=cross_gain,
        sigma_sq=sigma_sq,
        noise_floor=noise_floor,
        coupling=coupling,
        stacked_coupling=tuple(stacked),
    )
