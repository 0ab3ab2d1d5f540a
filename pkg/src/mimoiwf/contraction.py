"""Uniqueness certificates for the water-filling game.

The coupling of all users' powers is collected into one square nonnegative
matrix; norms or the spectral radius of that matrix below one certify that
the simultaneous water-filling responses form a contraction, hence a unique
equilibrium reached from any starting point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .precode import EffectiveNetwork

SPECTRAL_TOL = 1e-9
MAX_POWER_ITER = 10_000


class PowerIterationError(RuntimeError):
    """Raised when the spectral radius bounds fail to tighten in time."""


@dataclass(frozen=True)
class InterferenceMatrix:
    """Square nonnegative coupling matrix of the whole network.

    Row block q stacks user q's streams, padded with zero rows up to
    tx_antennas[q] when the user has fewer streams than antennas; column
    block r spans transmitter r's antennas. The diagonal blocks are zero.
    """

    matrix: np.ndarray
    block_start: tuple[int, ...]
    num_streams: tuple[int, ...]
    tx_antennas: tuple[int, ...]

    def row_index(self, q: int, i: int) -> int:
        """Flat row of stream i of user q."""
        return self.block_start[q] + i

    def col_index(self, r: int, j: int) -> int:
        """Flat column of antenna j of transmitter r."""
        return self.block_start[r] + j


@dataclass(frozen=True)
class UniquenessCertificate:
    """Contraction diagnostics of one network realization.

    norm_unique certifies a unique equilibrium via the row or column norm;
    spectral_unique is the weaker spectral-radius test. strict_row_value
    and strict_col_value sum per-antenna-slot maxima, which upper-bounds
    the corresponding norm, so strict_row_cond implies row_norm < 1.
    contraction_modulus is min(row_norm, col_norm) when that is below one.
    """

    row_norm: float
    col_norm: float
    spectral_radius: float
    strict_row_value: float
    strict_col_value: float
    strict_row_cond: bool
    strict_col_cond: bool
    norm_unique: bool
    spectral_unique: bool
    contraction_modulus: float | None


def build_interference_matrix(net: EffectiveNetwork) -> InterferenceMatrix:
    """Assemble the stacked coupling matrix of an effective network."""
    tx = net.config.tx_antennas
    offsets = np.concatenate(([0], np.cumsum(tx)))
    total = int(offsets[-1])
    m = np.zeros((total, total))
    for q in range(net.config.num_users):
        streams = net.num_streams(q)
        rows = slice(offsets[q], offsets[q] + streams)
        m[rows, :] = net.stacked_coupling[q]
    return InterferenceMatrix(
        matrix=m,
        block_start=tuple(int(o) for o in offsets[:-1]),
        num_streams=tuple(net.num_streams(q) for q in range(net.config.num_users)),
        tx_antennas=tuple(tx),
    )


def _as_square_nonneg(matrix: np.ndarray | InterferenceMatrix) -> np.ndarray:
    m = matrix.matrix if isinstance(matrix, InterferenceMatrix) else np.asarray(matrix, float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if m.size and (not np.all(np.isfinite(m)) or np.any(m < 0)):
        raise ValueError("matrix must be nonnegative and finite")
    return m


def max_row_sum(matrix: np.ndarray | InterferenceMatrix) -> float:
    """Infinity norm: largest row sum."""
    m = _as_square_nonneg(matrix)
    return float(m.sum(axis=1).max()) if m.size else 0.0


def max_col_sum(matrix: np.ndarray | InterferenceMatrix) -> float:
    """Largest column sum (infinity norm of the transpose)."""
    m = _as_square_nonneg(matrix)
    return float(m.sum(axis=0).max()) if m.size else 0.0


def weighted_max_norm(matrix: np.ndarray | InterferenceMatrix, weights: np.ndarray) -> float:
    """max_i (1/w_i) * sum_j M_ij * w_j for a positive weight vector."""
    m = _as_square_nonneg(matrix)
    w = np.asarray(weights, dtype=float)
    if w.shape != (m.shape[0],):
        raise ValueError(f"weights must have shape ({m.shape[0]},), got {w.shape}")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be strictly positive and finite")
    if m.size == 0:
        return 0.0
    return float(((m @ w) / w).max())


def _irreducible_radius(block: np.ndarray, tol: float, max_iter: int) -> float:
    """Certified power iteration on an irreducible nonnegative block.

    Keeps the classical two-sided bounds min_i (Bx)_i/x_i <= rho <=
    max_i (Bx)_i/x_i for positive x and iterates with a diagonal shift equal
    to the running midpoint; the shift leaves the radius bounds untouched
    but breaks periodic spectra so the bounds tighten geometrically.
    """
    n = block.shape[0]
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        y = block @ x
        ratios = y / x
        lo = float(ratios.min())
        up = float(ratios.max())
        if up - lo <= tol * max(1.0, up):
            return 0.5 * (lo + up)
        shift = 0.5 * (lo + up)
        x = y + shift * x
        x /= x.sum()
    raise PowerIterationError(
        f"spectral radius bounds did not reach tolerance {tol:g} within "
        f"{max_iter} iterations (gap {up - lo:g})"
    )


def spectral_radius(
    matrix: np.ndarray | InterferenceMatrix,
    tol: float = SPECTRAL_TOL,
    max_iter: int = MAX_POWER_ITER,
) -> float:
    """Largest eigenvalue magnitude of a nonnegative matrix.

    The matrix is first split into its strongly connected components, whose
    largest block radius equals the radius of the whole matrix; each
    nontrivial block is handled by certified power iteration.

    Raises:
        PowerIterationError: if some block fails to certify within max_iter.
    """
    m = _as_square_nonneg(matrix)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    n = m.shape[0]
    if n == 0:
        return 0.0
    if n == 1:
        return float(m[0, 0])
    _, labels = connected_components(
        csr_matrix(m > 0), directed=True, connection="strong"
    )
    radius = 0.0
    for label in range(labels.max() + 1):
        idx = np.flatnonzero(labels == label)
        if idx.size == 1:
            radius = max(radius, float(m[idx[0], idx[0]]))
            continue
        block = m[np.ix_(idx, idx)]
        radius = max(radius, _irreducible_radius(block, tol, max_iter))
    return radius


def _strict_slotwise_value(im: InterferenceMatrix, transpose: bool) -> float:
    """Sum over antenna slots of the worst aggregate coupling in that slot.

    For slot j the aggregate of a row is the sum of its entries in column j
    of every user block; summing the per-slot maxima dominates every row
    sum, so a value below one implies the corresponding norm is below one.
    """
    m = im.matrix.T if transpose else im.matrix
    n_users = len(im.tx_antennas)
    total = 0.0
    for slot in range(max(im.tx_antennas)):
        cols = [
            im.block_start[r] + slot
            for r in range(n_users)
            if slot < im.tx_antennas[r]
        ]
        total += float(m[:, cols].sum(axis=1).max())
    return total


def strict_row_condition(im: InterferenceMatrix) -> tuple[bool, float]:
    """Per-slot strengthened row-norm test: (value < 1, value)."""
    value = _strict_slotwise_value(im, transpose=False)
    return value < 1.0, value


def strict_col_condition(im: InterferenceMatrix) -> tuple[bool, float]:
    """Per-slot strengthened column-norm test: (value < 1, value)."""
    value = _strict_slotwise_value(im, transpose=True)
    return value < 1.0, value


def certify(net: EffectiveNetwork, tol: float = SPECTRAL_TOL) -> UniquenessCertificate:
    """Run every uniqueness test on one effective network."""
    im = build_interference_matrix(net)
    row = max_row_sum(im)
    col = max_col_sum(im)
    rho = spectral_radius(im, tol=tol)
    row_ok, row_value = strict_row_condition(im)
    col_ok, col_value = strict_col_condition(im)
    norm_unique = row < 1.0 or col < 1.0
    modulus = min(row, col)
    return UniquenessCertificate(
        row_norm=row,
        col_norm=col,
        spectral_radius=rho,
        strict_row_value=row_value,
        strict_col_value=col_value,
        strict_row_cond=row_ok,
        strict_col_cond=col_ok,
        norm_unique=norm_unique,
        spectral_unique=rho < 1.0,
        contraction_modulus=modulus if modulus < 1.0 else None,
    )


def write_matrix_csv(im: InterferenceMatrix, path: str) -> None:
    """Dump the coupling matrix as plain CSV for inspection."""
    try:
        with open(path, "w", encoding="ascii", newline="") as fh:
            for row in im.matrix:
                fh.write(",".join(format(v, ".9g") for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write coupling matrix to {path!r}: {exc}") from exc
