"""Hybrid precoding via block-sparse approximation of the SVD precoder.

The unconstrained optimum is the top right-singular subspace of the channel;
the hybrid stage greedily picks dictionary blocks whose (phase-projected)
steering vectors best explain it, then solves the baseband stage by least
squares and renormalizes to the stream power budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .dictionaries import Dictionary
from .errors import ConfigurationError
from .recovery import RecoveryConfig


@dataclass(frozen=True)
class MatrixChannel:
    """Dense N_r x N_t channel matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.matrix)
        if h.ndim != 2 or h.shape[0] < 1:
            raise ValueError("channel must be a 2-D matrix with at least one row")
        if not np.all(np.isfinite(h.view(float))):
            raise ValueError("channel entries must be finite")

    @property
    def num_rx(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_tx(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class PrecoderPair:
    """Constant-modulus analog stage F_RF (N_t x n_rf) and digital stage
    F_BB (n_rf x N_s), normalized so ||F_RF F_BB||_F^2 = N_s."""

    f_rf: np.ndarray
    f_bb: np.ndarray

    def __post_init__(self):
        n_t, n_rf = self.f_rf.shape
        n_rf_b, n_s = self.f_bb.shape
        if n_rf != n_rf_b:
            raise ValueError("F_RF and F_BB dimensions do not chain")
        if not n_s <= n_rf <= n_t:
            raise ValueError("stream/chain/antenna counts must satisfy N_s <= N_RF <= N_t")
        target = 1.0 / np.sqrt(n_t)
        if np.any(np.abs(np.abs(self.f_rf) - target) > 1e-10):
            raise ValueError("every F_RF entry must have modulus 1/sqrt(N_t)")
        power = np.linalg.norm(self.f_rf @ self.f_bb) ** 2
        if abs(power - n_s) > 1e-8:
            raise ValueError("||F_RF F_BB||_F^2 must equal the stream count")

    @property
    def num_streams(self) -> int:
        return self.f_bb.shape[1]

    @property
    def num_chains(self) -> int:
        return self.f_rf.shape[1]

    @property
    def combined(self) -> np.ndarray:
        return self.f_rf @ self.f_bb


@dataclass(frozen=True)
class SEReport:
    """Spectral efficiency of one precoder at one SNR."""

    spectral_efficiency: float
    snr_db: float
    precoder_type: str

    def __post_init__(self):
        if self.spectral_efficiency < 0:
            raise ValueError("spectral efficiency must be non-negative")


def optimal_precoder(channel: MatrixChannel, num_streams: int) -> np.ndarray:
    """Top right-singular vectors of H, orthonormal columns, N_t x N_s."""
    if num_streams < 1 or num_streams > min(channel.num_rx, channel.num_tx):
        raise ValueError("num_streams must satisfy 1 <= N_s <= min(N_r, N_t)")
    _, _, vh = np.linalg.svd(channel.matrix, full_matrices=False)
    return vh[:num_streams].conj().T


def block_sparse_precoding(
    f_opt: np.ndarray,
    dictionary: Dictionary,
    num_rf_chains: int,
    cfg: Optional[RecoveryConfig] = None,
) -> PrecoderPair:
    """Greedy block approximation of the unconstrained precoder.

    Iterates: score every block by ||A_b^H R||_F^2 against the residual
    R = F_OPT - F_RF F_BB, append the winning block's atoms phase-projected
    to modulus 1/sqrt(N_t), refit F_BB by least squares. Stops when adding a
    block would exceed the chain budget, the relative residual reaches the
    tolerance, or the block budget runs out, then rescales F_BB to the
    stream power budget.
    """
    f_opt = np.asarray(f_opt)
    n_t, n_s = f_opt.shape
    if dictionary.num_antennas != n_t:
        raise ValueError("dictionary atom length must match the precoder rows")
    partition = cfg.partition if cfg is not None and cfg.partition is not None else dictionary.partition
    uniform = partition.uniform_length
    if uniform is not None and num_rf_chains % uniform != 0:
        raise ConfigurationError("the block length must divide the RF chain count")
    tol = cfg.residual_tolerance if cfg is not None else 1e-10
    max_blocks = cfg.max_blocks if cfg is not None else partition.num_blocks

    atoms = dictionary.atoms
    g = atoms.shape[1]
    starts = partition.starts
    target_mod = 1.0 / np.sqrt(n_t)
    opt_norm = float(np.linalg.norm(f_opt))

    selected: list = []
    f_rf = np.empty((n_t, 0), dtype=np.complex128)
    f_bb = np.empty((0, n_s), dtype=np.complex128)
    residual = f_opt
    rel = 1.0

    while len(selected) < max_blocks and rel > tol and len(selected) < partition.num_blocks:
        corr = atoms.conj().T @ residual  # (G, N_s)
        atom_energy = np.sum(np.abs(corr) ** 2, axis=1)
        scores = np.add.reduceat(atom_energy, starts)
        if selected:
            scores[np.asarray(selected)] = -np.inf
        block = int(np.argmax(scores))
        block_slice = partition.block_slice(block)
        width = block_slice.stop - block_slice.start
        if f_rf.shape[1] + width > num_rf_chains:
            break
        new_cols = target_mod * np.exp(1j * np.angle(atoms[:, block_slice]))
        f_rf = np.concatenate([f_rf, new_cols], axis=1)
        f_bb, *_ = np.linalg.lstsq(f_rf, f_opt, rcond=None)
        residual = f_opt - f_rf @ f_bb
        rel = float(np.linalg.norm(residual)) / opt_norm
        selected.append(block)

    combined_norm = float(np.linalg.norm(f_rf @ f_bb))
    if combined_norm == 0.0:
        raise ValueError("degenerate precoder: F_RF F_BB vanished")
    f_bb = f_bb * (np.sqrt(n_s) / combined_norm)
    return PrecoderPair(f_rf, f_bb)


def spectral_efficiency(
    channel: MatrixChannel,
    precoder: Union[np.ndarray, PrecoderPair],
    snr_db: float,
    precoder_type: str = "precoder",
) -> SEReport:
    """log2 det(I + rho/N_s * H F F^H H^H) with equal power per stream."""
    f = precoder.combined if isinstance(precoder, PrecoderPair) else np.asarray(precoder)
    if f.shape[0] != channel.num_tx:
        raise ValueError("precoder rows must match the transmit antenna count")
    rho = 10.0 ** (snr_db / 10.0)
    n_s = f.shape[1]
    effective = channel.matrix @ f  # (N_r, N_s)
    m = np.eye(channel.num_rx, dtype=np.complex128) + (rho / n_s) * (effective @ effective.conj().T)
    _, logdet = np.linalg.slogdet(m)
    return SEReport(max(float(logdet) / np.log(2.0), 0.0), snr_db, precoder_type)
