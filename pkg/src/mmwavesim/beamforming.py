"""SVD transmit precoders and receive combiners for associated links.

Each served UE gets the dominant n_k right singular vectors of its
serving channel as precoder F and the matching left singular vectors as
combiner W, so W^H H F is diagonal with the descending singular values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

# Phase-convention threshold: entries of unit-norm singular vectors are
# O(1/sqrt(dim)), so the first entry above this is well defined.
_PHASE_TOL = 1e-12


class DegenerateChannelError(ValueError):
    """Channel has no energy to beamform on (zero matrix)."""


@dataclass(frozen=True)
class BeamformerSet:
    """Per-UE precoders F (M x n_k) and combiners W (N_k x n_k), served UEs only."""

    precoders: Mapping[int, np.ndarray]
    combiners: Mapping[int, np.ndarray]

    def bs_precoder(self, ue_indices: Iterable[int]) -> np.ndarray:
        """Horizontal concatenation F_j over the given served UEs (ascending)."""
        cols = [self.precoders[k] for k in sorted(ue_indices)]
        if not cols:
            raise ValueError("no served UEs to concatenate")
        return np.hstack(cols)


def batch_svd_beamformers(h: np.ndarray, n_streams: int):
    """svd_beamformers over a stack of equally sized channels.

    h has shape (..., N, M); returns (F, W, s) with shapes (..., M, n),
    (..., N, n), (..., n). The per-column phase convention matches
    svd_beamformers. Raises DegenerateChannelError if any channel in the
    stack is exactly zero.
    """
    h = np.asarray(h, dtype=complex)
    n_rx, n_tx = h.shape[-2], h.shape[-1]
    if n_streams < 1 or n_streams > min(n_rx, n_tx):
        raise ValueError(f"n_streams must be in [1, {min(n_rx, n_tx)}]")
    if not np.all(np.isfinite(h.real)) or not np.all(np.isfinite(h.imag)):
        raise ValueError("channel matrix must be finite")
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    if np.any(s[..., 0] == 0.0):
        raise DegenerateChannelError("zero channel matrix")
    f = vh[..., :n_streams, :].conj().swapaxes(-1, -2)   # (..., M, n)
    w = u[..., :n_streams]                               # (..., N, n)
    s = s[..., :n_streams]
    # rotate each singular-vector pair so the first non-negligible entry
    # of the F column is real-positive
    first = np.argmax(np.abs(f) > _PHASE_TOL, axis=-2)   # (..., n)
    val = np.take_along_axis(f, first[..., np.newaxis, :], axis=-2)[..., 0, :]
    mag = np.abs(val)
    phase = np.where(mag > 0, val / np.where(mag > 0, mag, 1.0), 1.0)
    f = f * phase.conj()[..., np.newaxis, :]
    w = w * phase.conj()[..., np.newaxis, :]
    return f, w, s


def svd_beamformers(h: np.ndarray, n_streams: int):
    """Precoder and combiner for one channel: F = V[:, :n], W = U[:, :n].

    H = U diag(s) V^H with singular values descending; each column pair is
    rotated so the first entry of the F (= V) column above 1e-12 in
    magnitude is real-positive, making the decomposition reproducible.
    Returns (F, W). Raises DegenerateChannelError on a zero matrix and
    ValueError if n_streams exceeds min(N, M).
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2:
        raise ValueError("channel matrix must be 2-D")
    f, w, _ = batch_svd_beamformers(h, n_streams)
    return f, w


def compute_beamformers(channels: Mapping, beta: Sequence[int], n_streams: int) -> BeamformerSet:
    """SVD beamformers for every served UE under the assignment beta.

    beta[k] is UE k's serving BS index, negative when the UE is dropped;
    dropped UEs get no beamformers. channels maps (ue, bs) to a
    ChannelRealization.
    """
    precoders: dict[int, np.ndarray] = {}
    combiners: dict[int, np.ndarray] = {}
    for k, bs in enumerate(beta):
        if bs < 0:
            continue
        if (k, bs) not in channels:
            raise ValueError(f"missing channel for link (ue={k}, bs={bs})")
        f, w = svd_beamformers(channels[(k, bs)].matrix, n_streams)
        precoders[k] = f
        combiners[k] = w
    return BeamformerSet(precoders=precoders, combiners=combiners)
