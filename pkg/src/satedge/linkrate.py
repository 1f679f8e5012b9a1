"""Decode ordering and uplink data-rate kernels.

Ground users share each receiving node's band non-orthogonally; receivers
decode in descending channel-strength order and subtract decoded signals,
so a user's interference comes only from later-decoded users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ShapeMismatch, SingularCovariance, ZeroPower


@dataclass(frozen=True)
class SicOrder:
    """Decode priorities at one receiving node.

    priority[k] is user k's decode position: 0 decodes first (strongest
    channel) and suffers interference from every user with a larger
    priority value.
    """

    priority: np.ndarray  # (K,) int

    def interferers(self, k: int) -> np.ndarray:
        """Indices decoded after user k (i.e. interfering with user k)."""
        return np.flatnonzero(self.priority > self.priority[k])


@dataclass(frozen=True)
class Beamformers:
    """Receive beamformers for every (user, node) pair, unit norm each."""

    w: np.ndarray  # (K, M, n_ant_bs) complex
    v: np.ndarray  # (K, N, n_ant_sat) complex

    def __post_init__(self):
        for name, arr in (("w", self.w), ("v", self.v)):
            if arr.size:
                norms = np.linalg.norm(arr, axis=-1)
                if not np.allclose(norms, 1.0, atol=1e-9):
                    raise ShapeMismatch(f"{name} contains non-unit beamformers")


def sic_order(channels) -> SicOrder:
    """Decode order by descending squared channel norm, index tie-break."""
    norms = np.array([np.vdot(c, c).real for c in channels])
    if norms.size == 0:
        raise ShapeMismatch("sic_order requires at least one channel")
    # Stable sort on -norm gives ascending index among ties.
    order = np.argsort(-norms, kind="stable")
    priority = np.empty(norms.size, dtype=int)
    priority[order] = np.arange(norms.size)
    return SicOrder(priority=priority)


def _sinr(k: int, channels: np.ndarray, w: np.ndarray, p: np.ndarray,
          order: SicOrder, delta_sq: float) -> float:
    gains = np.abs(channels @ w.conj()) ** 2  # |w^H h_i|^2 for all users
    interference = float(np.dot(p[order.interferers(k)],
                                gains[order.interferers(k)]))
    return p[k] * gains[k] / (interference + delta_sq)


def rate_from_sinr(sinr: float, bandwidth: float) -> float:
    return bandwidth * math.log2(1.0 + sinr)


def rate_gue_bs(k: int, channels: np.ndarray, w: np.ndarray, p: np.ndarray,
                order: SicOrder, b1: float, delta1_sq: float,
                selected: bool = True) -> float:
    """Uplink rate (bit/s) of user k at a BS under the node's decode order.

    channels: (K, n_ant) matrix of all users' vectors at this node;
    w: this user's unit-norm receive vector; p: all users' powers.
    """
    if selected and p[k] <= 0:
        raise ZeroPower(f"user {k} selected this link with zero power")
    return rate_from_sinr(_sinr(k, channels, w, p, order, delta1_sq), b1)


def rate_gue_sat(k: int, channels: np.ndarray, v: np.ndarray, p: np.ndarray,
                 order: SicOrder, b2: float, delta2_sq: float,
                 selected: bool = True) -> float:
    """Uplink rate (bit/s) of ground user k at a satellite; same structure
    as the BS rate with the satellite band and noise floor."""
    if selected and p[k] <= 0:
        raise ZeroPower(f"user {k} selected this link with zero power")
    return rate_from_sinr(_sinr(k, channels, v, p, order, delta2_sq), b2)


def rate_sue_sat(q_l: float, snr_slope: float, b3: float) -> float:
    """Laser-link rate (bit/s): B3 log2(1 + q * slope)."""
    if q_l < 0:
        raise ZeroPower("transmit power must be >= 0")
    return b3 * math.log2(1.0 + q_l * snr_slope)


def max_sinr_receiver(k: int, channels: np.ndarray, p: np.ndarray,
                      order: SicOrder, delta_sq: float) -> np.ndarray:
    """Closed-form SINR-maximizing unit receive vector for user k.

    w is proportional to (sum of later-decoded p_i h_i h_i^H
    + delta^2 I)^{-1} h_k — the whitened matched filter.  Computed through
    a QR factorization of the stacked square-root factor of the
    interference-plus-noise matrix, which stays accurate when interferers
    are many orders of magnitude above the noise floor.
    """
    if delta_sq <= 0 or not np.isfinite(delta_sq):
        raise SingularCovariance("noise power must be positive and finite")
    n_ant = channels.shape[1]
    h = channels / math.sqrt(delta_sq)
    idx = order.interferers(k)
    a_mat = np.vstack([np.eye(n_ant, dtype=complex)]
                      + [math.sqrt(p[i]) * h[i].conj()[None, :] for i in idx])
    try:
        r_mat = np.linalg.qr(a_mat, mode="r")
        w = scipy.linalg.solve_triangular(r_mat.conj().T, h[k], lower=True)
        w = scipy.linalg.solve_triangular(r_mat, w, lower=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularCovariance(str(exc)) from exc
    norm = np.linalg.norm(w)
    if not np.isfinite(norm) or norm == 0:
        raise SingularCovariance("interference-plus-noise matrix is singular")
    return w / norm


def cross_gains(channels: np.ndarray, w_node: np.ndarray) -> np.ndarray:
    """Table |w_k^H h_i|^2 for one node.

    channels: (K, n_ant); w_node: (K, n_ant) per-user receive vectors at this
    node.  Entry [k, i] is the gain of user i's signal through user k's
    receiver.
    """
    return np.abs(w_node.conj() @ channels.T) ** 2
