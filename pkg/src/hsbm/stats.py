"""Integer sufficient statistics for the conditional updates.

All label/group arguments are 1-based; returned arrays are 0-based, so
entry ``[l - 1]`` belongs to community (or group) ``l``. Arrays are sized
to the ``*_active`` argument and indices beyond the counts seen are zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass
class GroupPairStats:
    """Edge/pair counts between groups of one layer.

    ``xi``/``O`` count pairs ``i < j`` with ``(g_i, g_j) = (g, g')`` and are
    not symmetric; ``xi_tilde``/``O_tilde`` count ordered pairs ``i != j``.
    """

    xi: np.ndarray
    O: np.ndarray
    xi_tilde: np.ndarray
    O_tilde: np.ndarray


@dataclass
class EtaStats:
    lam: np.ndarray
    N: np.ndarray


def _size(labels, active: int | None) -> int:
    m = int(np.max(labels)) if len(labels) else 0
    if active is None:
        return m
    if m > active:
        raise ValueError(f"label {m} exceeds the active size {active}")
    return active


def group_occupancy(g_t, G_cap: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``n_g = #{i: g_i = g}`` and ``n_{>g} = #{i: g_i > g}`` for ``g = 1..G_cap``."""
    g_t = np.asarray(g_t, dtype=np.int64)
    G = _size(g_t, G_cap)
    n = np.bincount(g_t - 1, minlength=G)[:G] if g_t.size else np.zeros(G, np.int64)
    n_gt = n[::-1].cumsum()[::-1] - n
    return n, n_gt


def dish_occupancy(k_maps: Sequence, K_cap: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Occurrence counts of each community over all ``(t, g)`` entries given.

    Pass only the dishes of the groups that should count (the sampler passes
    occupied groups).
    """
    flat = np.concatenate([np.asarray(k, dtype=np.int64).reshape(-1) for k in k_maps]) \
        if len(k_maps) else np.zeros(0, np.int64)
    return group_occupancy(flat, K_cap)


def node_stats(A_t, z_t, i: int, K_active: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Edges ``tau_l`` and neighbours ``m_l`` from node ``i`` (1-based) to community ``l``."""
    z_t = np.asarray(z_t, dtype=np.int64)
    K = _size(z_t, K_active)
    A_t = np.asarray(A_t)
    mask = np.ones(len(z_t), dtype=bool)
    mask[i - 1] = False
    zj = z_t[mask] - 1
    tau = np.bincount(zj, weights=A_t[i - 1, mask], minlength=K).astype(np.int64)
    m = np.bincount(zj, minlength=K).astype(np.int64)
    return tau, m


def group_pair_stats(A_t, g_t, G_active: int | None = None) -> GroupPairStats:
    g_t = np.asarray(g_t, dtype=np.int64)
    G = _size(g_t, G_active)
    A = np.asarray(A_t, dtype=np.int64)
    Y = np.zeros((len(g_t), G), dtype=np.int64)
    Y[np.arange(len(g_t)), g_t - 1] = 1
    upper = np.triu(np.ones_like(A), 1)
    xi = Y.T @ (A * upper) @ Y
    O = Y.T @ upper @ Y
    return GroupPairStats(xi=xi, O=O, xi_tilde=xi + xi.T, O_tilde=O + O.T)


def block_stats(group_pair: GroupPairStats, k_t, g: int,
                K_active: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``zeta_l = sum_{g' != g} xi~_{g g'} 1{k_{g'} = l}`` and likewise ``R`` from ``O~``.

    ``k_t`` must cover every group dimension of ``group_pair``.
    """
    k_t = np.asarray(k_t, dtype=np.int64)
    G = group_pair.xi_tilde.shape[0]
    k_t = k_t[:G]
    K = _size(k_t, K_active)
    others = np.arange(G) != g - 1
    zeta = np.bincount(k_t[others] - 1, weights=group_pair.xi_tilde[g - 1, others],
                       minlength=K).astype(np.int64)
    R = np.bincount(k_t[others] - 1, weights=group_pair.O_tilde[g - 1, others],
                    minlength=K).astype(np.int64)
    return zeta, R


def eta_stats(network, z, K_active: int | None = None) -> EtaStats:
    """Edge and pair counts between communities pooled over layers.

    Off-diagonal entries count ordered pairs ``i != j``; diagonal entries
    count pairs ``i < j``.
    """
    K = max((_size(zt, None) for zt in z), default=0)
    if K_active is not None:
        if K > K_active:
            raise ValueError(f"label {K} exceeds the active size {K_active}")
        K = K_active
    lam = np.zeros((K, K), dtype=np.int64)
    N = np.zeros((K, K), dtype=np.int64)
    for A, zt in zip(network, z):
        zt = np.asarray(zt, dtype=np.int64)
        Y = np.zeros((len(zt), K), dtype=np.int64)
        Y[np.arange(len(zt)), zt - 1] = 1
        A = np.asarray(A, dtype=np.int64)
        sizes = Y.sum(axis=0)
        lam += Y.T @ A @ Y
        N += np.outer(sizes, sizes) - np.diag(sizes)
    # ordered-pair diagonal counts each i<j pair twice
    idx = np.arange(K)
    lam[idx, idx] //= 2
    N[idx, idx] //= 2
    return EtaStats(lam=lam, N=N)
