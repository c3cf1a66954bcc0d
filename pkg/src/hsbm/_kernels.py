"""Compiled inner loops for the group and dish scans.

Everything here is 0-based. Randomness enters only through pre-drawn
uniforms, so results are fixed by the caller's Generator.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def sample_log_categorical(logw, n, uniform):
    """Index in ``[0, n)`` drawn with probabilities ``∝ exp(logw[:n])``."""
    mx = logw[0]
    for c in range(1, n):
        if logw[c] > mx:
            mx = logw[c]
    total = 0.0
    for c in range(n):
        total += np.exp(logw[c] - mx)
    target = uniform * total
    acc = 0.0
    last = 0
    for c in range(n):
        w = np.exp(logw[c] - mx)
        if w > 0.0:
            last = c
        acc += w
        if target < acc:
            return c
    # rounding fallback: last index with positive weight
    return last


@njit(cache=True)
def mask_slice(logw, n, weights, threshold):
    """Exclude indices below the slice sup whose weight is still under the threshold."""
    for c in range(n):
        if weights[c] < threshold:
            logw[c] = -np.inf


@njit(cache=True)
def node_counts(A, z, i, tau, m):
    tau[:] = 0
    m[:] = 0
    for j in range(z.shape[0]):
        if j != i:
            l = z[j]
            m[l] += 1
            tau[l] += A[i, j]


@njit(cache=True)
def group_logw(a, b, k, G, tau, m, out):
    K = tau.shape[0]
    for g in range(G):
        kg = k[g]
        s = 0.0
        for l in range(K):
            if m[l] > 0:
                s += a[kg, l] * tau[l] + b[kg, l] * m[l]
        out[g] = s


@njit(cache=True)
def update_groups_layer(A, g, k, slice_len, gamma, u, a, b, uniforms, order):
    """Systematic scan over the nodes in ``order``; ``g`` is updated in place."""
    K = a.shape[0]
    z = np.empty(g.shape[0], dtype=np.int64)
    for i in range(g.shape[0]):
        z[i] = k[g[i]]
    tau = np.zeros(K, dtype=np.int64)
    m = np.zeros(K, dtype=np.int64)
    logw = np.empty(k.shape[0], dtype=np.float64)
    for pos in range(order.shape[0]):
        i = order[pos]
        node_counts(A, z, i, tau, m)
        G = slice_len[i]
        group_logw(a, b, k, G, tau, m, logw)
        mask_slice(logw, G, gamma, u[i])
        c = sample_log_categorical(logw, G, uniforms[pos])
        g[i] = c
        z[i] = k[c]


@njit(cache=True)
def group_edge_counts(A, g, G):
    """Group sizes and ``Xt[g, g'] = sum_{i != j} A_ij 1{g_i = g, g_j = g'}``."""
    n = g.shape[0]
    sizes = np.zeros(G, dtype=np.int64)
    Xt = np.zeros((G, G), dtype=np.int64)
    for i in range(n):
        sizes[g[i]] += 1
        for j in range(i + 1, n):
            if A[i, j]:
                Xt[g[i], g[j]] += 1
                Xt[g[j], g[i]] += 1
    return sizes, Xt


@njit(cache=True)
def dish_logw(a, b, h, k, sizes, Xt, K_slice, zeta, R, out):
    K = zeta.shape[0]
    zeta[:] = 0
    R[:] = 0
    for other in range(k.shape[0]):
        if other != h and sizes[other] > 0:
            l = k[other]
            zeta[l] += Xt[h, other]
            R[l] += sizes[h] * sizes[other]
    xi = Xt[h, h] // 2
    O = sizes[h] * (sizes[h] - 1) // 2
    for c in range(K_slice):
        s = a[c, c] * xi + b[c, c] * O
        for l in range(K):
            if R[l] > 0:
                s += a[c, l] * zeta[l] + b[c, l] * R[l]
        out[c] = s


@njit(cache=True)
def update_dishes_layer(A, g, k, slice_len, pi, v, a, b, uniforms, order):
    """Systematic scan over the groups in ``order``; ``k`` is updated in place."""
    K = a.shape[0]
    sizes, Xt = group_edge_counts(A, g, k.shape[0])
    zeta = np.zeros(K, dtype=np.int64)
    R = np.zeros(K, dtype=np.int64)
    logw = np.empty(K, dtype=np.float64)
    for pos in range(order.shape[0]):
        h = order[pos]
        n_slice = slice_len[h]
        dish_logw(a, b, h, k, sizes, Xt, n_slice, zeta, R, logw)
        mask_slice(logw, n_slice, pi, v[h])
        k[h] = sample_log_categorical(logw, n_slice, uniforms[pos])
