"""Slice sampler for the hierarchical SBM.

One sweep runs these blocks in order:

1. per layer, stick fractions ``gamma'_t`` given the group counts (slice
   variables integrated out), then ``u_t`` given ``gamma_t``;
2. ``pi'`` given the dishes of occupied groups, then ``v`` given ``pi``.
   Empty groups get a fresh dish drawn from ``pi``;
3. the connectivity ``eta`` given the current labels;
4. per layer, the dishes ``k_t`` and then the groups ``g_t``.

The represented prefixes (``G^cap_t`` groups, ``K^cap`` communities) are
grown whenever a slice could reach past them, so every conditional is
exact for the untruncated model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from hsbm import _kernels
from hsbm.sticks import grown_length, residual_mass, sample_beta1, slice_sups, stick_transform
from hsbm.stats import dish_occupancy, eta_stats, group_occupancy
from hsbm.types import ChainTrace, Hyperparameters, HsbmState, MultiplexNetwork

log = logging.getLogger(__name__)

INITIAL_CAP = 10
ETA_EPS = 1e-12


@dataclass(frozen=True)
class LogOddsCache:
    """``a = log(eta / (1 - eta))`` and ``b = log(1 - eta)``."""

    a: np.ndarray
    b: np.ndarray

    @classmethod
    def from_eta(cls, eta: np.ndarray) -> LogOddsCache:
        return cls(a=np.log(eta) - np.log1p(-eta), b=np.log1p(-eta))


def _uniform_open0(rng, size) -> np.ndarray:
    # (0, 1]: keeps slice variables strictly positive
    return 1.0 - rng.random(size)


def _prior_eta(rng, hyper: Hyperparameters, K: int) -> np.ndarray:
    draws = rng.beta(hyper.alpha_eta, hyper.beta_eta, size=(K, K))
    eta = np.triu(draws) + np.triu(draws, 1).T
    return np.clip(eta, ETA_EPS, 1.0 - ETA_EPS)


def init_state(network: MultiplexNetwork, hyper: Hyperparameters, rng,
               g_cap: int = INITIAL_CAP, k_cap: int = INITIAL_CAP) -> HsbmState:
    """All nodes in group 1, every group served dish 1, uniform slice variables."""
    return HsbmState(
        g=[np.ones(n, dtype=np.int64) for n in network.node_counts],
        k=[np.ones(g_cap, dtype=np.int64) for _ in range(network.T)],
        u=[_uniform_open0(rng, n) for n in network.node_counts],
        v=[_uniform_open0(rng, g_cap) for _ in range(network.T)],
        gamma_frac=[sample_beta1(rng, hyper.alpha0, g_cap) for _ in range(network.T)],
        pi_frac=sample_beta1(rng, hyper.gamma0, k_cap),
        eta=_prior_eta(rng, hyper, k_cap),
    )


def gamma_weights(state: HsbmState, t: int) -> np.ndarray:
    """Group weights of layer ``t`` (0-based) over the represented prefix."""
    return stick_transform(state.gamma_frac[t])


def pi_weights(state: HsbmState) -> np.ndarray:
    return stick_transform(state.pi_frac)


# --- truncation growth -----------------------------------------------------

def extend_dishes(state: HsbmState, hyper: Hyperparameters, rng, new_cap: int) -> None:
    """Grow ``K^cap`` with prior stick fractions and prior connectivities."""
    K = state.k_cap
    if new_cap <= K:
        return
    state.pi_frac = np.concatenate((state.pi_frac, sample_beta1(rng, hyper.gamma0, new_cap - K)))
    eta = _prior_eta(rng, hyper, new_cap)
    eta[:K, :K] = state.eta
    state.eta = eta


def draw_dishes(state: HsbmState, hyper: Hyperparameters, rng, size: int) -> np.ndarray:
    """Communities drawn from ``pi`` by inversion, growing ``K^cap`` as needed."""
    U = rng.random(size)
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    while True:
        cum = np.cumsum(pi_weights(state))
        if U.max() < cum[-1]:
            return np.searchsorted(cum, U, side="right").astype(np.int64) + 1
        extend_dishes(state, hyper, rng, grown_length(state.k_cap))


def extend_groups(state: HsbmState, hyper: Hyperparameters, rng, t: int, new_cap: int) -> None:
    """Grow ``G^cap_t``; each new group is served a dish drawn from ``pi``."""
    G = state.g_cap[t]
    if new_cap <= G:
        return
    state.gamma_frac[t] = np.concatenate(
        (state.gamma_frac[t], sample_beta1(rng, hyper.alpha0, new_cap - G)))
    new_k = draw_dishes(state, hyper, rng, new_cap - G)
    state.k[t] = np.concatenate((state.k[t], new_k))
    pi = pi_weights(state)
    state.v[t] = np.concatenate((state.v[t], pi[new_k - 1] * _uniform_open0(rng, new_cap - G)))


def cover_groups(state: HsbmState, hyper: Hyperparameters, rng) -> None:
    """Grow each ``G^cap_t`` until the leftover stick is below ``min_i u_ti``."""
    for t in range(state.T):
        u_min = state.u[t].min()
        while residual_mass(state.gamma_frac[t]) >= u_min:
            extend_groups(state, hyper, rng, t, grown_length(state.g_cap[t]))


def cover_dishes(state: HsbmState, hyper: Hyperparameters, rng) -> None:
    """Grow ``K^cap`` until the leftover stick is below every ``v_tg``."""
    v_min = min(v.min() for v in state.v)
    while residual_mass(state.pi_frac) >= v_min:
        extend_dishes(state, hyper, rng, grown_length(state.k_cap))


# --- block updates ----------------------------------------------------------

def update_gamma_fractions(state: HsbmState, hyper: Hyperparameters, rng) -> HsbmState:
    """``gamma'_tg ~ Beta(n_g + 1, n_{>g} + alpha0)`` for every represented ``g``."""
    for t in range(state.T):
        n, n_gt = group_occupancy(state.g[t], state.g_cap[t])
        state.gamma_frac[t] = rng.beta(n + 1.0, n_gt + hyper.alpha0)
    return state


def update_u(state: HsbmState, rng) -> HsbmState:
    for t in range(state.T):
        w = gamma_weights(state, t)[state.g[t] - 1]
        if np.any(w <= 0):
            raise RuntimeError(f"layer {t + 1}: a node sits in a group of zero weight")
        state.u[t] = w * _uniform_open0(rng, len(w))
    return state


def occupied_dishes(state: HsbmState) -> list[np.ndarray]:
    return [k[np.unique(g) - 1] for g, k in zip(state.g, state.k)]


def update_pi_fractions(state: HsbmState, hyper: Hyperparameters, rng) -> HsbmState:
    """``pi'_k ~ Beta(n_k + 1, n_{>k} + gamma0)`` with ``n_k`` counted over occupied groups."""
    n, n_gt = dish_occupancy(occupied_dishes(state), state.k_cap)
    state.pi_frac = rng.beta(n + 1.0, n_gt + hyper.gamma0)
    return state


def update_v(state: HsbmState, rng, hyper: Hyperparameters | None = None) -> HsbmState:
    """``v_tg ~ Unif(0, pi_{k_tg}]``.

    With ``hyper`` given, groups holding no nodes are first served a fresh
    dish from ``pi``; this completes the ``(pi', v)`` block, in which the
    dishes of empty groups were integrated out.
    """
    for t in range(state.T):
        if hyper is not None:
            empty = np.ones(state.g_cap[t], dtype=bool)
            empty[state.g[t] - 1] = False
            idx = np.flatnonzero(empty)
            state.k[t][idx] = draw_dishes(state, hyper, rng, len(idx))
        pi = pi_weights(state)
        w = pi[state.k[t] - 1]
        if np.any(w <= 0):
            raise RuntimeError(f"layer {t + 1}: a group is served a dish of zero weight")
        state.v[t] = w * _uniform_open0(rng, len(w))
    return state


def sample_eta(stats, hyper: Hyperparameters, rng) -> np.ndarray:
    """Upper triangle ``eta_kl ~ Beta(lam + alpha_eta, N - lam + beta_eta)``, mirrored."""
    lam, N = stats.lam, stats.N
    draws = rng.beta(lam + hyper.alpha_eta, N - lam + hyper.beta_eta)
    eta = np.triu(draws) + np.triu(draws, 1).T
    return np.clip(eta, ETA_EPS, 1.0 - ETA_EPS)


def update_eta(state: HsbmState, network: MultiplexNetwork, hyper: Hyperparameters,
               rng, stats=None) -> HsbmState:
    if stats is None:
        stats = eta_stats(network, state.z(), state.k_cap)
    state.eta = sample_eta(stats, hyper, rng)
    return state


def _cache(state: HsbmState, cache: LogOddsCache | None) -> LogOddsCache:
    if cache is None or cache.a.shape[0] != state.k_cap:
        cache = LogOddsCache.from_eta(state.eta)
    return cache


def group_slices(state: HsbmState, t: int) -> np.ndarray:
    """``G_ti = sup{g : u_ti <= gamma_tg}`` for every node of layer ``t`` (0-based)."""
    G = slice_sups(gamma_weights(state, t), state.u[t])
    if np.any(G == 0):
        raise RuntimeError(f"layer {t + 1}: empty group slice")
    return G


def dish_slices(state: HsbmState, t: int) -> np.ndarray:
    K = slice_sups(pi_weights(state), state.v[t])
    if np.any(K == 0):
        raise RuntimeError(f"layer {t + 1}: empty dish slice")
    return K


def group_log_weights(state: HsbmState, network: MultiplexNetwork, t: int, i: int,
                      cache: LogOddsCache | None = None) -> np.ndarray:
    """Unnormalized log-probabilities of ``g_ti = 1..G_ti`` (``t``, ``i`` 1-based).

    Groups below ``G_ti`` whose weight is under ``u_ti`` get ``-inf``.
    """
    cache = _cache(state, cache)
    A = network[t - 1]
    z = state.k[t - 1][state.g[t - 1] - 1] - 1
    K = state.k_cap
    tau = np.zeros(K, dtype=np.int64)
    m = np.zeros(K, dtype=np.int64)
    _kernels.node_counts(A, z, i - 1, tau, m)
    G = int(group_slices(state, t - 1)[i - 1])
    out = np.empty(G)
    _kernels.group_logw(cache.a, cache.b, state.k[t - 1] - 1, G, tau, m, out)
    _kernels.mask_slice(out, G, gamma_weights(state, t - 1), state.u[t - 1][i - 1])
    return out


def dish_log_weights(state: HsbmState, network: MultiplexNetwork, t: int, g: int,
                     cache: LogOddsCache | None = None) -> np.ndarray:
    """Unnormalized log-probabilities of ``k_tg = 1..K_tg`` (``t``, ``g`` 1-based).

    Communities below ``K_tg`` whose weight is under ``v_tg`` get ``-inf``.
    """
    cache = _cache(state, cache)
    k0 = state.k[t - 1] - 1
    sizes, Xt = _kernels.group_edge_counts(network[t - 1], state.g[t - 1] - 1, len(k0))
    K = state.k_cap
    n_slice = int(dish_slices(state, t - 1)[g - 1])
    out = np.empty(n_slice)
    _kernels.dish_logw(cache.a, cache.b, g - 1, k0, sizes, Xt, n_slice,
                       np.zeros(K, np.int64), np.zeros(K, np.int64), out)
    _kernels.mask_slice(out, n_slice, pi_weights(state), state.v[t - 1][g - 1])
    return out


def update_groups(state: HsbmState, network: MultiplexNetwork, rng,
                  cache: LogOddsCache | None = None, layers=None,
                  nodes: np.ndarray | None = None) -> HsbmState:
    """Resample ``g_ti`` node by node (ascending ``i``) within each layer.

    ``nodes`` (1-based) restricts the scan, e.g. to a single coordinate.
    """
    cache = _cache(state, cache)
    for t in (range(state.T) if layers is None else layers):
        G = group_slices(state, t)
        order = np.arange(len(G)) if nodes is None else np.asarray(nodes, np.int64) - 1
        g0 = state.g[t] - 1
        _kernels.update_groups_layer(network[t], g0, state.k[t] - 1, G, gamma_weights(state, t),
                                     state.u[t], cache.a, cache.b,
                                     rng.random(len(order)), order)
        state.g[t] = g0 + 1
    return state


def update_dishes(state: HsbmState, network: MultiplexNetwork, rng,
                  cache: LogOddsCache | None = None, layers=None,
                  groups: np.ndarray | None = None) -> HsbmState:
    """Resample ``k_tg`` group by group (ascending ``g``) within each layer."""
    cache = _cache(state, cache)
    for t in (range(state.T) if layers is None else layers):
        K = dish_slices(state, t)
        order = np.arange(len(K)) if groups is None else np.asarray(groups, np.int64) - 1
        k0 = state.k[t] - 1
        _kernels.update_dishes_layer(network[t], state.g[t] - 1, k0, K, pi_weights(state),
                                     state.v[t], cache.a, cache.b,
                                     rng.random(len(order)), order)
        state.k[t] = k0 + 1
    return state


def sweep(state: HsbmState, network: MultiplexNetwork, hyper: Hyperparameters, rng) -> HsbmState:
    """One full iteration of the sampler; ``state`` is updated in place and returned."""
    update_gamma_fractions(state, hyper, rng)
    update_u(state, rng)
    cover_groups(state, hyper, rng)

    update_pi_fractions(state, hyper, rng)
    update_v(state, rng, hyper)
    cover_dishes(state, hyper, rng)

    update_eta(state, network, hyper, rng)
    cache = LogOddsCache.from_eta(state.eta)

    for t in range(state.T):
        update_dishes(state, network, rng, cache, layers=[t])
        update_groups(state, network, rng, cache, layers=[t])
    return state


def _eta_snapshot(eta: np.ndarray, labels: np.ndarray) -> np.ndarray:
    K = int(labels.max())
    return eta[:K, :K].copy()


def run_chain(network: MultiplexNetwork, hyper: Hyperparameters,
              callback: Callable[[int, HsbmState], None] | None = None,
              state: HsbmState | None = None) -> ChainTrace:
    """Run ``iter_max`` sweeps and keep every ``thin``-th post-burn-in sample.

    ``callback(sweep_number, state)`` is called after every sweep
    (sweeps are numbered from 1).
    """
    rng = np.random.default_rng(hyper.seed)
    if state is None:
        state = init_state(network, hyper, rng)
    keep = range(hyper.burnin + 1, hyper.iter_max + 1, hyper.thin)
    N = sum(network.node_counts)
    labels = np.empty((len(keep), N), dtype=np.int64)
    etas = []
    s = 0
    for it in range(1, hyper.iter_max + 1):
        sweep(state, network, hyper, rng)
        if callback is not None:
            callback(it, state)
        if s < len(keep) and it == keep[s]:
            labels[s] = state.z().flat()
            etas.append(_eta_snapshot(state.eta, labels[s]))
            s += 1
    log.debug("chain done: G^cap=%s K^cap=%d", state.g_cap, state.k_cap)
    return ChainTrace(iterations=np.array(keep, dtype=np.int64), labels=labels,
                      node_counts=network.node_counts, eta_samples=etas)
