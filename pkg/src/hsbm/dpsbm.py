"""Single-layer DP-SBM slice sampler, the baseline fitted layer by layer."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from hsbm import _kernels
from hsbm.sampler import INITIAL_CAP, LogOddsCache, _prior_eta, _uniform_open0, sample_eta
from hsbm.stats import eta_stats, group_occupancy
from hsbm.sticks import grown_length, residual_mass, sample_beta1, slice_sups, stick_transform
from hsbm.types import ChainTrace, Hyperparameters, MultiplexNetwork, validate_network


@dataclass
class DpsbmState:
    """Labels ``z``, slice variables ``u``, stick fractions and connectivity.

    ``z_cap`` is the length of ``gamma_frac``. ``doublings`` counts how
    often a sweep was restarted with a larger cap.
    """

    z: np.ndarray
    u: np.ndarray
    gamma_frac: np.ndarray
    eta: np.ndarray
    doublings: int = 0

    @property
    def z_cap(self) -> int:
        return len(self.gamma_frac)

    def copy(self) -> DpsbmState:
        return DpsbmState(self.z.copy(), self.u.copy(), self.gamma_frac.copy(),
                          self.eta.copy(), self.doublings)


def init_dpsbm(n: int, hyper: Hyperparameters, rng, z_cap: int = INITIAL_CAP) -> DpsbmState:
    return DpsbmState(
        z=np.ones(n, dtype=np.int64),
        u=_uniform_open0(rng, n),
        gamma_frac=sample_beta1(rng, hyper.alpha0, z_cap),
        eta=_prior_eta(rng, hyper, z_cap),
    )


def doubling(Z: int, cap: int) -> int:
    """New cap after a slice of size ``Z``: unchanged while ``Z < cap``, else grown 1.5x."""
    return cap if Z < cap else grown_length(cap)


def _grow(state: DpsbmState, hyper: Hyperparameters, rng, new_cap: int) -> None:
    L = state.z_cap
    if new_cap <= L:
        return
    state.gamma_frac = np.concatenate((state.gamma_frac, sample_beta1(rng, hyper.alpha0, new_cap - L)))
    eta = _prior_eta(rng, hyper, new_cap)
    eta[:L, :L] = state.eta
    state.eta = eta


def label_slices(state: DpsbmState) -> np.ndarray:
    Z = slice_sups(stick_transform(state.gamma_frac), state.u)
    if np.any(Z == 0):
        raise RuntimeError("empty label slice")
    return Z


def label_log_weights(state: DpsbmState, A, i: int) -> np.ndarray:
    """Unnormalized log-probabilities of ``z_i = 1..Z_i`` (``i`` 1-based); labels
    below ``Z_i`` whose weight is under ``u_i`` get ``-inf``."""
    cache = LogOddsCache.from_eta(state.eta)
    K = state.z_cap
    tau = np.zeros(K, np.int64)
    m = np.zeros(K, np.int64)
    _kernels.node_counts(np.asarray(A), state.z - 1, i - 1, tau, m)
    Z = int(label_slices(state)[i - 1])
    out = np.empty(Z)
    _kernels.group_logw(cache.a, cache.b, np.arange(K), Z, tau, m, out)
    _kernels.mask_slice(out, Z, stick_transform(state.gamma_frac), state.u[i - 1])
    return out


def update_labels(state: DpsbmState, A, rng, nodes: np.ndarray | None = None,
                  cache: LogOddsCache | None = None) -> DpsbmState:
    if cache is None:
        cache = LogOddsCache.from_eta(state.eta)
    Z = label_slices(state)
    order = np.arange(len(Z)) if nodes is None else np.asarray(nodes, np.int64) - 1
    z0 = state.z - 1
    _kernels.update_groups_layer(np.asarray(A), z0, np.arange(state.z_cap), Z,
                                 stick_transform(state.gamma_frac), state.u, cache.a, cache.b, rng.random(len(order)), order)
    state.z = z0 + 1
    return state


def dpsbm_sweep(state: DpsbmState, A, hyper: Hyperparameters, rng) -> DpsbmState:
    """One iteration: sticks and slices (restarting with a larger cap when the
    slice reaches it), then ``eta``, then the labels node by node."""
    start = state.copy()
    while True:
        n, n_gt = group_occupancy(state.z, state.z_cap)
        state.gamma_frac = rng.beta(n + 1.0, n_gt + hyper.alpha0)
        state.u = stick_transform(state.gamma_frac)[state.z - 1] * _uniform_open0(rng, len(state.z))
        u_min = state.u.min()
        while residual_mass(state.gamma_frac) >= u_min:
            _grow(state, hyper, rng, grown_length(state.z_cap))
        Z = int(label_slices(state).max())
        cap = doubling(Z, state.z_cap)
        if cap == state.z_cap:
            break
        restarts = state.doublings + 1
        state = start.copy()
        state.doublings = restarts
        _grow(state, hyper, rng, cap)
        start = state.copy()

    stats = eta_stats([A], [state.z], state.z_cap)
    state.eta = sample_eta(stats, hyper, rng)
    return update_labels(state, A, rng)


def run_dpsbm(adjacency, hyper: Hyperparameters, state: DpsbmState | None = None) -> ChainTrace:
    A = validate_network([adjacency])[0]
    rng = np.random.default_rng(hyper.seed)
    if state is None:
        state = init_dpsbm(A.shape[0], hyper, rng)
    keep = range(hyper.burnin + 1, hyper.iter_max + 1, hyper.thin)
    labels = np.empty((len(keep), A.shape[0]), dtype=np.int64)
    etas = []
    s = 0
    for it in range(1, hyper.iter_max + 1):
        state = dpsbm_sweep(state, A, hyper, rng)
        if s < len(keep) and it == keep[s]:
            labels[s] = state.z
            K = int(state.z.max())
            etas.append(state.eta[:K, :K].copy())
            s += 1
    return ChainTrace(iterations=np.array(keep, dtype=np.int64), labels=labels,
                      node_counts=(A.shape[0],), eta_samples=etas)


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for a (layer, replication, ...) key."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def fit_per_layer(network: MultiplexNetwork, hyper: Hyperparameters) -> list[ChainTrace]:
    """Independent DP-SBM chains, layer ``t`` seeded by ``derive_seed(seed, t)``."""
    return [run_dpsbm(A, replace(hyper, seed=derive_seed(hyper.seed, t)))
            for t, A in enumerate(network.layers, start=1)]


def combine_layer_traces(traces: list[ChainTrace]) -> ChainTrace:
    """Stack single-layer traces (same schedule) into one multiplex trace."""
    its = traces[0].iterations
    for tr in traces[1:]:
        if not np.array_equal(tr.iterations, its):
            raise ValueError("layer traces were run on different schedules")
    return ChainTrace(
        iterations=its.copy(),
        labels=np.concatenate([tr.labels for tr in traces], axis=1),
        node_counts=tuple(n for tr in traces for n in tr.node_counts),
    )
