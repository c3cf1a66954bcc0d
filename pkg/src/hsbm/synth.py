"""Planted multiplex SBM generators and the two simulation scenarios."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hsbm.types import LabelMatrix, MultiplexNetwork, validate_network

# friendship probabilities between extrovert / ambivert / introvert contestants
PAGEANT_ETA = np.array([[0.90, 0.75, 0.50],
                        [0.75, 0.60, 0.25],
                        [0.50, 0.25, 0.10]])
PAGEANT_WEIGHTS = (0.40, 0.35, 0.25)

MARKOV_ETA = np.array([[0.8, 0.1, 0.3],
                       [0.1, 0.9, 0.2],
                       [0.3, 0.2, 0.7]])
MARKOV_LAYERS = (2, 4, 8, 12)


@dataclass
class ScenarioConfig:
    node_counts: tuple[int, ...]
    weights: tuple[float, ...]
    eta: np.ndarray
    mechanism: str = "iid"
    retention: float = 1.0
    seed: int = 0

    def __post_init__(self):
        self.node_counts = tuple(int(n) for n in self.node_counts)
        self.weights = tuple(float(w) for w in self.weights)
        self.eta = np.asarray(self.eta, dtype=float)
        if not self.node_counts or min(self.node_counts) < 1:
            raise ValueError("need at least one layer with at least one node")
        w = np.array(self.weights)
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError(f"weights must be non-negative and sum to 1, got {self.weights}")
        k = len(self.weights)
        if self.eta.shape != (k, k):
            raise ValueError(f"eta must be {k}x{k}, got {self.eta.shape}")
        if not np.allclose(self.eta, self.eta.T) or self.eta.min() < 0 or self.eta.max() > 1:
            raise ValueError("eta must be symmetric with entries in [0, 1]")
        if self.mechanism not in ("iid", "markov"):
            raise ValueError(f"unknown label mechanism {self.mechanism!r}")
        if not 0 <= self.retention <= 1:
            raise ValueError("retention probability must lie in [0, 1]")

    @property
    def T(self) -> int:
        return len(self.node_counts)

    @property
    def k(self) -> int:
        return len(self.weights)


def sample_sbm_layer(z_t, eta, rng) -> np.ndarray:
    """Symmetric zero-diagonal adjacency with ``A_ij ~ Bern(eta[z_i, z_j])`` for ``i < j``."""
    z = np.asarray(z_t, dtype=np.int64)
    eta = np.asarray(eta, dtype=float)
    if z.size and (z.min() < 1 or z.max() > eta.shape[0]):
        raise ValueError(f"labels must lie in 1..{eta.shape[0]}")
    P = eta[np.ix_(z - 1, z - 1)]
    A = np.triu(rng.random(P.shape) < P, 1)
    return (A | A.T).astype(np.uint8)


def iid_layer_labels(config: ScenarioConfig, rng) -> LabelMatrix:
    return LabelMatrix([rng.choice(config.k, size=n, p=config.weights) + 1
                        for n in config.node_counts])


def markov_labels(config: ScenarioConfig, rng) -> LabelMatrix:
    """First layer i.i.d. from the weights; afterwards each node keeps its
    label with probability ``retention``, else moves to one of the other
    ``k - 1`` labels uniformly."""
    if config.k == 1 and config.retention < 1:
        raise ValueError("retention < 1 needs at least two labels")
    if len(set(config.node_counts)) != 1:
        raise ValueError("markov labels need the same node set in every layer")
    n = config.node_counts[0]
    layers = [rng.choice(config.k, size=n, p=config.weights) + 1]
    for _ in range(1, config.T):
        prev = layers[-1]
        move = rng.random(n) >= config.retention
        shift = rng.integers(1, config.k, size=n) if config.k > 1 else np.zeros(n, np.int64)
        nxt = np.where(move, (prev - 1 + shift) % config.k + 1, prev)
        layers.append(nxt)
    return LabelMatrix(layers)


def generate(config: ScenarioConfig) -> tuple[MultiplexNetwork, LabelMatrix]:
    rng = np.random.default_rng(config.seed)
    truth = markov_labels(config, rng) if config.mechanism == "markov" else iid_layer_labels(config, rng)
    net = validate_network([sample_sbm_layer(z, config.eta, rng) for z in truth])
    return net, truth


def scenario_config(name: str, **overrides) -> ScenarioConfig:
    """Default configuration of a named scenario.

    ``pageant``: 5 layers of 50 nodes, labels i.i.d. per layer.
    ``markov``: 50 nodes, 3 equally likely labels, retention 0.9, 4 layers
    unless ``layers`` is given. Overrides: ``layers``, ``nodes``,
    ``retention``, ``weights``, ``eta``, ``seed``.
    """
    if name == "pageant":
        base = dict(layers=5, nodes=50, weights=PAGEANT_WEIGHTS, eta=PAGEANT_ETA,
                    mechanism="iid", retention=1.0)
    elif name == "markov":
        base = dict(layers=4, nodes=50, weights=(1 / 3, 1 / 3, 1 / 3), eta=MARKOV_ETA,
                    mechanism="markov", retention=0.9)
    else:
        raise ValueError(f"unknown scenario {name!r} (expected 'pageant' or 'markov')")
    base["seed"] = 0
    unknown = set(overrides) - set(base)
    if unknown:
        raise ValueError(f"unknown scenario overrides: {sorted(unknown)}")
    base.update({k: v for k, v in overrides.items() if v is not None})
    nodes = base.pop("nodes")
    T = base.pop("layers")
    node_counts = tuple(nodes) if isinstance(nodes, Sequence) else (int(nodes),) * int(T)
    if len(node_counts) != T:
        raise ValueError(f"{len(node_counts)} node counts given for {T} layers")
    return ScenarioConfig(node_counts=node_counts, **base)


def build_scenario(name: str, **overrides) -> tuple[MultiplexNetwork, LabelMatrix]:
    """Simulate a named scenario; returns the network and its true labels."""
    return generate(scenario_config(name, **overrides))


def planted_config(n: int, k: int, p_in: float, p_out: float, layers: int = 1,
                   seed: int = 0) -> ScenarioConfig:
    """Equal-weight planted partition with i.i.d. labels per layer."""
    eta = np.full((k, k), p_out)
    np.fill_diagonal(eta, p_in)
    return ScenarioConfig((n,) * layers, (1 / k,) * k, eta, "iid", 1.0, seed)


def planted_layer(n: int, k: int, p_in: float, p_out: float, seed: int = 0):
    """Single layer with ``k`` equal contiguous blocks (exact sizes, not draws)."""
    rng = np.random.default_rng(seed)
    z = np.repeat(np.arange(1, k + 1), -(-n // k))[:n]
    eta = np.full((k, k), p_out)
    np.fill_diagonal(eta, p_in)
    return sample_sbm_layer(z, eta, rng), z
