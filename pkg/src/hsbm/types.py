"""Shared domain types: networks, label matrices, sampler state and traces.

Groups, communities and node indices exposed by these types are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np


class NetworkError(ValueError):
    """Raised when an adjacency tensor or label matrix is malformed."""


@dataclass(frozen=True, eq=False)
class MultiplexNetwork:
    """T symmetric binary adjacency layers, possibly of different sizes."""

    layers: tuple[np.ndarray, ...]

    @property
    def T(self) -> int:
        return len(self.layers)

    @property
    def node_counts(self) -> tuple[int, ...]:
        return tuple(int(A.shape[0]) for A in self.layers)

    def __getitem__(self, t: int) -> np.ndarray:
        return self.layers[t]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.layers)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiplexNetwork):
            return NotImplemented
        return self.T == other.T and all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.layers, other.layers)
        )

    def n_edges(self) -> tuple[int, ...]:
        return tuple(int(A.sum()) // 2 for A in self.layers)


def validate_network(raw, node_counts: Sequence[int] | None = None) -> MultiplexNetwork:
    """Build a :class:`MultiplexNetwork` from a sequence of square 0/1 matrices.

    The diagonal is zeroed and each layer is symmetrized by logical OR of
    ``A[i, j]`` and ``A[j, i]``. Entries other than 0 or 1 are rejected.
    """
    if isinstance(raw, MultiplexNetwork):
        raw = raw.layers
    if isinstance(raw, np.ndarray) and raw.ndim == 2:
        raw = [raw]
    mats = list(raw)
    if len(mats) == 0:
        raise NetworkError("network must have at least one layer (T=0)")
    if node_counts is not None and len(node_counts) != len(mats):
        raise NetworkError(
            f"got {len(mats)} layers but {len(node_counts)} node counts"
        )
    layers = []
    for t, M in enumerate(mats):
        A = np.asarray(M)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise NetworkError(f"layer {t + 1} is not square: shape {A.shape}")
        if A.shape[0] < 1:
            raise NetworkError(f"layer {t + 1} has no nodes")
        if node_counts is not None and A.shape[0] != node_counts[t]:
            raise NetworkError(
                f"layer {t + 1} has {A.shape[0]} nodes, expected {node_counts[t]}"
            )
        if not np.all((A == 0) | (A == 1)):
            raise NetworkError(f"layer {t + 1} has non-binary entries")
        B = (A != 0) | (A.T != 0)
        np.fill_diagonal(B, False)
        B = B.astype(np.uint8)
        B.setflags(write=False)
        layers.append(B)
    return MultiplexNetwork(tuple(layers))


class LabelMatrix:
    """Per-layer positive integer label vectors (ragged across layers)."""

    def __init__(self, layers: Sequence[Sequence[int]]):
        arrs = []
        for t, z in enumerate(layers):
            a = np.array(z, dtype=np.int64).reshape(-1)
            if a.size and a.min() < 1:
                raise NetworkError(f"layer {t + 1} has non-positive labels")
            arrs.append(a)
        self.layers: tuple[np.ndarray, ...] = tuple(arrs)

    @classmethod
    def from_flat(cls, flat: np.ndarray, node_counts: Sequence[int]) -> LabelMatrix:
        offsets = np.cumsum([0, *node_counts])
        return cls([flat[offsets[t]:offsets[t + 1]] for t in range(len(node_counts))])

    @property
    def T(self) -> int:
        return len(self.layers)

    @property
    def node_counts(self) -> tuple[int, ...]:
        return tuple(len(z) for z in self.layers)

    def n_communities(self) -> tuple[int, ...]:
        """Number of distinct labels K_t in each layer."""
        return tuple(len(np.unique(z)) for z in self.layers)

    def flat(self) -> np.ndarray:
        return np.concatenate(self.layers) if self.layers else np.zeros(0, np.int64)

    def check_shape(self, network: MultiplexNetwork) -> None:
        if self.node_counts != network.node_counts:
            raise NetworkError(
                f"label shape {self.node_counts} does not match network "
                f"{network.node_counts}"
            )

    def __getitem__(self, t: int) -> np.ndarray:
        return self.layers[t]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.layers)

    def __len__(self) -> int:
        return len(self.layers)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelMatrix):
            return NotImplemented
        return self.node_counts == other.node_counts and all(
            np.array_equal(a, b) for a, b in zip(self.layers, other.layers)
        )

    def __repr__(self) -> str:
        return f"LabelMatrix(T={self.T}, node_counts={self.node_counts})"


@dataclass(frozen=True)
class Hyperparameters:
    """Prior hyperparameters and the run schedule.

    ``burnin`` defaults to ``iter_max // 2``.
    """

    alpha0: float = 5.0
    gamma0: float = 5.0
    alpha_eta: float = 1.0
    beta_eta: float = 1.0
    iter_max: int = 1000
    burnin: int | None = None
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha0", "gamma0", "alpha_eta", "beta_eta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.iter_max < 1:
            raise ValueError("iter_max must be at least 1")
        if self.burnin is None:
            object.__setattr__(self, "burnin", self.iter_max // 2)
        if self.burnin < 0 or self.burnin >= self.iter_max:
            raise ValueError(
                f"burnin must satisfy 0 <= burnin < iter_max "
                f"(got burnin={self.burnin}, iter_max={self.iter_max})"
            )
        if self.thin < 1:
            raise ValueError("thin must be at least 1")

    def n_retained(self) -> int:
        return len(range(self.burnin, self.iter_max, self.thin))


@dataclass
class HsbmState:
    """Full latent state of the HSBM slice sampler.

    ``g[t]`` holds 1-based group indices per node, ``k[t]`` the 1-based
    community served to each of the ``G^cap_t`` represented groups. Stick
    fractions determine the weights ``gamma_t = F(gamma_frac[t])`` and
    ``pi = F(pi_frac)``. ``eta`` is kept as a full symmetric
    ``K^cap x K^cap`` matrix; only its upper triangle is ever sampled.
    """

    g: list[np.ndarray]
    k: list[np.ndarray]
    u: list[np.ndarray]
    v: list[np.ndarray]
    gamma_frac: list[np.ndarray]
    pi_frac: np.ndarray
    eta: np.ndarray

    @property
    def T(self) -> int:
        return len(self.g)

    @property
    def g_cap(self) -> tuple[int, ...]:
        return tuple(len(x) for x in self.gamma_frac)

    @property
    def k_cap(self) -> int:
        return len(self.pi_frac)

    def z(self) -> LabelMatrix:
        return LabelMatrix([k[g - 1] for g, k in zip(self.g, self.k)])

    def copy(self) -> HsbmState:
        return HsbmState(
            g=[x.copy() for x in self.g],
            k=[x.copy() for x in self.k],
            u=[x.copy() for x in self.u],
            v=[x.copy() for x in self.v],
            gamma_frac=[x.copy() for x in self.gamma_frac],
            pi_frac=self.pi_frac.copy(),
            eta=self.eta.copy(),
        )


@dataclass
class ChainTrace:
    """Retained post-burn-in samples of a chain.

    ``labels`` is an ``(S, sum n_t)`` array of flattened label matrices;
    ``eta_samples[s]`` is the connectivity restricted to the communities
    ``1..max(z)`` in use at that sweep.
    """

    iterations: np.ndarray
    labels: np.ndarray
    node_counts: tuple[int, ...]
    eta_samples: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.iterations)

    def sample(self, s: int) -> LabelMatrix:
        return LabelMatrix.from_flat(self.labels[s], self.node_counts)

    def samples(self) -> Iterator[LabelMatrix]:
        for s in range(len(self)):
            yield self.sample(s)

    def layer_labels(self, t: int) -> np.ndarray:
        """``(S, n_t)`` label history of layer ``t`` (0-based layer index)."""
        off = int(np.sum(self.node_counts[:t]))
        return self.labels[:, off:off + self.node_counts[t]]


@dataclass
class SummaryReport:
    map_labels: LabelMatrix
    confidence: list[np.ndarray]
    eta_mean: np.ndarray
    nmi: object | None = None
