"""NMI scores, MAP labels and posterior summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hsbm.types import ChainTrace, LabelMatrix, MultiplexNetwork, NetworkError, SummaryReport

NMI_VARIANT = "arithmetic"  # 2 I(X;Y) / (H(X) + H(Y)), natural log


@dataclass
class NmiReport:
    slicewise: np.ndarray
    avg_slicewise: float
    aggregate: float


def _entropy(counts: np.ndarray) -> float:
    # sorted so the sum does not depend on the order of the cells
    p = np.sort(counts[counts > 0]) / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(x, y) -> float:
    """Normalized mutual information ``2 I(X;Y) / (H(X) + H(Y))``.

    Two single-cluster labelings score 1; exactly one single-cluster
    labeling scores 0.
    """
    x = np.asarray(x).reshape(-1)
    y = np.asarray(y).reshape(-1)
    if len(x) != len(y):
        raise ValueError(f"label vectors differ in length ({len(x)} vs {len(y)})")
    if len(x) == 0:
        raise ValueError("label vectors are empty")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    table = np.zeros((xi.max() + 1, yi.max() + 1))
    np.add.at(table, (xi, yi), 1)
    hx = _entropy(table.sum(axis=1))
    hy = _entropy(table.sum(axis=0))
    if hx == 0 and hy == 0:
        return 1.0
    if hx == 0 or hy == 0:
        return 0.0
    hx, hy = min(hx, hy), max(hx, hy)
    mi = hx + hy - _entropy(table.ravel())
    return float(np.clip(2.0 * mi / (hx + hy), 0.0, 1.0))


def nmi_report(estimate: LabelMatrix, truth: LabelMatrix) -> NmiReport:
    if estimate.node_counts != truth.node_counts:
        raise NetworkError(
            f"estimate shape {estimate.node_counts} != truth shape {truth.node_counts}")
    slicewise = np.array([nmi(a, b) for a, b in zip(estimate, truth)])
    return NmiReport(slicewise=slicewise, avg_slicewise=float(slicewise.mean()),
                     aggregate=nmi(estimate.flat(), truth.flat()))


def map_labels(trace: ChainTrace) -> tuple[LabelMatrix, list[np.ndarray]]:
    """Most frequent label per node over the retained samples, with its frequency.

    Ties go to the smallest label.
    """
    if len(trace) == 0:
        raise ValueError("trace holds no samples")
    L = trace.labels
    K = int(L.max())
    S, N = L.shape
    freq = np.zeros((N, K + 1), dtype=np.int64)
    np.add.at(freq, (np.broadcast_to(np.arange(N), (S, N)), L), 1)
    best = freq.argmax(axis=1)
    conf = freq[np.arange(N), best] / S
    labels = LabelMatrix.from_flat(best, trace.node_counts)
    offsets = np.cumsum([0, *trace.node_counts])
    return labels, [conf[offsets[t]:offsets[t + 1]] for t in range(len(trace.node_counts))]


def posterior_nmi_trace(trace: ChainTrace, truth: LabelMatrix) -> list[NmiReport]:
    if trace.node_counts != truth.node_counts:
        raise NetworkError(
            f"trace shape {trace.node_counts} != truth shape {truth.node_counts}")
    return [nmi_report(z, truth) for z in trace.samples()]


def consecutive_nmi(trace: ChainTrace) -> np.ndarray:
    """Aggregate NMI between each retained sample and the next."""
    return np.array([nmi(trace.labels[s], trace.labels[s + 1]) for s in range(len(trace) - 1)])


def per_layer_eta_estimate(network: MultiplexNetwork, labels: LabelMatrix) -> list[np.ndarray]:
    """Empirical block densities per layer; blocks without node pairs are NaN.

    Matrices are ``K x K`` with ``K`` the largest label over all layers.
    """
    labels.check_shape(network)
    K = max(int(z.max()) for z in labels)
    out = []
    for A, z in zip(network, labels):
        Y = np.zeros((len(z), K))
        Y[np.arange(len(z)), z - 1] = 1
        sizes = Y.sum(axis=0)
        edges = Y.T @ A.astype(float) @ Y
        pairs = np.outer(sizes, sizes) - np.diag(sizes)
        with np.errstate(invalid="ignore", divide="ignore"):
            est = np.where(pairs > 0, edges / pairs, np.nan)
        out.append(est)
    return out


def eta_posterior_mean(trace: ChainTrace) -> np.ndarray:
    """Entrywise mean of the retained connectivity samples (NaN where never defined)."""
    if not trace.eta_samples:
        return np.zeros((0, 0))
    K = max(e.shape[0] for e in trace.eta_samples)
    total = np.zeros((K, K))
    count = np.zeros((K, K))
    for e in trace.eta_samples:
        k = e.shape[0]
        total[:k, :k] += e
        count[:k, :k] += 1
    with np.errstate(invalid="ignore"):
        return np.where(count > 0, total / np.maximum(count, 1), np.nan)


def summarize(trace: ChainTrace, truth: LabelMatrix | None = None) -> SummaryReport:
    labels, conf = map_labels(trace)
    report = nmi_report(labels, truth) if truth is not None else None
    return SummaryReport(map_labels=labels, confidence=conf,
                         eta_mean=eta_posterior_mean(trace), nmi=report)
