"""Manifest / edge-list reading and CSV result writing."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from hsbm.metrics import NMI_VARIANT
from hsbm.types import ChainTrace, LabelMatrix, MultiplexNetwork, NetworkError, SummaryReport, validate_network

log = logging.getLogger(__name__)

MANIFEST_KEYS = ("layers", "nodes", "edges", "truth")


@dataclass
class NetworkManifest:
    T: int
    node_counts: tuple[int, ...]
    edges: Path
    truth: Path | None = None

    def __post_init__(self):
        self.node_counts = tuple(int(n) for n in self.node_counts)
        if self.T < 1 or len(self.node_counts) != self.T:
            raise NetworkError(f"manifest lists {len(self.node_counts)} node counts for {self.T} layers")
        if min(self.node_counts) < 1:
            raise NetworkError("node counts must be positive")


def read_manifest(path) -> NetworkManifest:
    """Parse ``key value`` lines; file paths are relative to the manifest."""
    path = Path(path)
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        if key not in MANIFEST_KEYS:
            raise NetworkError(f"{path}:{lineno}: unknown manifest key {key!r}")
        fields[key] = value.strip()
    for key in ("layers", "nodes", "edges"):
        if key not in fields:
            raise NetworkError(f"{path}: manifest is missing {key!r}")
    try:
        T = int(fields["layers"])
        counts = tuple(int(x) for x in fields["nodes"].split())
    except ValueError as exc:
        raise NetworkError(f"{path}: bad layers/nodes entry ({exc})") from None
    if len(counts) == 1 and T > 1:
        counts = counts * T
    base = path.parent
    truth = base / fields["truth"] if fields.get("truth") else None
    return NetworkManifest(T, counts, base / fields["edges"], truth)


def write_manifest(path, manifest: NetworkManifest) -> None:
    path = Path(path)
    lines = [f"layers {manifest.T}",
             "nodes " + " ".join(str(n) for n in manifest.node_counts),
             f"edges {_relative(manifest.edges, path.parent)}"]
    if manifest.truth is not None:
        lines.append(f"truth {_relative(manifest.truth, path.parent)}")
    path.write_text("\n".join(lines) + "\n")


def _relative(p: Path, base: Path) -> str:
    try:
        return str(Path(p).resolve().relative_to(base.resolve()))
    except ValueError:
        return str(p)


def _triples(path: Path, node_counts: Sequence[int], what: str):
    T = len(node_counts)
    if not path.exists():
        raise NetworkError(f"{what} file not found: {path}")
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if len(parts) != 3:
                raise ValueError
            t, a, b = (int(x) for x in parts)
        except ValueError:
            raise NetworkError(f"{path}:{lineno}: malformed line {raw!r} (expected 3 integers)") from None
        if not 1 <= t <= T:
            raise NetworkError(f"{path}:{lineno}: layer index {t} out of range 1..{T}")
        yield lineno, t, a, b


def load_multiplex(manifest) -> tuple[MultiplexNetwork, LabelMatrix | None]:
    """Read the network (and truth labels, if listed) referenced by a manifest."""
    if not isinstance(manifest, NetworkManifest):
        manifest = read_manifest(manifest)
    counts = manifest.node_counts
    layers = [np.zeros((n, n), dtype=np.uint8) for n in counts]
    for lineno, t, i, j in _triples(manifest.edges, counts, "edge"):
        n = counts[t - 1]
        if not (1 <= i <= n and 1 <= j <= n):
            raise NetworkError(f"{manifest.edges}:{lineno}: node id out of range 1..{n} in layer {t}")
        if i == j:
            log.warning("%s:%d: self-loop on node %d in layer %d dropped", manifest.edges, lineno, i, t)
            continue
        layers[t - 1][i - 1, j - 1] = layers[t - 1][j - 1, i - 1] = 1
    network = validate_network(layers, counts)
    truth = None
    if manifest.truth is not None:
        z = [np.zeros(n, dtype=np.int64) for n in counts]
        for lineno, t, i, label in _triples(manifest.truth, counts, "truth"):
            n = counts[t - 1]
            if not 1 <= i <= n:
                raise NetworkError(f"{manifest.truth}:{lineno}: node id out of range 1..{n} in layer {t}")
            if label < 1:
                raise NetworkError(f"{manifest.truth}:{lineno}: labels must be positive")
            z[t - 1][i - 1] = label
        missing = [(t + 1, int(np.argmin(zt)) + 1) for t, zt in enumerate(z) if zt.min() == 0]
        if missing:
            t, i = missing[0]
            raise NetworkError(f"{manifest.truth}: no label for node {i} in layer {t}")
        truth = LabelMatrix(z)
    return network, truth


def save_network(out_dir, network: MultiplexNetwork, truth: LabelMatrix | None = None,
                 name: str = "network") -> Path:
    """Write ``<name>.txt`` (manifest), ``<name>_edges.txt`` and optionally ``<name>_truth.txt``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    edges = out / f"{name}_edges.txt"
    with edges.open("w") as fh:
        for t, A in enumerate(network, start=1):
            for i, j in zip(*np.nonzero(np.triu(A, 1))):
                fh.write(f"{t} {i + 1} {j + 1}\n")
    truth_path = None
    if truth is not None:
        truth.check_shape(network)
        truth_path = out / f"{name}_truth.txt"
        with truth_path.open("w") as fh:
            for t, z in enumerate(truth, start=1):
                for i, label in enumerate(z, start=1):
                    fh.write(f"{t} {i} {int(label)}\n")
    manifest_path = out / f"{name}.txt"
    write_manifest(manifest_path, NetworkManifest(network.T, network.node_counts, edges, truth_path))
    return manifest_path


def _num(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: str, rows) -> None:
    try:
        with path.open("w") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc.strerror}") from exc


def _eta_rows(eta_mean):
    # a single matrix is the shared connectivity; a list holds one matrix per layer
    blocks = [("all", eta_mean)] if isinstance(eta_mean, np.ndarray) else \
        [(str(t), e) for t, e in enumerate(eta_mean, start=1)]
    for scope, E in blocks:
        for k in range(E.shape[0]):
            for l in range(k, E.shape[1]):
                yield [scope, str(k + 1), str(l + 1), _num(E[k, l])]


def save_results(trace: ChainTrace, report: SummaryReport, out_dir, meta: dict | None = None) -> list[Path]:
    """Write the MAP labels, posterior mean connectivity, trace and run metadata."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"could not create {out}: {exc.strerror}") from exc
    written = []

    path = out / "labels_map.csv"
    _write_csv(path, "layer,node,label,confidence", (
        [str(t), str(i), str(int(label)), _num(c)]
        for t, (z, conf) in enumerate(zip(report.map_labels, report.confidence), start=1)
        for i, (label, c) in enumerate(zip(z, conf), start=1)))
    written.append(path)

    path = out / "eta_mean.csv"
    _write_csv(path, "layer,k,l,eta", _eta_rows(report.eta_mean))
    written.append(path)

    if report.nmi is not None:
        path = out / "nmi.csv"
        r = report.nmi
        rows = [[str(t), _num(v)] for t, v in enumerate(r.slicewise, start=1)]
        rows += [["avg_slicewise", _num(r.avg_slicewise)], ["aggregate", _num(r.aggregate)]]
        _write_csv(path, "layer,nmi", rows)
        written.append(path)

    path = out / "trace_labels.csv"
    offsets = np.cumsum([0, *trace.node_counts])
    _write_csv(path, "iteration,layer,node,label", (
        [str(int(it)), str(t + 1), str(i + 1), str(int(trace.labels[s, offsets[t] + i]))]
        for s, it in enumerate(trace.iterations)
        for t in range(len(trace.node_counts))
        for i in range(trace.node_counts[t])))
    written.append(path)

    path = out / "run_meta.json"
    info = dict(meta or {})
    info["nmi_variant"] = NMI_VARIANT
    info["retained_samples"] = len(trace)
    try:
        path.write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc.strerror}") from exc
    written.append(path)
    return written


def read_labels_map(path) -> LabelMatrix:
    """Inverse of the ``labels_map.csv`` writer."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1, usecols=(0, 1, 2), dtype=np.int64, ndmin=2)
    T = int(rows[:, 0].max())
    layers = []
    for t in range(1, T + 1):
        r = rows[rows[:, 0] == t]
        z = np.zeros(int(r[:, 1].max()), dtype=np.int64)
        z[r[:, 1] - 1] = r[:, 2]
        layers.append(z)
    return LabelMatrix(layers)
