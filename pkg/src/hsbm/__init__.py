"""Hierarchical stochastic block model for multiplex networks.

Slice samplers for the HSBM and the single-layer DP-SBM baseline, planted
benchmark generators and NMI-based evaluation.
"""

from hsbm.types import (
    ChainTrace,
    Hyperparameters,
    HsbmState,
    LabelMatrix,
    MultiplexNetwork,
    NetworkError,
    SummaryReport,
    validate_network,
)
from hsbm.sticks import (
    StickState,
    ensure_slice_coverage,
    extend_sticks,
    slice_sup,
    stick_transform,
)
from hsbm.sampler import init_state, run_chain, sweep
from hsbm.dpsbm import DpsbmState, dpsbm_sweep, fit_per_layer, run_dpsbm
from hsbm.synth import ScenarioConfig, build_scenario, sample_sbm_layer
from hsbm.metrics import NmiReport, map_labels, nmi, nmi_report, summarize

__version__ = "0.1.0"

__all__ = [
    "ChainTrace",
    "DpsbmState",
    "Hyperparameters",
    "HsbmState",
    "LabelMatrix",
    "MultiplexNetwork",
    "NetworkError",
    "NmiReport",
    "ScenarioConfig",
    "StickState",
    "SummaryReport",
    "build_scenario",
    "dpsbm_sweep",
    "ensure_slice_coverage",
    "extend_sticks",
    "fit_per_layer",
    "init_state",
    "map_labels",
    "nmi",
    "nmi_report",
    "run_chain",
    "run_dpsbm",
    "sample_sbm_layer",
    "slice_sup",
    "stick_transform",
    "summarize",
    "sweep",
    "validate_network",
]
