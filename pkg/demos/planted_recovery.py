"""Fit both samplers to one planted three-block layer and report MAP accuracy."""

import argparse

from hsbm import Hyperparameters, map_labels, nmi, run_chain, run_dpsbm, validate_network
from hsbm.synth import planted_layer

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--nodes", type=int, default=150)
parser.add_argument("--iters", type=int, default=1000)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

A, truth = planted_layer(args.nodes, 3, 0.8, 0.1, seed=args.seed)
hyper = Hyperparameters(iter_max=args.iters, seed=args.seed)

for name, trace in (("dpsbm", run_dpsbm(A, hyper)), ("hsbm", run_chain(validate_network([A]), hyper))):
    labels, conf = map_labels(trace)
    print(f"{name:6s} MAP NMI {nmi(labels[0], truth):.3f}  "
          f"communities {labels.n_communities()[0]}  mean confidence {conf[0].mean():.3f}")
