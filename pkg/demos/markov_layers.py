"""HSBM against per-layer DP-SBM on the markov scenario as the number of layers grows.

Labels persist from layer to layer with probability 0.9, so sharing
communities across layers should help more the more layers there are.
"""

import argparse

from hsbm import Hyperparameters, build_scenario
from hsbm.cli import fit_model

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--layers", type=int, nargs="+", default=[2, 4, 8])
parser.add_argument("--iters", type=int, default=600)
parser.add_argument("--seed", type=int, default=1)
args = parser.parse_args()

print("T  model  avg-slicewise  aggregate")
for T in args.layers:
    net, truth = build_scenario("markov", layers=T, seed=args.seed)
    hyper = Hyperparameters(iter_max=args.iters, seed=args.seed)
    for model in ("hsbm", "dpsbm"):
        r = fit_model(model, net, hyper, truth)[1].nmi
        print(f"{T:<2d} {model:6s} {r.avg_slicewise:13.3f}  {r.aggregate:9.3f}")
