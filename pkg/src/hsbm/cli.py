"""Command-line entry point: simulate, fit, evaluate and experiment."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from hsbm.dpsbm import combine_layer_traces, derive_seed, fit_per_layer
from hsbm.io import load_multiplex, read_labels_map, save_network, save_results
from hsbm.metrics import NMI_VARIANT, eta_posterior_mean, nmi_report, summarize
from hsbm.sampler import run_chain
from hsbm.synth import build_scenario
from hsbm.types import Hyperparameters, NetworkError

MODELS = ("hsbm", "dpsbm")
SCENARIOS = ("pageant", "markov")


def fit_model(model: str, network, hyper: Hyperparameters, truth=None):
    """Run one chain (HSBM) or one chain per layer (DP-SBM); returns (trace, report)."""
    if model == "hsbm":
        trace = run_chain(network, hyper)
        return trace, summarize(trace, truth)
    traces = fit_per_layer(network, hyper)
    trace = combine_layer_traces(traces)
    report = summarize(trace, truth)
    report.eta_mean = [eta_posterior_mean(tr) for tr in traces]
    return trace, report


def _hyper(args, seed=None) -> Hyperparameters:
    return Hyperparameters(alpha0=args.alpha0, gamma0=args.gamma0, alpha_eta=args.alpha_eta,
                           beta_eta=args.beta_eta, iter_max=args.iters, burnin=args.burnin,
                           thin=args.thin, seed=args.seed if seed is None else seed)


def _overrides(args) -> dict:
    return dict(layers=args.layers, nodes=args.nodes, retention=args.retention,
                weights=tuple(args.weights) if args.weights else None)


def _load(args, seed=None):
    if args.manifest is not None:
        return load_multiplex(args.manifest)
    return build_scenario(args.scenario, seed=args.seed if seed is None else seed, **_overrides(args))


def _source_meta(args) -> dict:
    if args.manifest is not None:
        return {"manifest": str(args.manifest)}
    return {"scenario": args.scenario, **{k: v for k, v in _overrides(args).items() if v is not None}}


def cmd_simulate(args) -> int:
    network, truth = build_scenario(args.scenario, seed=args.seed, **_overrides(args))
    path = save_network(args.out, network, truth, name=args.name)
    print(f"wrote {path}")
    return 0


def cmd_fit(args) -> int:
    network, truth = _load(args)
    hyper = _hyper(args)
    trace, report = fit_model(args.model, network, hyper, truth)
    meta = {"command": "fit", "model": args.model, "hyperparameters": asdict(hyper), **_source_meta(args)}
    save_results(trace, report, args.out, meta)
    line = f"{args.model}: {len(trace)} samples written to {args.out}"
    if report.nmi is not None:
        line += f"; aggregate NMI {report.nmi.aggregate:.4f}, avg slicewise {report.nmi.avg_slicewise:.4f}"
    print(line)
    return 0


def cmd_evaluate(args) -> int:
    _, truth = _load(args)
    if truth is None:
        raise NetworkError("no ground-truth labels: the manifest has no 'truth' entry")
    labels = read_labels_map(Path(args.results) / "labels_map.csv")
    r = nmi_report(labels, truth)
    rows = [f"{t},{float(v)!r}" for t, v in enumerate(r.slicewise, start=1)]
    rows += [f"avg_slicewise,{r.avg_slicewise!r}", f"aggregate,{r.aggregate!r}"]
    text = "layer,nmi\n" + "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "nmi.csv").write_text(text)
    sys.stdout.write(text)
    return 0


def _replicate(job):
    args, rep = job
    seed = derive_seed(args.seed, rep)
    network, truth = build_scenario(args.scenario, seed=seed, **_overrides(args))
    hyper = _hyper(args, seed)
    rows = []
    for model in MODELS:
        _, report = fit_model(model, network, hyper, truth)
        r = report.nmi
        rows.append([str(rep + 1), model, str(seed)] + [repr(float(v)) for v in r.slicewise]
                    + [repr(r.avg_slicewise), repr(r.aggregate)])
    return rows


def cmd_experiment(args) -> int:
    if args.manifest is not None:
        raise ValueError("experiment needs --scenario (replications re-simulate the network)")
    jobs = [(args, rep) for rep in range(args.reps)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_replicate, jobs))
    else:
        results = [_replicate(job) for job in jobs]
    T = len(results[0][0]) - 5
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = ",".join(["rep", "model", "seed"] + [f"slicewise_{t}" for t in range(1, T + 1)]
                      + ["avg_slicewise", "aggregate"])
    lines = [header] + [",".join(row) for rows in results for row in rows]
    (out / "comparison.csv").write_text("\n".join(lines) + "\n")
    meta = {"command": "experiment", "reps": args.reps, "nmi_variant": NMI_VARIANT,
            "hyperparameters": asdict(_hyper(args)), **_source_meta(args)}
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    agg = {m: np.mean([float(row[-1]) for rows in results for row in rows if row[1] == m]) for m in MODELS}
    print(f"{args.reps} replications: mean aggregate NMI hsbm {agg['hsbm']:.4f}, dpsbm {agg['dpsbm']:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsbm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p, manifest=True):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--scenario", choices=SCENARIOS)
        if manifest:
            g.add_argument("--manifest", type=Path)
        else:
            p.set_defaults(manifest=None)
        p.add_argument("--layers", type=int)
        p.add_argument("--nodes", type=int)
        p.add_argument("--retention", type=float)
        p.add_argument("--weights", type=float, nargs="+")
        p.add_argument("--seed", type=int, default=0)

    def sampler(p):
        d = Hyperparameters()
        p.add_argument("--iters", type=int, default=d.iter_max)
        p.add_argument("--burnin", type=int, default=None, help="default: iters // 2")
        p.add_argument("--thin", type=int, default=d.thin)
        p.add_argument("--alpha0", type=float, default=d.alpha0)
        p.add_argument("--gamma0", type=float, default=d.gamma0)
        p.add_argument("--alpha-eta", type=float, default=d.alpha_eta)
        p.add_argument("--beta-eta", type=float, default=d.beta_eta)

    p = sub.add_parser("simulate", help="write a scenario network, edge list and truth labels")
    source(p, manifest=False)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--name", default="network")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="run a sampler and save MAP labels, eta and the trace")
    p.add_argument("--model", choices=MODELS, default="hsbm")
    source(p)
    sampler(p)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="score saved MAP labels against ground truth")
    source(p)
    p.add_argument("--results", type=Path, required=True, help="directory holding labels_map.csv")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="replicated HSBM vs per-layer DP-SBM comparison")
    source(p)
    sampler(p)
    p.add_argument("--reps", type=int, default=8)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NetworkError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
