"""Walks, shuffling and i.i.d. inputs on the 62-node stand-in graph for SGD, NaSGD and ADAM."""
import argparse
from pathlib import Path

from effsgd.harness.config import ExperimentConfig, SequenceSpec
from effsgd.harness.plotting import emit_plot_script
from effsgd.harness.runner import run_experiment

ALL = [SequenceSpec("nbrw_walk"), SequenceSpec("chain_walk", kernel="srw"),
       SequenceSpec("iid"), SequenceSpec("single_shuffle"), SequenceSpec("random_shuffle")]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=int, default=10**4)
    ap.add_argument("--replicas", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--graph", default="dolphins", help="dolphins stand-in, or an edge-list path")
    ap.add_argument("--out", default="results/input_comparison")
    a = ap.parse_args()
    graph = {"kind": "dolphins"} if a.graph == "dolphins" else {"kind": "file", "path": a.graph}
    for obj in ("logistic_ridge", "sum_nonconvex"):
        for opt in ("sgd", "nasgd", "adam"):
            out = Path(a.out) / f"{obj}_{opt}"
            seqs = ALL if opt == "sgd" else ALL[:2]
            cfg = ExperimentConfig(name=f"{obj}_{opt}", graph=graph,
                                   objective={"kind": obj, "seed": a.seed}, optimizer=opt,
                                   sequences=seqs, horizon=a.horizon, replicas=a.replicas,
                                   seed=a.seed, output_dir=str(out))
            traces = run_experiment(cfg, keep_replicas=False)
            emit_plot_script({s.label: out / f"{s.label}.csv" for s in seqs}, out / "plot.gp", cfg.name)
            print(cfg.name + ": " + " ".join(f"{k}={v.mse[-1]:.4e}" for k, v in traces.items()))


if __name__ == "__main__":
    main()
