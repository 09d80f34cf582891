"""Scaled MSE of scalar quadratic SGD against the Lyapunov prediction, i.i.d. vs shuffling."""
import argparse
from pathlib import Path

import numpy as np

from effsgd.clt import CltSpec, solve_lyapunov
from effsgd.harness.plotting import emit_plot_script
from effsgd.harness.runner import SgdTrace, simulate
from effsgd.sequences import make_sequence, replica_seeds
from effsgd.sgdcore import StepSchedule, make_quadratic_scalar


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.9)
    ap.add_argument("--horizon", type=int, default=10**5)
    ap.add_argument("--replicas", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--out", default="results/clt_plateau")
    a = ap.parse_args()
    b = np.array([0.0, 2.0])
    model = make_quadratic_scalar(b)
    sched = StepSchedule("poly", a.alpha)
    trV = solve_lyapunov(CltSpec(model.hessian, np.var(b).reshape(1, 1), a.alpha)).trace()
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind in ("iid", "single_shuffle", "random_shuffle"):
        seqs = [make_sequence(kind, seed=s, n=2) for s in replica_seeds(a.seed, a.replicas)]
        ck, err2 = simulate(model, seqs, sched, a.horizon)
        tr = SgdTrace.from_errors(kind, ck, err2, sched(ck), {"alpha": a.alpha, "trace_V": trV})
        tr.to_csv(out / f"{kind}.csv")
        print(f"{kind}: scaled MSE at T = {tr.scaled_mse[-1]:.4f} (trace V = {trV:.3f})")
    emit_plot_script({k: out / f"{k}.csv" for k in ("iid", "single_shuffle", "random_shuffle")},
                     out / "plot.gp", f"alpha={a.alpha}")


if __name__ == "__main__":
    main()
