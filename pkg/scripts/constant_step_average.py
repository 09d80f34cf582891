"""Averaged constant-step linear iteration driven by a two-state chain."""
import argparse

import numpy as np

from effsgd.avcov import exact_asym_cov
from effsgd.clt import CltSpec, averaged_covariance, constant_step_average
from effsgd.kernels import from_matrix
from effsgd.sequences import ChainWalk, replica_seeds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--flip", type=float, default=0.25, help="switching probability of the chain")
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--horizon", type=int, default=10**6)
    ap.add_argument("--replicas", type=int, default=100)
    ap.add_argument("--seed", type=int, default=13)
    a = ap.parse_args()
    p = a.flip
    k = from_matrix(np.array([[1 - p, p], [p, 1 - p]]), "two_state")
    b = np.array([0.0, 1.0])
    target = averaged_covariance(CltSpec(1.0, exact_asym_cov(k, b).sigma, constant_step=True)).trace()
    means = np.array([constant_step_average(b[ChainWalk(k, s).take(a.horizon)], a.gamma)
                      for s in replica_seeds(a.seed, a.replicas)])
    est = a.horizon * means.var(ddof=1)
    se = est * np.sqrt(2 / (a.replicas - 1))
    print(f"t*Var(theta-bar) = {est:.4f} +- {se:.4f}; predicted {target:.4f}")


if __name__ == "__main__":
    main()
