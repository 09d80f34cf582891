"""Command-line interface: ``python3 -m effsgd.harness.cli <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..avcov import exact_asym_cov, mc_asym_cov
from ..clt import CltSpec, empirical_clt_check, solve_lyapunov
from ..fmmc import fmmc_kernel
from ..kernels import load_kernel, nbrw_edge_kernel, save_kernel, slem
from ..sequences import make_sequence, replica_seeds
from ..sgdcore import StepSchedule, make_quadratic_scalar, synthetic_logistic_data, make_sum_nonconvex
from .config import ExperimentConfig
from .plotting import emit_plot_script
from .report import format_slem_table, reproduce_slem_table, run_ordering_report
from .runner import build_graph, build_kernel, simulate


def parse_graph(text: str):
    """``g1``, ``g2``, ``dolphins``, ``cycle:6``, ``path:5``, ``complete:4``, ``file:<path>``."""
    kind, _, arg = text.partition(":")
    if kind == "file":
        return build_graph({"kind": "file", "path": arg})
    if kind == "star":
        return build_graph({"kind": "star", "leaves": int(arg)})
    if kind == "random":
        n, _, seed = arg.partition(",")
        return build_graph({"kind": "random", "n": int(n), "seed": int(seed or 0)})
    spec = {"kind": kind}
    if arg:
        spec["n"] = int(arg)
    return build_graph(spec)


def parse_function(text: str, g):
    """``degrees``, ``indicator:<node>``, ``random:<d>:<seed>`` or a CSV file."""
    if text == "degrees":
        return g.degrees.astype(float)
    if text.startswith("indicator:"):
        v = np.zeros(g.n)
        v[int(text.split(":")[1])] = 1.0
        return v
    if text.startswith("random:"):
        _, d, seed = text.split(":")
        return np.random.default_rng(int(seed)).normal(size=(g.n, int(d)))
    return np.loadtxt(text, delimiter=",", ndmin=2)


def _cmd_build_kernel(a):
    g = parse_graph(a.graph)
    k = build_kernel(a.kernel, g)
    save_kernel(k, a.out)
    print(f"wrote {a.out} ({k.n} states, slem={slem(k):.6f})")


def _cmd_slem(a):
    k = load_kernel(a.matrix) if a.matrix else build_kernel(a.kernel, parse_graph(a.graph))
    print(f"{slem(k):.6f}")


def _cmd_fmmc(a):
    res = fmmc_kernel(parse_graph(a.graph), max_iters=a.max_iters)
    if a.out:
        save_kernel(res.kernel, a.out)
    print(f"slem={res.slem:.6f} iterations={res.iterations} converged={res.converged}")


def _cmd_av(a):
    g = parse_graph(a.graph)
    fn = parse_function(a.function, g)
    if a.kernel == "nbrw":
        k = nbrw_edge_kernel(g)
    else:
        k = build_kernel(a.kernel, g)
    if a.method == "exact":
        cov = exact_asym_cov(k, fn)
    else:
        kind = "nbrw_walk" if a.kernel == "nbrw" else "chain_walk"
        seqs = [make_sequence(kind, seed=s, kernel=None if kind == "nbrw_walk" else k, graph=g)
                for s in replica_seeds(a.seed, a.replicas)]
        cov = mc_asym_cov(seqs, fn, a.horizon, blocks=a.blocks, seed=a.seed)
    if a.out:
        cov.save(a.out)
    np.savetxt(sys.stdout, cov.sigma, fmt="%.10g", delimiter=",")


def _cmd_order(a):
    rep = run_ordering_report(ExperimentConfig.load(a.config), simulate=not a.no_sim)
    print("\n".join(rep.lines()))


def _cmd_run(a):
    from .runner import run_experiment
    cfg = ExperimentConfig.load(a.config)
    if a.out:
        cfg.output_dir = a.out
    traces = run_experiment(cfg, keep_replicas=False)
    for label, tr in traces.items():
        print(f"{label}: T={tr.t[-1]} mse={tr.mse[-1]:.6g} scaled_mse={tr.scaled_mse[-1]:.6g}")
    if cfg.output_dir:
        emit_plot_script({k: Path(cfg.output_dir) / f"{k}.csv" for k in traces},
                         Path(cfg.output_dir) / "plot.gp", cfg.name)


def _cmd_clt_check(a):
    b = np.array([float(x) for x in a.b.split(",")])
    model = make_quadratic_scalar(b)
    sched = StepSchedule("poly", a.alpha)
    seqs = [make_sequence(a.input, seed=s, n=b.size) for s in replica_seeds(a.seed, a.replicas)]
    _, _, thetas = simulate(model, seqs, sched, a.horizon, ckpts=[a.horizon], return_final=True)
    sigma = np.var(b).reshape(1, 1) if a.input == "iid" else np.zeros((1, 1))
    V = solve_lyapunov(CltSpec(model.hessian, sigma, a.alpha))
    rep = empirical_clt_check(thetas, model.theta_star, float(sched(a.horizon)), V)
    print(json.dumps(rep.summary(), indent=2))


def _cmd_gen_data(a):
    if a.kind == "logistic":
        X, y = synthetic_logistic_data(a.n, a.p or 108, a.flip, a.seed)
        np.savez(a.out, X=X, y=y)
    else:
        m = make_sum_nonconvex(a.n, a.p or 10, a.seed)
        np.savez(a.out, a=m.a, D=m.D, b=m.b, theta_star=m.theta_star)
    print(f"wrote {a.out}")


def _cmd_slem_table(a):
    rows = reproduce_slem_table()
    print(format_slem_table(rows))
    return 0 if all(r.fixture_ok for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="effsgd")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build-kernel", help="build a transition kernel and save it as CSV")
    s.add_argument("--graph", default="g2")
    s.add_argument("--kernel", default="mhrw")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_build_kernel)

    s = sub.add_parser("slem", help="second largest eigenvalue modulus")
    s.add_argument("--graph", default="g2")
    s.add_argument("--kernel", default="mhrw")
    s.add_argument("--matrix", help="kernel CSV written by build-kernel")
    s.set_defaults(func=_cmd_slem)

    s = sub.add_parser("fmmc", help="fastest mixing chain by projected subgradient")
    s.add_argument("--graph", default="g2")
    s.add_argument("--max-iters", type=int, default=5000)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_fmmc)

    s = sub.add_parser("av", help="asymptotic covariance of a test function")
    s.add_argument("--graph", default="g2")
    s.add_argument("--kernel", default="srw", help="srw, mhrw, mhrw_modified, fmmc or nbrw")
    s.add_argument("--function", default="degrees")
    s.add_argument("--method", choices=("exact", "mc"), default="exact")
    s.add_argument("--horizon", type=int, default=10**6)
    s.add_argument("--replicas", type=int, default=20)
    s.add_argument("--blocks", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_av)

    s = sub.add_parser("order", help="ordering report for the first two inputs of a config")
    s.add_argument("--config", required=True)
    s.add_argument("--no-sim", action="store_true")
    s.set_defaults(func=_cmd_order)

    s = sub.add_parser("run", help="run an experiment config")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_run)

    s = sub.add_parser("clt-check", help="scalar quadratic CLT check")
    s.add_argument("--b", default="0,2")
    s.add_argument("--input", default="iid", choices=("iid", "single_shuffle", "random_shuffle"))
    s.add_argument("--alpha", type=float, default=0.9)
    s.add_argument("--horizon", type=int, default=10**5)
    s.add_argument("--replicas", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_cmd_clt_check)

    s = sub.add_parser("gen-data", help="generate synthetic objective data")
    s.add_argument("--kind", choices=("logistic", "sum_nonconvex"), default="logistic")
    s.add_argument("--n", type=int, default=62)
    s.add_argument("--p", type=int)
    s.add_argument("--flip", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_gen_data)

    s = sub.add_parser("slem-table", help="SLEMs of the embedded G1/G2 chains")
    s.set_defaults(func=_cmd_slem_table)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return int(args.func(args) or 0)


if __name__ == "__main__":
    raise SystemExit(main())
