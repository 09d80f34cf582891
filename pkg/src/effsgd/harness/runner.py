"""Build graphs, kernels, objectives and sequences from a config; run SGD replicas."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import graphs as gr
from ..fixtures import MATRICES
from ..fmmc import fmmc_kernel
from ..kernels import (TransitionKernel, from_matrix, mhrw_kernel, peskun_modify,
                       srw_kernel)
from ..sequences import InputSequence, make_sequence, replica_seeds
from ..sgdcore import (AdamState, NesterovState, ObjectiveModel, StepSchedule,
                       adam_step, make_logistic_ridge, make_quadratic_scalar,
                       make_sum_nonconvex, nasgd_step, sgd_step, synthetic_logistic_data)
from .config import ConfigError, ExperimentConfig, SequenceSpec

CSV_HEADER = "t,mse,scaled_mse"


def build_graph(spec: dict) -> gr.Graph:
    kind = spec.get("kind")
    if kind == "g1":
        return gr.graph_g1()
    if kind == "g2":
        return gr.graph_g2()
    if kind == "dolphins":
        return gr.dolphins_standin(spec.get("seed", 62))
    if kind == "cycle":
        return gr.cycle_graph(spec["n"])
    if kind == "path":
        return gr.path_graph(spec["n"])
    if kind == "complete":
        return gr.complete_graph(spec["n"])
    if kind == "star":
        return gr.star_graph(spec["leaves"])
    if kind == "random":
        return gr.random_connected_graph(spec["n"], m=spec.get("m"), p=spec.get("p"),
                                         seed=spec.get("seed", 0))
    if kind == "file":
        return gr.load_edge_list(spec["path"])
    raise ConfigError(f"unknown graph kind {kind!r}")


def build_kernel(name: str, g: gr.Graph) -> TransitionKernel:
    """``srw``, ``mhrw``, ``mhrw_modified``, ``fmmc`` or ``fixture:<G1|G2>:<kind>``."""
    if name == "srw":
        return srw_kernel(g)
    if name == "mhrw":
        return mhrw_kernel(g)
    if name == "mhrw_modified":
        return peskun_modify(mhrw_kernel(g))
    if name == "fmmc":
        return fmmc_kernel(g).kernel
    if name.startswith("fixture:"):
        _, gname, kind = name.split(":")
        P = MATRICES[(gname, kind)]
        # two-decimal fixtures are renormalised so that rows sum to one
        return from_matrix(P / P.sum(axis=1, keepdims=True), name, g)
    raise ConfigError(f"unknown kernel {name!r}")


def build_objective(spec: dict, g: gr.Graph | None = None) -> ObjectiveModel:
    kind = spec["kind"]
    params = dict(spec.get("params", {}))
    seed = spec.get("seed", 0)
    n = params.pop("n", g.n if g is not None else None)
    if kind == "quadratic_scalar":
        b = params.get("b", "degrees")
        if isinstance(b, str):
            if b == "degrees":
                b = g.degrees.astype(float)
            elif b == "index":
                b = np.arange(1, n + 1, dtype=float)
            else:
                raise ConfigError(f"unknown b rule {b!r}")
        elif isinstance(b, dict) and "indicator" in b:
            vec = np.zeros(n)
            vec[list(b["indicator"])] = 1.0
            b = vec
        return make_quadratic_scalar(np.asarray(b, dtype=float))
    if kind == "logistic_ridge":
        X, y = synthetic_logistic_data(n, params.get("p", 108), params.get("flip", 0.1), seed)
        return make_logistic_ridge(X, y)
    if kind == "sum_nonconvex":
        return make_sum_nonconvex(n, params.get("p", 10), seed)
    raise ConfigError(f"unknown objective kind {kind!r}")


def sampling_weights(seq: InputSequence) -> np.ndarray | None:
    """``1/(n pi_i)`` for non-uniform limiting laws, ``None`` when no reweighting is needed."""
    pi = seq.limiting_dist
    if np.all(pi == pi[0]):
        return None
    return 1.0 / (pi.size * pi)


def checkpoints(T: int) -> np.ndarray:
    """``ceil(10^(k/8))`` up to ``T``, always including ``T``."""
    kmax = int(math.floor(8 * math.log10(T))) + 1 if T > 1 else 0
    pts = {math.ceil(10 ** (k / 8)) for k in range(kmax + 1)}
    pts = sorted(p for p in pts if p <= T)
    if not pts or pts[-1] != T:
        pts.append(T)
    return np.array(pts, dtype=np.int64)


def simulate(model: ObjectiveModel, seqs: list[InputSequence], schedule: StepSchedule,
             T: int, optimizer: str = "sgd", theta0=None, ckpts=None,
             chunk: int = 2048, beta: float = 0.5, return_final: bool = False):
    """Run one replica per sequence for ``T`` steps.

    Returns ``(ckpts, err2)`` with ``err2[k, r] = |theta_t - theta*|^2`` at
    ``t = ckpts[k]`` for replica ``r``. ``return_final`` appends the final
    ``R x d`` iterates.
    """
    R, d = len(seqs), model.d
    ckpts = checkpoints(T) if ckpts is None else np.asarray(ckpts)
    th0 = np.zeros(d) if theta0 is None else np.broadcast_to(np.asarray(theta0, float), (d,))
    th0 = model.project(th0[None, :])[0]
    thetas = np.repeat(th0[None, :], R, axis=0)
    weights = sampling_weights(seqs[0])
    if optimizer == "nasgd":
        state = NesterovState.start(thetas)
    elif optimizer == "adam":
        state = AdamState.start(thetas)
    elif optimizer == "sgd":
        state = None
    else:
        raise ConfigError(f"unknown optimizer {optimizer!r}")
    err2 = np.empty((len(ckpts), R))
    nxt, t = 0, 0
    while t < T:
        m = min(chunk, T - t)
        block = np.stack([s.take(m) for s in seqs])
        gam = schedule(np.arange(t + 1, t + m + 1))
        for j in range(m):
            x = block[:, j]
            if optimizer == "sgd":
                thetas = sgd_step(thetas, x, gam[j], model, weights)
            elif optimizer == "nasgd":
                state = nasgd_step(state, x, gam[j], model, weights, beta)
                thetas = state.theta
            else:
                state = adam_step(state, x, gam[j], model, weights)
                thetas = state.theta
            t += 1
            if nxt < len(ckpts) and t == ckpts[nxt]:
                err2[nxt] = np.sum((thetas - model.theta_star) ** 2, axis=1)
                nxt += 1
    return (ckpts, err2, thetas) if return_final else (ckpts, err2)


@dataclass
class SgdTrace:
    label: str
    t: np.ndarray
    mse: np.ndarray
    scaled_mse: np.ndarray
    stderr: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    per_replica: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_errors(cls, label, t, err2, gamma, meta=None, keep=True):
        err2 = np.atleast_2d(err2)
        mse = err2.mean(axis=1)
        se = err2.std(axis=1, ddof=1) / np.sqrt(err2.shape[1]) if err2.shape[1] > 1 else None
        return cls(label, np.asarray(t), mse, mse / gamma, se, dict(meta or {}),
                   err2 if keep else None)

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w") as fh:
            fh.write(CSV_HEADER + "\n")
            for t, m, s in zip(self.t, self.mse, self.scaled_mse):
                fh.write(f"{int(t)},{m:.17g},{s:.17g}\n")
        path.with_suffix(".json").write_text(json.dumps(self.meta, indent=2, default=str))

    @classmethod
    def read_csv(cls, path: str | Path, label: str = "") -> "SgdTrace":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(label or Path(path).stem, data[:, 0].astype(np.int64), data[:, 1], data[:, 2])

    def at(self, t: int) -> float:
        return float(self.mse[np.searchsorted(self.t, t)])


def mean_trace(traces: list[SgdTrace], label: str | None = None) -> SgdTrace:
    """Pointwise arithmetic mean of traces sharing a checkpoint grid."""
    t = traces[0].t
    for tr in traces[1:]:
        if not np.array_equal(tr.t, t):
            raise ValueError("traces use different checkpoints")
    mse = np.mean([tr.mse for tr in traces], axis=0)
    scaled = np.mean([tr.scaled_mse for tr in traces], axis=0)
    return SgdTrace(label or traces[0].label, t, mse, scaled, meta=dict(traces[0].meta))


@dataclass
class Workspace:
    """Objects a config resolves to, cached so kernels are built once."""

    cfg: ExperimentConfig
    graph: gr.Graph
    model: ObjectiveModel
    schedule: StepSchedule
    kernels: dict = field(default_factory=dict)

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "Workspace":
        g = build_graph(cfg.graph)
        model = build_objective(cfg.objective, g)
        if model.n != g.n and any(s.kind in ("chain_walk", "nbrw_walk") for s in cfg.sequences):
            raise ConfigError(f"objective has {model.n} components, graph has {g.n} nodes")
        return cls(cfg, g, model, StepSchedule(**cfg.schedule))

    def kernel(self, name: str) -> TransitionKernel:
        if name not in self.kernels:
            self.kernels[name] = build_kernel(name, self.graph)
        return self.kernels[name]

    def sequences(self, spec: SequenceSpec) -> list[InputSequence]:
        seed = self.cfg.seed if spec.seed is None else spec.seed
        kernel = self.kernel(spec.kernel) if spec.kind == "chain_walk" else None
        return [make_sequence(spec.kind, seed=s, kernel=kernel, graph=self.graph,
                              n=self.model.n, batch_size=spec.batch_size)
                for s in replica_seeds(seed, self.cfg.replicas)]


def run_experiment(cfg: ExperimentConfig, keep_replicas: bool = True) -> dict[str, SgdTrace]:
    """Run every configured sequence with paired replica seeds; write CSVs if configured."""
    ws = Workspace.from_config(cfg)
    out = {}
    h = cfg.config_hash()
    for spec in cfg.sequences:
        ck, err2 = simulate(ws.model, ws.sequences(spec), ws.schedule, cfg.horizon,
                            cfg.optimizer, cfg.theta0)
        meta = {"label": spec.label, "kind": spec.kind, "kernel": spec.kernel,
                "seed": cfg.seed if spec.seed is None else spec.seed,
                "replicas": cfg.replicas, "config_hash": h,
                "theta_star": ws.model.theta_star.tolist()}
        out[spec.label] = SgdTrace.from_errors(spec.label, ck, err2, ws.schedule(ck), meta,
                                               keep_replicas)
    if cfg.output_dir:
        d = Path(cfg.output_dir)
        d.mkdir(parents=True, exist_ok=True)
        cfg.save(d / "config.json")
        for label, tr in out.items():
            tr.to_csv(d / f"{label}.csv")
    return out
