"""Transition kernels on graphs: SRW, Metropolis, Peskun modification, NBRW lift.

All matrices are dense; the exact-covariance paths are meant for a few
hundred states at most.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graphs import Graph, degree_distribution

ROW_TOL = 1e-12
STAT_TOL = 1e-10


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class TransitionKernel:
    """Row-stochastic matrix with its stationary law and structural flags."""

    P: np.ndarray
    pi: np.ndarray
    reversible: bool = False
    doubly_stochastic: bool = False
    name: str = ""
    graph: Graph | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def check(self, graph: Graph | None = None) -> None:
        """Raise :class:`KernelError` if any structural invariant fails."""
        P, pi = self.P, self.pi
        if np.any(P < 0):
            raise KernelError("negative entries")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > ROW_TOL:
            raise KernelError("rows do not sum to one")
        if np.max(np.abs(pi @ P - pi)) > STAT_TOL:
            raise KernelError("pi is not stationary")
        if self.reversible:
            flow = pi[:, None] * P
            if np.max(np.abs(flow - flow.T)) > STAT_TOL:
                raise KernelError("detailed balance fails")
        graph = graph or self.graph
        if graph is not None:
            allowed = graph.adjacency_matrix() + np.eye(self.n)
            if np.any((P > 0) & (allowed == 0)):
                raise KernelError("off-diagonal mass outside graph edges")

    def flags(self) -> dict:
        return {"name": self.name, "reversible": self.reversible,
                "doubly_stochastic": self.doubly_stochastic, "n": self.n}


@dataclass(frozen=True)
class EdgeKernel:
    """First-order lift of a second-order walk onto directed edges.

    ``states[k] = (i, j)`` means the walk was at ``i`` and is now at ``j``.
    """

    states: tuple[tuple[int, int], ...]
    P: np.ndarray
    pi: np.ndarray
    base_pi: np.ndarray
    name: str = "nbrw"

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def heads(self) -> np.ndarray:
        """Current node of every edge state (the lift map used for test functions)."""
        return np.array([j for _, j in self.states], dtype=np.int64)

    def check(self) -> None:
        if np.max(np.abs(self.P.sum(axis=1) - 1.0)) > ROW_TOL:
            raise KernelError("rows do not sum to one")
        if np.max(np.abs(self.pi @ self.P - self.pi)) > STAT_TOL:
            raise KernelError("pi' is not stationary")


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Left Perron vector of an irreducible stochastic matrix."""
    n = P.shape[0]
    a = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _is_symmetric(P: np.ndarray, tol: float = STAT_TOL) -> bool:
    return bool(np.max(np.abs(P - P.T)) <= tol)


def from_matrix(P, name: str = "", graph: Graph | None = None) -> TransitionKernel:
    """Wrap an arbitrary stochastic matrix, inferring pi and flags."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise KernelError("transition matrix must be square")
    doubly = bool(np.max(np.abs(P.sum(axis=0) - 1.0)) <= 1e-10)
    pi = np.full(P.shape[0], 1.0 / P.shape[0]) if doubly else stationary_distribution(P)
    flow = pi[:, None] * P
    reversible = bool(np.max(np.abs(flow - flow.T)) <= STAT_TOL)
    return TransitionKernel(P, pi, reversible, doubly, name, graph)


def srw_kernel(g: Graph) -> TransitionKernel:
    d = g.degrees.astype(float)
    P = g.adjacency_matrix() / d[:, None]
    return TransitionKernel(P, degree_distribution(g), True, False, "srw", g)


def mhrw_kernel(g: Graph) -> TransitionKernel:
    """Metropolis walk with uniform target: P_ij = min(1/d_i, 1/d_j) on edges."""
    d = g.degrees.astype(float)
    P = np.zeros((g.n, g.n))
    for i, j in g.edges():
        P[i, j] = P[j, i] = min(1.0 / d[i], 1.0 / d[j])
    np.fill_diagonal(P, 0.0)
    # rounding can leave -1e-17 on a diagonal that should be exactly zero
    np.fill_diagonal(P, np.clip(1.0 - P.sum(axis=1), 0.0, None))
    return TransitionKernel(P, np.full(g.n, 1.0 / g.n), True, True, "mhrw", g)


def peskun_modify(k: TransitionKernel, graph: Graph | None = None) -> TransitionKernel:
    """Move self-loop mass onto edges, greedily in lexicographic edge order.

    For each edge (i, j), i < j, transfer ``min(P_ii, P_jj)`` from both
    diagonals to ``P_ij`` and ``P_ji``. The result dominates ``k`` off the
    diagonal and stays symmetric and doubly stochastic.
    """
    if not _is_symmetric(k.P):
        raise KernelError("Peskun modification needs a symmetric kernel")
    graph = graph or k.graph
    if graph is None:
        raise KernelError("graph support required")
    P = k.P.copy()
    for i, j in graph.edges():
        delta = min(P[i, i], P[j, j])
        if delta > 0:
            P[i, j] += delta
            P[j, i] += delta
            P[i, i] -= delta
            P[j, j] -= delta
    np.fill_diagonal(P, np.clip(np.diag(P), 0.0, None))
    return TransitionKernel(P, np.full(k.n, 1.0 / k.n), True, True, "mhrw_modified", graph)


def iid_kernel(pi) -> TransitionKernel:
    """Rank-one kernel 1 pi^T: i.i.d. sampling viewed as a Markov chain."""
    pi = np.asarray(pi, dtype=float)
    P = np.tile(pi, (pi.size, 1))
    doubly = bool(np.allclose(pi, pi[0]))
    return TransitionKernel(P, pi, True, doubly, "iid")


def slem(k: TransitionKernel | EdgeKernel | np.ndarray) -> float:
    """Second largest eigenvalue modulus.

    Reversible kernels use the symmetrised matrix ``D^{1/2} P D^{-1/2}``;
    anything else falls back to the full complex spectrum.
    """
    if isinstance(k, np.ndarray):
        k = from_matrix(k)
    if isinstance(k, TransitionKernel) and k.reversible:
        s = np.sqrt(k.pi)
        A = s[:, None] * k.P / s[None, :]
        lam = np.linalg.eigvalsh((A + A.T) / 2)
        # drop the Perron root, keep the rest
        idx = int(np.argmin(np.abs(lam - 1.0)))
        rest = np.delete(lam, idx)
        return float(np.max(np.abs(rest))) if rest.size else 0.0
    lam = np.linalg.eigvals(k.P)
    idx = int(np.argmin(np.abs(lam - 1.0)))
    rest = np.delete(lam, idx)
    return float(np.max(np.abs(rest))) if rest.size else 0.0


def nbrw_edge_kernel(g: Graph) -> EdgeKernel:
    """Non-backtracking walk as a Markov chain on directed edges.

    From ``(k, j)`` the walk moves to ``(j, l)`` with probability
    ``1/(d_j - 1)`` for every neighbour ``l != k``; a leaf sends it back.
    """
    states = [(i, j) for i in range(g.n) for j in g.adjacency[i]]
    index = {e: s for s, e in enumerate(states)}
    d = g.degrees
    P = np.zeros((len(states), len(states)))
    for s, (k, j) in enumerate(states):
        if d[j] == 1:
            P[s, index[(j, k)]] = 1.0
            continue
        w = 1.0 / (d[j] - 1)
        for l in g.adjacency[j]:
            if l != k:
                P[s, index[(j, l)]] = w
    pi = np.full(len(states), 1.0 / len(states))
    return EdgeKernel(tuple(states), P, pi, degree_distribution(g))


def closed_classes(P: np.ndarray) -> list[np.ndarray]:
    """Strongly connected components of the support graph of ``P``.

    A lifted walk on a cycle splits into two rotating classes; every other
    connected graph gives one.
    """
    ncomp, labels = connected_components(P > 0, directed=True, connection="strong")
    return [np.flatnonzero(labels == c) for c in range(ncomp)]


# -- CSV / JSON export -----------------------------------------------------

def save_kernel(k: TransitionKernel, path: str | Path) -> None:
    """CSV body: first line ``n``, then ``n`` rows. Flags go to ``<path>.json``."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"{k.n}\n")
        for row in k.P:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    meta = k.flags() | {"pi": k.pi.tolist()}
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2))


def load_kernel(path: str | Path) -> TransitionKernel:
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    n = int(lines[0])
    P = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:n + 1]])
    if P.shape != (n, n):
        raise KernelError(f"expected {n}x{n} matrix, got {P.shape}")
    sidecar = path.with_suffix(path.suffix + ".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        return TransitionKernel(P, np.asarray(meta["pi"]), bool(meta["reversible"]),
                                bool(meta["doubly_stochastic"]), meta.get("name", ""))
    return from_matrix(P)
