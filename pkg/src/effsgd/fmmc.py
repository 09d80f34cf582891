"""Fastest mixing reversible chain (uniform target) by projected subgradient.

The chain is parametrised by edge weights ``w``:
``P(w) = I - sum_e w_e (e_i - e_j)(e_i - e_j)^T``, which is symmetric with
unit row sums for every ``w``. Feasibility is ``w >= 0`` and, at every node,
incident weight at most one (non-negative diagonal).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph
from .kernels import TransitionKernel, mhrw_kernel

log = logging.getLogger(__name__)

FEAS_TOL = 1e-10


@dataclass
class FmmcResult:
    kernel: TransitionKernel
    slem: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def warning(self) -> bool:
        return not self.converged


def _weights_to_matrix(w: np.ndarray, edges: np.ndarray, n: int) -> np.ndarray:
    P = np.zeros((n, n))
    i, j = edges[:, 0], edges[:, 1]
    P[i, j] = w
    P[j, i] = w
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    return P


def _slem_and_subgradient(w, edges, n):
    P = _weights_to_matrix(w, edges, n)
    lam, vecs = np.linalg.eigh(P)
    # lam ascending; lam[-1] is the Perron root 1
    lam2, lamn = lam[-2], lam[0]
    i, j = edges[:, 0], edges[:, 1]
    if lam2 >= -lamn:
        u = vecs[:, -2]
        return lam2, -(u[i] - u[j]) ** 2
    v = vecs[:, 0]
    return -lamn, (v[i] - v[j]) ** 2


def _project_capped_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) <= 1}``."""
    y = np.clip(x, 0.0, None)
    if y.sum() <= 1.0:
        return y
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.clip(x - tau, 0.0, None)


def project_feasible(w: np.ndarray, incidence: list[np.ndarray],
                     max_sweeps: int = 500) -> np.ndarray:
    """Project onto the feasible edge-weight polytope.

    Dykstra's alternating projections over the per-node capped simplices,
    followed by a shrink pass that makes the result feasible to ``FEAS_TOL``.
    """
    x = np.clip(w, 0.0, None)
    corr = [np.zeros(idx.size) for idx in incidence]
    for _ in range(max_sweeps):
        for k, idx in enumerate(incidence):
            y = x[idx] + corr[k]
            p = _project_capped_simplex(y)
            corr[k] = y - p
            x[idx] = p
        if max(x[idx].sum() for idx in incidence) <= 1.0 + FEAS_TOL:
            break
    x = np.clip(x, 0.0, None)
    for _ in range(100):
        loads = np.array([x[idx].sum() for idx in incidence])
        over = np.flatnonzero(loads > 1.0)
        if over.size == 0:
            break
        for k in over:
            x[incidence[k]] /= loads[k]
    return x


def fmmc_kernel(g: Graph, max_iters: int = 5000, tol: float = 1e-6,
                step: float = 0.5, patience: int = 1000,
                start: TransitionKernel | None = None) -> FmmcResult:
    """Minimise the SLEM over symmetric stochastic matrices on ``g``.

    Starts from the Metropolis chain (or ``start``) and takes normalised
    subgradient steps of size ``step / sqrt(k)``. The best feasible iterate
    is returned; it is never worse than the starting chain. Iteration stops
    once the best value has not improved by ``tol`` for ``patience`` steps.
    ``converged`` is False if the best value never improved on the start.
    """
    n = g.n
    edges = np.array(g.edges(), dtype=np.int64)
    if edges.size == 0:
        k = TransitionKernel(np.eye(1), np.ones(1), True, True, "fmmc", g)
        return FmmcResult(k, 0.0, 0, True)
    incidence = [np.flatnonzero((edges[:, 0] == v) | (edges[:, 1] == v)) for v in range(n)]
    P0 = (start or mhrw_kernel(g)).P
    w = P0[edges[:, 0], edges[:, 1]].copy()
    w = project_feasible(w, incidence)

    best_w = w.copy()
    start_val, grad = _slem_and_subgradient(w, edges, n)
    best_val = start_val
    history = [best_val]
    last_improve = 0
    it = 0
    for it in range(1, max_iters + 1):
        norm = np.linalg.norm(grad)
        if norm == 0.0:
            break
        w = project_feasible(w - (step / np.sqrt(it)) * grad / norm, incidence)
        val, grad = _slem_and_subgradient(w, edges, n)
        if val < best_val - tol:
            last_improve = it
        if val < best_val:
            best_val, best_w = val, w.copy()
        history.append(best_val)
        if it - last_improve >= patience:
            break

    P = _weights_to_matrix(best_w, edges, n)
    P[np.abs(P) < 1e-15] = 0.0
    converged = best_val < start_val
    if not converged:
        log.warning("fmmc: SLEM did not improve on the starting chain (%.6f)", start_val)
    kernel = TransitionKernel(P, np.full(n, 1.0 / n), True, True, "fmmc", g)
    return FmmcResult(kernel, float(best_val), it, converged, history)
