"""Asymptotic covariance of ergodic averages: exact, Monte-Carlo, orderings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .kernels import EdgeKernel, TransitionKernel, closed_classes


class CovarianceError(ValueError):
    pass


@dataclass(frozen=True)
class TestFunction:
    """Vector function on states, stored as an ``n x d`` value table."""

    __test__ = False  # not a pytest class

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if not np.all(np.isfinite(v)):
            raise CovarianceError("test function has non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def mean(self, pi) -> np.ndarray:
        return self.values.T @ np.asarray(pi)


def as_function(g) -> TestFunction:
    return g if isinstance(g, TestFunction) else TestFunction(np.asarray(g, dtype=float))


@dataclass
class AsymCov:
    sigma: np.ndarray
    method: str = "exact"
    horizon: int | None = None
    replicas: int | None = None
    seed: int | None = None
    stderr: np.ndarray | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.sigma.shape[0]

    def scalar(self) -> float:
        return float(self.sigma[0, 0])

    def save(self, path: str | Path) -> None:
        path = Path(path)
        np.savetxt(path, self.sigma, delimiter=",", fmt="%.17g")
        meta = {"method": self.method, "horizon": self.horizon,
                "replicas": self.replicas, "seed": self.seed, "d": self.d}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2))


def _fundamental_cov(P: np.ndarray, pi: np.ndarray, G: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    A = np.eye(n) - P + np.outer(np.ones(n), pi)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise CovarianceError("I - P + 1 pi^T is singular (chain not irreducible?)")
    Gt = G - pi @ G
    DG = pi[:, None] * Gt
    ZG = np.linalg.solve(A, Gt)
    cross = DG.T @ (ZG - Gt)
    S = DG.T @ Gt + cross + cross.T
    return (S + S.T) / 2


def exact_asym_cov(k: TransitionKernel | EdgeKernel, g) -> AsymCov:
    """Exact asymptotic covariance via the fundamental matrix.

    With ``Gt`` the pi-centred values and ``Z = (I - P + 1 pi^T)^{-1}``::

        Sigma = Gt' D Gt + Gt' D (Z - I) Gt + [Gt' D (Z - I) Gt]'

    For an :class:`EdgeKernel` a node function is lifted to edges through
    the head node. A lifted chain that splits into several closed classes
    (the non-backtracking walk on a cycle) is handled class by class, which
    requires every class to share the overall mean.
    """
    g = as_function(g)
    G = g.values
    if isinstance(k, EdgeKernel):
        if g.n == k.n:
            pass
        elif g.n == k.base_pi.size:
            G = G[k.heads]
        else:
            raise CovarianceError(f"function has {g.n} rows, kernel has {k.n} states")
    elif g.n != k.n:
        raise CovarianceError(f"function has {g.n} rows, kernel has {k.n} states")
    P, pi = k.P, k.pi

    classes = closed_classes(P)
    if len(classes) == 1:
        return AsymCov(_fundamental_cov(P, pi, G))
    mu = pi @ G
    sigma = np.zeros((G.shape[1], G.shape[1]))
    for idx in classes:
        w = pi[idx].sum()
        sub_pi = pi[idx] / w
        if not np.allclose(sub_pi @ G[idx], mu, atol=1e-10, rtol=0):
            raise CovarianceError("closed classes disagree on the mean: covariance is infinite")
        sub = P[np.ix_(idx, idx)]
        if np.max(np.abs(sub.sum(axis=1) - 1.0)) > 1e-12:
            raise CovarianceError("transient states present")
        sigma += w * _fundamental_cov(sub, sub_pi, G[idx])
    return AsymCov(sigma)


def var_pi(pi, g) -> np.ndarray:
    """Covariance of g(X) with X ~ pi (the i.i.d. asymptotic covariance)."""
    g = as_function(g)
    pi = np.asarray(pi)
    Gt = g.values - pi @ g.values
    return Gt.T @ (pi[:, None] * Gt)


def mc_asym_cov(sequences, g, horizon: int, blocks: int = 1,
                burn_in: int | None = None, seed: int | None = None) -> AsymCov:
    """Monte-Carlo estimate of ``lim (1/t) E[Delta_t Delta_t^T]``.

    ``sequences`` is a list of independent input sequences (one per replica).
    Each replica is advanced through a burn-in (``horizon // 10`` for walks,
    none for i.i.d. and shuffling kinds), then ``horizon`` emissions are
    accumulated. With ``blocks > 1`` the horizon is cut into consecutive
    windows of length ``horizon // blocks`` and each window contributes its
    own ``(1/b) Delta_b Delta_b^T``; ``blocks=1`` is the plain definition.

    Centring uses the exact limiting law of the sequence. For uniform laws
    the count deviations are formed in integer arithmetic, so complete
    shuffling epochs cancel exactly.
    """
    g = as_function(g)
    if horizon < 1 or not sequences:
        raise CovarianceError("need horizon >= 1 and at least one replica")
    if horizon % blocks:
        raise CovarianceError("horizon must be a multiple of blocks")
    b = horizon // blocks
    G = g.values
    n, d = G.shape
    samples = []
    for seq in sequences:
        burn = burn_in if burn_in is not None else (horizon // 10 if seq.is_walk else 0)
        if burn:
            seq.skip(burn)
        pi = np.asarray(seq.limiting_dist)
        uniform = bool(np.all(pi == pi[0]))
        for _ in range(blocks):
            counts = seq.counts(b)
            if uniform:
                dev = (counts * n - b).astype(float) / n
            else:
                dev = counts - b * pi
            delta = G.T @ dev
            samples.append(np.outer(delta, delta) / b)
    samples = np.array(samples)
    sigma = samples.mean(axis=0)
    err = samples.std(axis=0, ddof=1) / np.sqrt(len(samples)) if len(samples) > 1 else None
    return AsymCov((sigma + sigma.T) / 2, "monte_carlo", horizon, len(sequences), seed, err)


class Order(str, Enum):
    ORDERED = "ordered"
    REVERSE = "reverse_ordered"
    INCOMPARABLE = "incomparable"


def loewner_leq(a: AsymCov | np.ndarray, b: AsymCov | np.ndarray, tol: float = 1e-8) -> Order:
    """Classify ``a`` against ``b`` in the Loewner order.

    ``ORDERED`` means ``a <= b`` (b - a is PSD up to ``tol``); ``REVERSE``
    means ``b <= a``; ``INCOMPARABLE`` when the spectrum of ``b - a``
    straddles ``+-tol``. Equal matrices come back ``ORDERED``.
    """
    A = a.sigma if isinstance(a, AsymCov) else np.atleast_2d(a)
    B = b.sigma if isinstance(b, AsymCov) else np.atleast_2d(b)
    if A.shape != B.shape:
        raise CovarianceError(f"dimension mismatch {A.shape} vs {B.shape}")
    lam = np.linalg.eigvalsh((B - A + (B - A).T) / 2)
    if lam[0] >= -tol:
        return Order.ORDERED
    if lam[-1] <= tol:
        return Order.REVERSE
    return Order.INCOMPARABLE


@dataclass
class ProbeReport:
    av_a: np.ndarray
    av_b: np.ndarray
    verdict: str
    max_gap: float

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.av_a.tolist(), self.av_b.tolist()))


def efficiency_probe(ka, kb, fns: Sequence, tol: float = 1e-10) -> ProbeReport:
    """Compare scalar asymptotic variances of two kernels over probe functions.

    Node functions are lifted automatically for edge kernels. The verdict is
    ``A_more_efficient`` when every probe has ``av_a <= av_b`` with at least
    one strict gap, ``B_more_efficient`` symmetrically, and
    ``incomparable_on_probe`` otherwise (including an exact tie).
    """
    pa = ka.base_pi if isinstance(ka, EdgeKernel) else ka.pi
    pb = kb.base_pi if isinstance(kb, EdgeKernel) else kb.pi
    if np.max(np.abs(pa - pb)) > 1e-8:
        raise CovarianceError("kernels have different stationary distributions")
    av_a, av_b = [], []
    for f in fns:
        f = as_function(f)
        for col in f.values.T:
            av_a.append(exact_asym_cov(ka, col).scalar())
            av_b.append(exact_asym_cov(kb, col).scalar())
    av_a, av_b = np.array(av_a), np.array(av_b)
    gap = av_b - av_a
    if np.all(gap >= -tol) and np.any(gap > tol):
        verdict = "A_more_efficient"
    elif np.all(gap <= tol) and np.any(gap < -tol):
        verdict = "B_more_efficient"
    else:
        verdict = "incomparable_on_probe"
    return ProbeReport(av_a, av_b, verdict, float(np.max(np.abs(gap))) if gap.size else 0.0)


def minibatch_iid_cov(g, batch_size: int) -> np.ndarray:
    """Covariance of the batch-mean gradient for uniform S-subsets (i.i.d. across steps).

    Sampling without replacement gives ``(n - S) / (S (n - 1)) Var_unif(g)``.
    """
    g = as_function(g)
    n, S = g.n, int(batch_size)
    if not 1 <= S <= n:
        raise CovarianceError("batch size must be in [1, n]")
    base = var_pi(np.full(n, 1.0 / n), g)
    return base * ((n - S) / (S * (n - 1))) if n > 1 else base * 0.0
