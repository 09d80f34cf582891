"""Seeded input sequences that drive SGD: i.i.d., walks, shuffling, mini-batches.

Every sequence owns a private ``numpy.random.Generator`` (PCG64), so a
given seed reproduces the same emission stream on any platform. Walk
transitions are computed by small numba loops fed with uniforms drawn from
that generator.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from numba import njit

from .graphs import Graph, degree_distribution
from .kernels import TransitionKernel

KINDS = ("iid", "chain_walk", "nbrw_walk", "single_shuffle", "random_shuffle",
         "minibatch_iid", "minibatch_single_shuffle", "minibatch_random_shuffle")


@njit(cache=True)
def _chain_path(cum, cur, u, out):
    n = cum.shape[1]
    for t in range(u.shape[0]):
        row = cum[cur]
        lo, hi = 0, n - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if row[mid] > u[t]:
                hi = mid
            else:
                lo = mid + 1
        cur = lo
        out[t] = cur
    return cur


@njit(cache=True)
def _nbrw_path(indptr, indices, prev, cur, u, out):
    for t in range(u.shape[0]):
        s = indptr[cur]
        d = indptr[cur + 1] - s
        if prev < 0:
            k = min(int(u[t] * d), d - 1)
            nxt = indices[s + k]
        elif d == 1:
            nxt = indices[s]
        else:
            k = min(int(u[t] * (d - 1)), d - 2)
            # skip the previous node in the sorted neighbour list
            if indices[s + k] >= prev:
                for q in range(d):
                    if indices[s + q] == prev:
                        if k >= q:
                            k += 1
                        break
            nxt = indices[s + k]
        prev = cur
        cur = nxt
        out[t] = cur
    return prev, cur


def _cumulative_rows(P: np.ndarray) -> np.ndarray:
    cum = np.cumsum(P, axis=-1)
    P2 = np.atleast_2d(P)
    cum2 = np.atleast_2d(cum)
    for i, row in enumerate(P2):
        last = np.flatnonzero(row > 0)[-1]
        cum2[i, last:] = 1.0
    return cum2.reshape(cum.shape)


class InputSequence:
    """Base class. Subclasses implement :meth:`take`."""

    kind = "abstract"
    is_walk = False
    batch_size = 1

    def __init__(self, n: int, limiting_dist, seed: int | np.random.SeedSequence | None = None):
        self.n = int(n)
        self.limiting_dist = np.asarray(limiting_dist, dtype=float)
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def take(self, m: int) -> np.ndarray:
        raise NotImplementedError

    def next(self):
        out = self.take(1)[0]
        return int(out) if out.ndim == 0 else out

    def skip(self, m: int, chunk: int = 1 << 16) -> None:
        while m > 0:
            step = min(m, chunk)
            self.take(step)
            m -= step

    def counts(self, m: int, chunk: int = 1 << 18) -> np.ndarray:
        """Visit counts over the next ``m`` emissions (indices inside batches)."""
        total = np.zeros(self.n, dtype=np.int64)
        while m > 0:
            step = min(m, chunk)
            x = self.take(step).ravel()
            total += np.bincount(x[x >= 0], minlength=self.n)
            m -= step
        return total

    def __iter__(self):
        while True:
            yield self.next()


class IIDSequence(InputSequence):
    kind = "iid"

    def __init__(self, pi, seed=None):
        super().__init__(len(pi), pi, seed)
        self._cum = _cumulative_rows(self.limiting_dist)

    def take(self, m):
        u = self.rng.random(m)
        return np.searchsorted(self._cum, u, side="right").astype(np.int64)


class ChainWalk(InputSequence):
    """Markov chain driven by a transition kernel."""

    kind = "chain_walk"
    is_walk = True

    def __init__(self, kernel: TransitionKernel, seed=None, start: int | None = None):
        super().__init__(kernel.n, kernel.pi, seed)
        self.kernel = kernel
        self._cum = _cumulative_rows(kernel.P)
        if start is None:
            start = int(np.searchsorted(_cumulative_rows(kernel.pi), self.rng.random(), "right"))
        self.state = int(start)

    def take(self, m):
        out = np.empty(m, dtype=np.int64)
        self.state = int(_chain_path(self._cum, self.state, self.rng.random(m), out))
        return out


class NBRWWalk(InputSequence):
    """Non-backtracking walk; the first step from ``start`` is uniform over neighbours."""

    kind = "nbrw_walk"
    is_walk = True

    def __init__(self, graph: Graph, seed=None, start: int | None = None,
                 prev: int | None = None):
        super().__init__(graph.n, degree_distribution(graph), seed)
        self.graph = graph
        self._indptr, self._indices = graph.csr()
        if start is None:
            start = int(np.searchsorted(_cumulative_rows(self.limiting_dist),
                                        self.rng.random(), "right"))
        self.state = int(start)
        self.prev = -1 if prev is None else int(prev)

    def take(self, m):
        out = np.empty(m, dtype=np.int64)
        self.prev, self.state = (int(v) for v in _nbrw_path(
            self._indptr, self._indices, self.prev, self.state, self.rng.random(m), out))
        return out


class _EpochSequence(InputSequence):
    """Emits consecutive epochs, each a permutation of ``range(n)``."""

    def __init__(self, n, seed=None):
        super().__init__(n, np.full(n, 1.0 / n), seed)
        self._epoch = self._new_epoch()
        self._pos = 0

    def _new_epoch(self) -> np.ndarray:
        raise NotImplementedError

    def take(self, m):
        out = np.empty(m, dtype=np.int64)
        filled = 0
        while filled < m:
            if self._pos == self.n:
                self._epoch = self._new_epoch()
                self._pos = 0
            step = min(m - filled, self.n - self._pos)
            out[filled:filled + step] = self._epoch[self._pos:self._pos + step]
            filled += step
            self._pos += step
        return out


class SingleShuffle(_EpochSequence):
    """One permutation, drawn once (or given), replayed every epoch."""

    kind = "single_shuffle"

    def __init__(self, n, seed=None, permutation: Sequence[int] | None = None):
        self._perm = None if permutation is None else np.asarray(permutation, dtype=np.int64)
        if self._perm is not None and sorted(self._perm.tolist()) != list(range(n)):
            raise ValueError("permutation must cover range(n) exactly once")
        super().__init__(n, seed)

    def _new_epoch(self):
        if self._perm is None:
            self._perm = self.rng.permutation(self.n)
        return self._perm


class RandomShuffle(_EpochSequence):
    """Fresh uniform permutation at the start of every epoch."""

    kind = "random_shuffle"

    def _new_epoch(self):
        return self.rng.permutation(self.n)


def _partial_fisher_yates(rng: np.random.Generator, n: int, s: int, m: int = 1) -> np.ndarray:
    """``m`` independent uniform ``s``-subsets of ``range(n)``, one per row."""
    pool = np.tile(np.arange(n), (m, 1))
    u = rng.random((m, s))
    rows = np.arange(m)
    for k in range(s):
        j = k + (u[:, k] * (n - k)).astype(np.int64)
        tmp = pool[rows, k].copy()
        pool[rows, k] = pool[rows, j]
        pool[rows, j] = tmp
    return pool[:, :s].copy()


class MiniBatchIID(InputSequence):
    """Uniform S-subsets, drawn independently. ``take`` returns ``(m, S)``."""

    kind = "minibatch_iid"

    def __init__(self, n, batch_size, seed=None):
        if not 1 <= batch_size <= n:
            raise ValueError("batch size must be in [1, n]")
        super().__init__(n, np.full(n, 1.0 / n), seed)
        self.batch_size = int(batch_size)

    def take(self, m):
        return _partial_fisher_yates(self.rng, self.n, self.batch_size, m)


class _MiniBatchEpoch(InputSequence):
    """Epoch permutation cut into consecutive batches; the last may be short.

    Short batches are padded with ``-1`` in the ``(m, S)`` output.
    """

    def __init__(self, n, batch_size, seed=None):
        if not 1 <= batch_size <= n:
            raise ValueError("batch size must be in [1, n]")
        super().__init__(n, np.full(n, 1.0 / n), seed)
        self.batch_size = int(batch_size)
        self.batches_per_epoch = math.ceil(n / batch_size)
        self._batches = self._split(self._permutation())
        self._pos = 0

    def _permutation(self) -> np.ndarray:
        raise NotImplementedError

    def _split(self, perm):
        S = self.batch_size
        padded = np.full(self.batches_per_epoch * S, -1, dtype=np.int64)
        padded[:self.n] = perm
        return padded.reshape(self.batches_per_epoch, S)

    def take(self, m):
        out = np.empty((m, self.batch_size), dtype=np.int64)
        filled = 0
        while filled < m:
            if self._pos == self.batches_per_epoch:
                self._batches = self._split(self._permutation())
                self._pos = 0
            step = min(m - filled, self.batches_per_epoch - self._pos)
            out[filled:filled + step] = self._batches[self._pos:self._pos + step]
            filled += step
            self._pos += step
        return out


class MiniBatchSingleShuffle(_MiniBatchEpoch):
    kind = "minibatch_single_shuffle"

    def _permutation(self):
        if not hasattr(self, "_perm"):
            self._perm = self.rng.permutation(self.n)
        return self._perm


class MiniBatchRandomShuffle(_MiniBatchEpoch):
    kind = "minibatch_random_shuffle"

    def _permutation(self):
        return self.rng.permutation(self.n)


def minibatch_weight(batch, n: int, prob: float | None = None,
                     batch_size: int | None = None) -> np.ndarray:
    """Sampling vector ``v(B) = 1_B / (S * C(n, S) * P(B))``.

    ``prob`` defaults to the uniform batch probability ``1/C(n, S)``, in
    which case ``v(B) = 1_B / S``. Entries ``-1`` (padding) are ignored and a
    short batch uses its own size for ``S``. The normalisation makes
    ``E[v(B)] = 1/n`` so the mini-batch gradient is unbiased for ``f``.
    """
    B = np.asarray(batch)
    B = B[B >= 0]
    S = batch_size or B.size
    if S == 0:
        raise ValueError("empty batch")
    if prob is None:
        prob = 1.0 / math.comb(n, S)
    if prob <= 0:
        raise ValueError("zero-probability batch")
    v = np.zeros(n)
    v[B] = 1.0 / (S * math.comb(n, S) * prob)
    return v


def visit_frequencies(seq: InputSequence, t: int) -> np.ndarray:
    c = seq.counts(t)
    return c / c.sum()


def make_sequence(kind: str, *, seed=None, kernel: TransitionKernel | None = None,
                  graph: Graph | None = None, pi=None, n: int | None = None,
                  batch_size: int = 1, permutation=None, start: int | None = None
                  ) -> InputSequence:
    """Factory used by the experiment harness."""
    if kind == "iid":
        if pi is None:
            pi = np.full(n, 1.0 / n)
        return IIDSequence(pi, seed)
    if kind == "chain_walk":
        return ChainWalk(kernel, seed, start)
    if kind == "nbrw_walk":
        return NBRWWalk(graph, seed, start)
    if kind == "single_shuffle":
        return SingleShuffle(n, seed, permutation)
    if kind == "random_shuffle":
        return RandomShuffle(n, seed)
    if kind == "minibatch_iid":
        return MiniBatchIID(n, batch_size, seed)
    if kind == "minibatch_single_shuffle":
        return MiniBatchSingleShuffle(n, batch_size, seed)
    if kind == "minibatch_random_shuffle":
        return MiniBatchRandomShuffle(n, batch_size, seed)
    raise ValueError(f"unknown sequence kind {kind!r}")


def replica_seeds(seed: int, replicas: int) -> list[np.random.SeedSequence]:
    """Independent child seeds; replica ``r`` is identical across kinds (paired runs)."""
    return np.random.SeedSequence(seed).spawn(replicas)
