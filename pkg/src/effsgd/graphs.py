"""Undirected graphs used as random-walk substrates."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed, empty or disconnected graphs."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected connected graph with dense 0-based node ids.

    ``adjacency[i]`` is the sorted tuple of neighbours of node ``i``.
    ``labels`` keeps the original (file) label of every node.
    """

    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = len(self.adjacency)
        if n == 0:
            raise GraphError("empty graph")
        for i, nbrs in enumerate(self.adjacency):
            if i in nbrs:
                raise GraphError(f"self-loop at node {i}")
            for j in nbrs:
                if not 0 <= j < n or i not in self.adjacency[j]:
                    raise GraphError(f"asymmetric edge ({i}, {j})")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(n)))
        if not _is_connected(self.adjacency):
            raise GraphError("graph has more than one connected component")

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges as ``(i, j)`` with ``i < j`` in lexicographic order."""
        return [(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, nbrs in enumerate(self.adjacency):
            a[i, list(nbrs)] = 1.0
        return a

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` arrays of the neighbour lists."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(self.degrees)
        indices = np.fromiter((j for nbrs in self.adjacency for j in nbrs), dtype=np.int64,
                              count=int(indptr[-1]))
        return indptr, indices


def _is_connected(adjacency: Sequence[Sequence[int]]) -> bool:
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in adjacency[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == len(adjacency)


def from_edges(edges: Iterable[tuple[int, int]], n: int | None = None) -> Graph:
    """Build a graph from integer edge pairs; duplicates are collapsed."""
    edges = list(edges)
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        if i == j:
            raise GraphError(f"self-loop at node {i}")
        nbrs[i].add(j)
        nbrs[j].add(i)
    return Graph(tuple(tuple(sorted(s)) for s in nbrs))


def from_adjacency_matrix(a: np.ndarray) -> Graph:
    a = np.asarray(a)
    iu, ju = np.nonzero(np.triu(a, k=1))
    return from_edges(zip(iu.tolist(), ju.tolist()), n=a.shape[0])


def parse_edge_list(text: str) -> Graph:
    """Parse whitespace-separated label pairs; '#' lines and blanks are skipped.

    Nodes are relabelled 0..n-1 in order of first appearance.
    """
    ids: dict[str, int] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two labels, got {raw!r}")
        u, v = parts
        if u == v:
            raise GraphError(f"line {lineno}: self-loop {u!r}")
        for lab in (u, v):
            if lab not in ids:
                ids[lab] = len(ids)
        edges.append((ids[u], ids[v]))
    if not ids:
        raise GraphError("empty graph")
    g = from_edges(edges, n=len(ids))
    labels = tuple(sorted(ids, key=ids.get))
    return Graph(g.adjacency, labels)


def load_edge_list(path: str | Path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def format_edge_list(g: Graph) -> str:
    lines = [f"# n={g.n} m={g.num_edges}"]
    lines += [f"{g.labels[i]} {g.labels[j]}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def save_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))


def degree_distribution(g: Graph) -> np.ndarray:
    d = g.degrees.astype(float)
    return d / d.sum()


# -- standard graphs -------------------------------------------------------

def path_graph(n: int) -> Graph:
    return from_edges([(i, i + 1) for i in range(n - 1)], n=n)


def cycle_graph(n: int) -> Graph:
    return from_edges([(i, (i + 1) % n) for i in range(n)], n=n)


def complete_graph(n: int) -> Graph:
    return from_edges([(i, j) for i in range(n) for j in range(i + 1, n)], n=n)


def star_graph(leaves: int) -> Graph:
    return from_edges([(0, k) for k in range(1, leaves + 1)], n=leaves + 1)


def random_connected_graph(n: int, m: int | None = None, p: float | None = None,
                           seed: int = 0, max_tries: int = 10_000) -> Graph:
    """Uniform G(n, m) (or G(n, p)) sample conditioned on connectivity."""
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for _ in range(max_tries):
        if m is not None:
            pick = rng.choice(len(pairs), size=m, replace=False)
        else:
            pick = np.flatnonzero(rng.random(len(pairs)) < (0.3 if p is None else p))
        edges = [pairs[k] for k in pick]
        try:
            return from_edges(edges, n=n)
        except GraphError:
            continue
    raise GraphError(f"no connected sample after {max_tries} tries")


# The two small graphs of the reversible-chain comparison; adjacency is the
# off-diagonal support of the reference Metropolis matrices (1-based there).
G1_EDGES = [(1, 2), (1, 3), (1, 6), (2, 5), (3, 4), (3, 6), (3, 7), (4, 5), (4, 8), (7, 8)]
G2_EDGES = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5), (3, 4), (4, 5)]


def graph_g1() -> Graph:
    return from_edges([(i - 1, j - 1) for i, j in G1_EDGES], n=8)


def graph_g2() -> Graph:
    return from_edges([(i - 1, j - 1) for i, j in G2_EDGES], n=5)


def dolphins_standin(seed: int = 62) -> Graph:
    """62-node, 159-edge connected random graph standing in for 'Dolphins'."""
    return random_connected_graph(62, m=159, seed=seed)
