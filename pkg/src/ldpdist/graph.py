"""Undirected simple graphs, edge-list ingestion and exact distances."""

from __future__ import annotations

import io
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, IO, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

UNREACHABLE = math.inf


class EdgeListParseError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line.strip()!r}")
        self.lineno = lineno


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph stored as sorted neighbor tuples."""

    n: int
    adjacency: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency must have one entry per vertex")
        arcs = set()
        for u, nbrs in enumerate(self.adjacency):
            if len(set(nbrs)) != len(nbrs):
                raise ValueError(f"duplicate neighbor of {u}")
            for v in nbrs:
                if not 0 <= v < self.n:
                    raise ValueError(f"vertex id {v} out of range")
                if v == u:
                    raise ValueError(f"self-loop at {u}")
                arcs.add((u, v))
        for u, v in arcs:
            if (v, u) not in arcs:
                raise ValueError(f"edge ({u},{v}) is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        sets: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            sets[u].add(v)
            sets[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in sets))

    @classmethod
    def from_matrix(cls, matrix) -> "Graph":
        a = np.asarray(matrix).astype(bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency matrix must be square")
        a = a.copy()
        np.fill_diagonal(a, False)
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency matrix must be symmetric")
        return cls(a.shape[0], tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in a))

    @property
    def m(self) -> int:
        return sum(len(nb) for nb in self.adjacency) // 2

    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.adjacency], dtype=np.int64)

    def neighbors(self, u: int) -> Tuple[int, ...]:
        return self.adjacency[u]

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v]

    def to_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        for u, nb in enumerate(self.adjacency):
            a[u, list(nb)] = 1
        return a

    def to_csr(self) -> csr_matrix:
        rows = np.repeat(np.arange(self.n), self.degrees())
        cols = np.fromiter((v for nb in self.adjacency for v in nb), dtype=np.int64, count=2 * self.m)
        return csr_matrix((np.ones(len(cols), dtype=np.int8), (rows, cols)), shape=(self.n, self.n))


@dataclass
class IngestReport:
    n: int = 0
    m: int = 0
    lines: int = 0
    comments: int = 0
    self_loops: int = 0
    duplicates: int = 0
    reciprocal: int = 0
    dropped_vertices: int = 0
    id_map: Dict[int, int] = field(default_factory=dict, repr=False)

    def summary(self) -> str:
        return (
            f"ingested n={self.n} m={self.m} lines={self.lines} comments={self.comments} "
            f"self_loops_dropped={self.self_loops} duplicates_dropped={self.duplicates} "
            f"reciprocal_arcs_merged={self.reciprocal} "
            f"vertices_outside_lcc={self.dropped_vertices}"
        )


def parse_edge_list(
    source: Union[str, bytes, IO],
    directed: bool = False,
    take_complement: bool = False,
    largest_component: bool = False,
) -> Tuple[Graph, IngestReport]:
    """Parse whitespace-separated id pairs into a compacted simple graph."""
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)

    report = IngestReport()
    ids: Dict[int, int] = {}
    seen = set()
    arcs = set()
    edges = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            report.comments += 1
            continue
        report.lines += 1
        tokens = stripped.split()
        if len(tokens) < 2:
            raise EdgeListParseError(lineno, line, "expected two vertex ids")
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(lineno, line, "non-integer vertex id") from None
        u = ids.setdefault(a, len(ids))
        v = ids.setdefault(b, len(ids))
        if u == v:
            report.self_loops += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            # In a directed file the reverse arc is expected, not a duplicate.
            if directed and (u, v) not in arcs:
                report.reciprocal += 1
            else:
                report.duplicates += 1
            arcs.add((u, v))
            continue
        seen.add(key)
        arcs.add((u, v))
        edges.append(key)

    if not ids:
        raise ValueError("edge list is empty")
    g = Graph.from_edges(len(ids), edges)
    if take_complement:
        g = complement(g)
    if largest_component:
        g, kept = largest_connected_component(g)
        report.dropped_vertices = len(ids) - g.n
        inverse = {new: old for old, new in ids.items()}
        ids = {inverse[int(old)]: new for new, old in enumerate(kept)}
    report.n, report.m, report.id_map = g.n, g.m, ids
    return g, report


def load_edge_list(
    source: Union[str, bytes, IO],
    directed: bool = False,
    take_complement: bool = False,
    largest_component: bool = False,
    report_stream: Optional[IO] = sys.stderr,
) -> Graph:
    g, report = parse_edge_list(source, directed, take_complement, largest_component)
    if report_stream is not None:
        print(report.summary(), file=report_stream)
    return g


def read_edge_list_file(path, **kwargs) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return load_edge_list(fh, **kwargs)


def density(g: Graph) -> float:
    if g.n < 2:
        raise ValueError("density needs at least two vertices")
    return float(g.degrees().sum()) / (g.n * (g.n - 1))


def complement(g: Graph) -> Graph:
    a = g.to_matrix() == 0
    np.fill_diagonal(a, False)
    return Graph.from_matrix(a)


def largest_connected_component(g: Graph) -> Tuple[Graph, np.ndarray]:
    """Induced subgraph on the largest component; returns it and the kept old ids."""
    _, labels = connected_components(g.to_csr(), directed=False)
    biggest = np.bincount(labels).argmax()
    kept = np.flatnonzero(labels == biggest)
    remap = {int(old): new for new, old in enumerate(kept)}
    edges = [(remap[u], remap[v]) for u, v in g.edges() if u in remap and v in remap]
    return Graph.from_edges(len(kept), edges), kept


def exact_all_pairs(g: Graph, cap: Optional[float] = None) -> np.ndarray:
    """BFS hop distances between all pairs.

    Unreachable pairs hold :data:`UNREACHABLE` unless ``cap`` is given, in
    which case every entry above ``cap`` (unreachable included) becomes ``cap``.
    """
    if g.n == 0:
        return np.zeros((0, 0))
    return _bfs_all_pairs(g.to_csr(), cap)


def distances_from_adjacency(adjacency: np.ndarray, cap: Optional[float] = None) -> np.ndarray:
    """Same as :func:`exact_all_pairs` for a symmetric 0/1 matrix."""
    adjacency = np.asarray(adjacency)
    if adjacency.shape[0] == 0:
        return np.zeros((0, 0))
    return _bfs_all_pairs(csr_matrix(adjacency.astype(np.int8)), cap)


# Above this average degree, BFS from all sources at once via dense products wins.
_DENSE_BFS_MIN_DEGREE = 16


def _level_bfs(adj: np.ndarray, cap: Optional[float]) -> np.ndarray:
    """Breadth-first search from every source simultaneously, one level per product."""
    n = adj.shape[0]
    dist = np.full((n, n), UNREACHABLE)
    np.fill_diagonal(dist, 0.0)
    reached = np.eye(n, dtype=bool)
    frontier = np.eye(n, dtype=np.float32)
    level = 0
    while frontier.any() and (cap is None or level < cap):
        level += 1
        nxt = (frontier @ adj > 0) & ~reached
        dist[nxt] = level
        reached |= nxt
        frontier = nxt.astype(np.float32)
    return dist


def _bfs_all_pairs(csr: csr_matrix, cap: Optional[float]) -> np.ndarray:
    n = csr.shape[0]
    if csr.nnz > _DENSE_BFS_MIN_DEGREE * n:
        dist = _level_bfs(csr.toarray().astype(np.float32), cap)
    else:
        dist = shortest_path(csr, method="D", directed=False, unweighted=True)
    if cap is not None:
        dist = np.minimum(dist, cap)
    return dist


def random_graph(n: int, gamma: float, seed: int = 0) -> Graph:
    """Erdos-Renyi G(n, gamma) graph."""
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    keep = rng.random(len(iu[0])) < gamma
    a = np.zeros((n, n), dtype=bool)
    a[iu[0][keep], iu[1][keep]] = True
    return Graph.from_matrix(a | a.T)
