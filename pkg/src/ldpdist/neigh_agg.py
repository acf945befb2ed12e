"""Private all-pairs distances by iterated min-aggregation of distance vectors.

Each vertex starts from (0 to itself, 1 to neighbors, T elsewhere), perturbs
that vector once, and then runs T - 1 synchronous rounds in which it takes
``min(own, min over neighbors + 1)`` for every non-neighbor target.
"""

from __future__ import annotations

import math
import os
from typing import List, Optional, Sequence

import numpy as np

from .graph import Graph
from .mechanisms import (
    DistanceVector,
    Mechanism,
    PrivacyParams,
    RngStream,
    perturb_distance_vector,
)


def init_distance_vector(g: Graph, u: int, T: int) -> DistanceVector:
    if not 0 <= u < g.n:
        raise ValueError(f"vertex {u} outside [0, {g.n})")
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    entries = np.full(g.n, T, dtype=np.int64)
    entries[list(g.neighbors(u))] = 1
    entries[u] = 0
    return DistanceVector(u, 0, entries)


def _aggregate(D: np.ndarray, g: Graph) -> np.ndarray:
    """One synchronous round over the whole state matrix (row u = vertex u)."""
    out = D.copy()
    for u, nbrs in enumerate(g.adjacency):
        if not nbrs:
            continue
        idx = list(nbrs)
        relayed = D[idx].min(axis=0) + 1
        row = np.minimum(D[u], relayed)
        # Neighbor and self entries are outside the update's domain.
        row[idx] = D[u, idx]
        row[u] = D[u, u]
        out[u] = row
    return out


def aggregate_round(vectors: Sequence[DistanceVector], g: Graph) -> List[DistanceVector]:
    if len(vectors) != g.n:
        raise ValueError(f"expected {g.n} vectors, got {len(vectors)}")
    rounds = {v.round for v in vectors}
    if len(rounds) != 1:
        raise ValueError(f"vectors come from different rounds: {sorted(rounds)}")
    ordered = sorted(vectors, key=lambda v: v.owner)
    if [v.owner for v in ordered] != list(range(g.n)):
        raise ValueError("vector owners must cover every vertex exactly once")
    k = rounds.pop() + 1
    D = _aggregate(np.stack([v.entries for v in ordered]), g)
    return [DistanceVector(u, k, D[u]) for u in range(g.n)]


def perturbed_initial_state(g: Graph, params: PrivacyParams, rng: RngStream) -> np.ndarray:
    rows = []
    for u in range(g.n):
        vec = init_distance_vector(g, u, params.T)
        if math.isinf(params.eps):
            rows.append(vec.entries.astype(np.float64))
        else:
            rows.append(perturb_distance_vector(vec, params, rng.vertex(u)).entries)
    dtype = np.float64 if params.mechanism is Mechanism.LAPLACE or math.isinf(params.eps) else np.int64
    return np.stack(rows).astype(dtype) if rows else np.zeros((0, 0), dtype)


def run_neigh_agg(
    g: Graph,
    params: PrivacyParams,
    rng: Optional[RngStream] = None,
    snapshot_dir: Optional[str] = None,
) -> np.ndarray:
    """Run the whole protocol and return the n x n estimated distance matrix.

    ``params.eps = math.inf`` disables the perturbation step. When
    ``snapshot_dir`` is set, the state after every round is saved there as
    ``round_<k>.txt``.
    """
    if params.eps is None:
        raise ValueError("eps is required")
    rng = rng if rng is not None else RngStream(0)
    T = params.T

    D = perturbed_initial_state(g, params, rng)
    if snapshot_dir is not None:
        os.makedirs(snapshot_dir, exist_ok=True)
        np.savetxt(os.path.join(snapshot_dir, "round_0.txt"), D, fmt="%.6g")
    for k in range(1, T):
        D = _aggregate(D, g)
        if snapshot_dir is not None:
            np.savetxt(os.path.join(snapshot_dir, f"round_{k}.txt"), D, fmt="%.6g")

    out = np.clip(D.astype(np.float64), 1, T)
    np.fill_diagonal(out, 0)
    return out


def diameter_upper_bound(g: Graph, additive_constant: int = 1) -> int:
    """ceil(3(n - t) / (delta + 1)) + c with t the number of distinct degrees.

    The additive constant stands in for an unspecified O(1) term; the default
    of 1 is a heuristic. The bound assumes ``g`` is connected.
    """
    if g.n == 0:
        raise ValueError("diameter bound undefined for the empty graph")
    deg = g.degrees()
    distinct = len(np.unique(deg))
    delta = int(deg.min())
    return math.ceil(3 * (g.n - distinct) / (delta + 1)) + additive_constant
