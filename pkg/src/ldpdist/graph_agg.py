"""Synthetic graphs from randomized neighbor lists.

Two rounds: vertices report Laplace-noised degrees so the curator can
estimate the density, then every vertex randomizes its full neighbor list
and the curator merges the two reports of each pair with AND (or a
Bernoulli mix of AND and OR). The naive RNL baseline is here as well.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from .graph import Graph, complement
from .mechanisms import (
    NeighborBits,
    PrivacyParams,
    RngStream,
    flip_probability,
    noisy_degree,
    perturb_neighbor_bits,
    rr_bits,
)


class CalibrationError(ValueError):
    """The requested calibration has no valid (positive-budget) solution."""


class AlphaClampWarning(UserWarning):
    pass


class Variant(str, enum.Enum):
    AND_ONLY = "and"
    AND_OR = "and_or"


@dataclass
class SyntheticGraph:
    adjacency: np.ndarray
    gamma_hat: Optional[float] = None
    gamma_bar: float = 0.0
    p: Optional[float] = None
    alpha: Optional[float] = None
    eps1: Optional[float] = None
    eps2: Optional[float] = None
    complemented: bool = False
    warnings: List[str] = field(default_factory=list)

    @classmethod
    def from_adjacency(cls, adjacency: np.ndarray, **calibration) -> "SyntheticGraph":
        adjacency = np.asarray(adjacency, dtype=np.uint8)
        return cls(adjacency=adjacency, gamma_bar=realized_density(adjacency), **calibration)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def to_graph(self) -> Graph:
        return Graph.from_matrix(self.adjacency)

    def to_edge_list(self) -> str:
        """Edge-list text with a one-line calibration header."""
        header = "# " + " ".join(
            f"{k}={_fmt(v)}"
            for k, v in (
                ("gamma_hat", self.gamma_hat),
                ("gamma_bar", self.gamma_bar),
                ("p", self.p),
                ("alpha", self.alpha),
                ("eps1", self.eps1),
                ("eps2", self.eps2),
            )
        )
        rows, cols = np.nonzero(np.triu(self.adjacency, 1))
        body = "".join(f"{i} {j}\n" for i, j in zip(rows.tolist(), cols.tolist()))
        return header + "\n" + body


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def realized_density(adjacency: np.ndarray) -> float:
    n = adjacency.shape[0]
    if n < 2:
        return 0.0
    edges = int(np.triu(adjacency, 1).sum())
    return edges / (n * (n - 1) / 2)


def estimate_density(noisy_degrees: Sequence[float], n: int) -> float:
    """Sum of noisy degrees over n(n-1), clamped one edge's worth inside (0, 1)."""
    if n < 2:
        raise ValueError("density needs at least two vertices")
    if len(noisy_degrees) != n:
        raise ValueError(f"expected {n} noisy degrees, got {len(noisy_degrees)}")
    pairs = n * (n - 1)
    raw = float(np.sum(noisy_degrees)) / pairs
    return min(max(raw, 1.0 / pairs), 1.0 - 1.0 / pairs)


def epsilon2_for_density(gamma_hat: float) -> float:
    """Second-round budget making the flip probability exactly 2 * gamma_hat."""
    if not 0 < gamma_hat < 0.25:
        raise CalibrationError(
            f"density estimate {gamma_hat:.6g} leaves no positive budget for AND-only "
            "aggregation (needs 0 < gamma_hat < 1/4); use the AND/OR variant"
        )
    return math.log(1.0 / (2.0 * gamma_hat) - 1.0)


def alpha_for(gamma_hat: float, p: float) -> float:
    """Probability of choosing AND for a pair; clamped into [0, 1] with a warning."""
    if not 0 < p < 1:
        raise ValueError(f"flip probability must be in (0, 1), got {p!r}")
    raw = (2.0 * gamma_hat + p - 2.0) / (2.0 * p - 2.0)
    alpha = min(max(raw, 0.0), 1.0)
    if alpha != raw and not math.isclose(alpha, raw, rel_tol=0.0, abs_tol=1e-12):
        warnings.warn(
            f"alpha={raw:.6g} clamped to {alpha:g} (p={p:.6g}, gamma_hat={gamma_hat:.6g}); "
            "the budget is below the unbiased-density threshold",
            AlphaClampWarning,
            stacklevel=2,
        )
    return alpha


def _stack(lists: Union[Sequence[NeighborBits], np.ndarray]) -> np.ndarray:
    if isinstance(lists, np.ndarray):
        reports = lists.astype(np.uint8)
    else:
        ordered = sorted(lists, key=lambda nb: nb.owner)
        if [nb.owner for nb in ordered] != list(range(len(ordered))):
            raise ValueError("one neighbor list per vertex is required")
        reports = np.stack([nb.bits for nb in ordered]) if ordered else np.zeros((0, 0), np.uint8)
    if reports.ndim != 2 or reports.shape[0] != reports.shape[1]:
        raise ValueError(f"expected n lists of length n, got shape {reports.shape}")
    return reports


def aggregate_and(lists) -> np.ndarray:
    """A[i][j] = A[j][i] = N_i[j] AND N_j[i]; diagonal reports are ignored."""
    r = _stack(lists)
    a = r & r.T
    np.fill_diagonal(a, 0)
    return a


def aggregate_and_or(lists, alpha: float, rng: RngStream) -> np.ndarray:
    """Per unordered pair pick AND with probability alpha, otherwise OR.

    One Bernoulli draw per pair (i < j), consumed in lexicographic order.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    r = _stack(lists)
    n = r.shape[0]
    iu, ju = np.triu_indices(n, 1)
    use_and = rng.uniform(len(iu)) < alpha
    fwd, bwd = r[iu, ju], r[ju, iu]
    upper = np.where(use_and, fwd & bwd, fwd | bwd)
    a = np.zeros((n, n), dtype=np.uint8)
    a[iu, ju] = upper
    a[ju, iu] = upper
    return a


def collect_noisy_degrees(g: Graph, eps1: float, rng: RngStream) -> np.ndarray:
    deg = g.degrees()
    return np.array([noisy_degree(int(deg[v]), eps1, rng.vertex(v)) for v in range(g.n)])


def randomize_lists(g: Graph, eps2: float, rng: RngStream) -> List[NeighborBits]:
    rows = g.to_matrix()
    return [perturb_neighbor_bits(NeighborBits(v, rows[v]), eps2, rng.vertex(v)) for v in range(g.n)]


def run_graph_agg(
    g: Graph,
    params: PrivacyParams,
    variant: Union[Variant, str] = Variant.AND_ONLY,
    rng: Optional[RngStream] = None,
) -> SyntheticGraph:
    """Both rounds of graph aggregation.

    AND-only derives eps2 from the density estimate unless ``params.eps2``
    pins it; AND/OR always uses ``params.eps2``. A density estimate above
    1/2 makes every vertex report its complement row and the curator
    complements the result.
    """
    variant = Variant(variant)
    rng = rng if rng is not None else RngStream(0)
    if params.eps1 is None:
        raise ValueError("eps1 is required")
    if g.n < 2:
        raise ValueError("graph aggregation needs at least two vertices")

    # Round 1: noisy degrees -> density estimate.
    gamma_hat = estimate_density(collect_noisy_degrees(g, params.eps1, rng), g.n)
    flipped = gamma_hat > 0.5
    target = complement(g) if flipped else g
    working_gamma = 1.0 - gamma_hat if flipped else gamma_hat

    # Round 2: full-list randomized response, then curator merge.
    if variant is Variant.AND_ONLY and params.eps2 is None:
        eps2 = epsilon2_for_density(working_gamma)
    else:
        if params.eps2 is None:
            raise ValueError("eps2 is required for the AND/OR variant")
        eps2 = params.eps2
    p = flip_probability(eps2)
    lists = randomize_lists(target, eps2, rng)

    notes: List[str] = []
    if variant is Variant.AND_ONLY:
        alpha = 1.0
        adjacency = aggregate_and(lists)
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", AlphaClampWarning)
            alpha = alpha_for(working_gamma, p) if p > 0 else 1.0
        for w in caught:
            notes.append(str(w.message))
            warnings.warn(w.message, w.category, stacklevel=2)
        adjacency = aggregate_and_or(lists, alpha, rng.curator())

    if flipped:
        adjacency = 1 - adjacency
        np.fill_diagonal(adjacency, 0)
    return SyntheticGraph.from_adjacency(
        adjacency,
        gamma_hat=gamma_hat,
        p=p,
        alpha=alpha,
        eps1=params.eps1,
        eps2=eps2,
        complemented=flipped,
        warnings=notes,
    )


def run_rnl_baseline(g: Graph, eps: float, rng: Optional[RngStream] = None) -> SyntheticGraph:
    """Each vertex u randomizes only positions u+1..n-1; the curator mirrors them."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    rng = rng if rng is not None else RngStream(0)
    rows = g.to_matrix()
    n = g.n
    a = np.zeros((n, n), dtype=np.uint8)
    for u in range(n - 1):
        a[u, u + 1 :] = rr_bits(rows[u, u + 1 :], eps, rng.vertex(u))
    a = a | a.T
    return SyntheticGraph.from_adjacency(a, p=flip_probability(eps))
