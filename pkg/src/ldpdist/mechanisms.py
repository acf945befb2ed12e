"""Randomness primitives: Laplace noise, randomized response and budget accounting.

Every sampler takes an :class:`RngStream`, so a draw is fully determined by
``(seed, stream_id)`` plus the order of calls on that stream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

# Role tags used as the first element of a stream id.
VERTEX = 0
CURATOR = 1
TRIAL = 2
SIMULATION = 3


class Mechanism(str, enum.Enum):
    LAPLACE = "laplace"
    RR = "rr"


class Protocol(str, enum.Enum):
    GRAPH_AGG = "graph_agg"
    NEIGH_AGG = "neigh_agg"
    NEIGH_AGG_WITH_DEGREE_ROUND = "neigh_agg_with_degree_round"
    RNL = "rnl"


@dataclass(frozen=True)
class PrivacyParams:
    """Budgets and threshold for one protocol run.

    ``eps = math.inf`` switches perturbation off (the noiseless limit).
    """

    eps1: Optional[float] = None
    eps2: Optional[float] = None
    eps: Optional[float] = None
    T: int = 6
    mechanism: Mechanism = Mechanism.RR

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T!r}")
        for name in ("eps1", "eps2", "eps"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))

    @property
    def bit_flip_probability(self) -> float:
        return flip_probability(_require(self.eps2, "eps2"))

    @property
    def distance_resample_probability(self) -> float:
        return distance_resample_probability(_require(self.eps, "eps"), self.T)


def _require(value, name):
    if value is None:
        raise ValueError(f"{name} is required but not set")
    return value


@dataclass
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    ``child`` derives independent sub-streams, e.g. one per vertex, so the
    result of a vertex-level step does not depend on evaluation order.
    """

    seed: int
    stream_id: Tuple[int, ...] = ()
    _gen: Optional[np.random.Generator] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.stream_id, int):
            self.stream_id = (self.stream_id,)
        self.stream_id = tuple(int(s) for s in self.stream_id)
        if any(s < 0 for s in self.stream_id):
            raise ValueError("stream ids must be non-negative")

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(entropy=int(self.seed) & (2**64 - 1), spawn_key=self.stream_id)
            self._gen = np.random.Generator(np.random.PCG64(seq))
        return self._gen

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + tuple(ids))

    def vertex(self, v: int) -> "RngStream":
        return self.child(VERTEX, v)

    def curator(self) -> "RngStream":
        return self.child(CURATOR)

    def uniform(self, size=None):
        return self.generator.random(size)

    def integers(self, low: int, high: int, size=None):
        return self.generator.integers(low, high, size=size)


def flip_probability(eps: float) -> float:
    """1 / (1 + e^eps), written to stay finite for huge or infinite eps."""
    e = math.exp(-eps)
    return e / (1.0 + e)


def distance_resample_probability(eps: float, T: int) -> float:
    """T / (e^eps + T - 1)."""
    e = math.exp(-eps)
    return T * e / (1.0 + (T - 1) * e)


_HALF_OPEN_LOW = math.nextafter(-0.5, 0.0)


def laplace(scale: float, rng: RngStream, size=None):
    """Laplace(0, scale) draws by inverse CDF of one uniform per draw."""
    if not scale > 0:
        raise ValueError(f"Laplace scale must be positive, got {scale!r}")
    u = rng.generator.uniform(_HALF_OPEN_LOW, 0.5, size)
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def laplace_sample(scale: float, rng: RngStream) -> float:
    return float(laplace(scale, rng))


def rr_bits(bits, eps: float, rng: RngStream) -> np.ndarray:
    """Flip each bit independently with probability 1/(1+e^eps)."""
    bits = np.asarray(bits, dtype=np.uint8)
    flips = rng.uniform(bits.shape) < flip_probability(eps)
    return bits ^ flips.astype(np.uint8)


def rr_bit(b: int, eps: float, rng: RngStream) -> int:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if b not in (0, 1):
        raise ValueError(f"expected a bit, got {b!r}")
    return int(rr_bits(np.array([b]), eps, rng)[0])


def rr_distances(values, eps: float, T: int, rng: RngStream) -> np.ndarray:
    """Keep each value w.p. 1-p, else resample uniformly from {1..T}."""
    values = np.asarray(values)
    if values.size and (values.min() < 1 or values.max() > T):
        raise ValueError(f"hop counts must lie in [1, {T}]")
    p = distance_resample_probability(eps, T)
    resample = rng.uniform(values.shape) < p
    fresh = rng.integers(1, T + 1, size=values.shape)
    return np.where(resample, fresh, values).astype(np.int64)


def rr_distance(x: int, params: PrivacyParams, rng: RngStream) -> int:
    T = params.T
    if not 1 <= x <= T:
        raise ValueError(f"hop count {x} outside [1, {T}]")
    return int(rr_distances(np.array([x]), _require(params.eps, "eps"), T, rng)[0])


@dataclass
class NeighborBits:
    """One vertex's (possibly perturbed) adjacency row."""

    owner: int
    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)


def perturb_neighbor_bits(bits: NeighborBits, eps: float, rng: RngStream) -> NeighborBits:
    """Randomize every position of the row, the diagonal one included."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    return NeighborBits(bits.owner, rr_bits(bits.bits, eps, rng))


@dataclass
class DistanceVector:
    owner: int
    round: int
    entries: np.ndarray


def perturb_distance_vector(vec: DistanceVector, params: PrivacyParams, rng: RngStream) -> DistanceVector:
    """Perturb an initial-round vector; the owner's own entry stays 0."""
    T = params.T
    eps = _require(params.eps, "eps")
    entries = np.asarray(vec.entries)
    others = np.ones(entries.shape[0], dtype=bool)
    others[vec.owner] = False
    if vec.round != 0 or entries[vec.owner] != 0 or not np.all(
        (entries[others] == 1) | (entries[others] == T)
    ):
        raise ValueError("distance vector is not in initial form (0 self, 1 neighbors, T otherwise)")

    if params.mechanism is Mechanism.LAPLACE:
        out = entries.astype(np.float64)
        scale = (T - 1) / eps
        # T = 1 has zero sensitivity; eps = inf is the noiseless limit.
        if scale > 0:
            out[others] += laplace(scale, rng, int(others.sum()))
    else:
        out = entries.astype(np.int64)
        out[others] = rr_distances(out[others], eps, T, rng)
    return DistanceVector(vec.owner, 0, out)


def noisy_degree(d, eps1: float, rng: RngStream):
    """d + (2 / eps1) * Lap(1); ``d`` may be a scalar or an array of degrees."""
    if not eps1 > 0:
        raise ValueError(f"eps1 must be positive, got {eps1!r}")
    if np.ndim(d) == 0:
        if math.isinf(eps1):
            return float(d)
        return d + (2.0 / eps1) * laplace_sample(1.0, rng)
    d = np.asarray(d, dtype=np.float64)
    if math.isinf(eps1):
        return d.copy()
    return d + (2.0 / eps1) * laplace(1.0, rng, d.shape)


def total_budget(protocol: Protocol, params: PrivacyParams) -> float:
    """Per-edge LDP budget spent by a protocol run.

    Every edge is reported by both endpoints, hence the factor 2 except for
    the upper-triangle RNL baseline where only one endpoint reports.
    """
    protocol = Protocol(protocol)
    if protocol in (Protocol.GRAPH_AGG, Protocol.NEIGH_AGG_WITH_DEGREE_ROUND):
        return 2.0 * (_require(params.eps1, "eps1") + _require(params.eps2, "eps2"))
    if protocol is Protocol.NEIGH_AGG:
        return 2.0 * _require(params.eps, "eps")
    return float(_require(params.eps, "eps"))
