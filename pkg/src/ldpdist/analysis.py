"""Error metrics and the random-variable models of the final distance estimate."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .mechanisms import RngStream, distance_resample_probability, laplace


class UnreachablePolicy(str, enum.Enum):
    CAP = "cap"
    EXCLUDE = "exclude"


@dataclass
class MetricReport:
    rmae: float
    mre: float
    pairs: int
    policy: UnreachablePolicy


def _prepare(truth, noisy, cap: float, policy: UnreachablePolicy) -> Tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(truth, dtype=np.float64)
    noisy = np.asarray(noisy, dtype=np.float64)
    if truth.shape != noisy.shape or truth.ndim != 2 or truth.shape[0] != truth.shape[1]:
        raise ValueError(f"matrix shapes differ or are not square: {truth.shape} vs {noisy.shape}")
    off = ~np.eye(truth.shape[0], dtype=bool)
    d = truth[off]
    est = noisy[off]
    # Pairs a synthetic graph disconnects are reported at the cap.
    est = np.where(np.isfinite(est), est, cap)
    if UnreachablePolicy(policy) is UnreachablePolicy.EXCLUDE:
        keep = np.isfinite(d)
        d, est = d[keep], est[keep]
    else:
        d = np.where(np.isfinite(d), d, cap)
    return d, est


def rmae(truth, noisy, cap: float = 6, policy: UnreachablePolicy = UnreachablePolicy.CAP) -> float:
    """Mean over ordered off-diagonal pairs of |d' - d| / d."""
    d, est = _prepare(truth, noisy, cap, policy)
    if d.size == 0:
        raise ValueError("no vertex pairs to compare")
    if np.any(d == 0):
        raise ValueError("true distance 0 between distinct vertices")
    return float(np.mean(np.abs(est - d) / d))


def mre(truth, noisy, cap: float = 6, policy: UnreachablePolicy = UnreachablePolicy.CAP) -> float:
    """Relative error of the mean distance."""
    d, est = _prepare(truth, noisy, cap, policy)
    if d.size == 0:
        raise ValueError("no vertex pairs to compare")
    mean_true = d.mean()
    if mean_true == 0:
        raise ValueError("mean true distance is zero")
    return float(abs(est.mean() - mean_true) / mean_true)


def metric_report(truth, noisy, cap: float = 6, policy=UnreachablePolicy.CAP) -> MetricReport:
    policy = UnreachablePolicy(policy)
    pairs = _prepare(truth, noisy, cap, policy)[0].size
    return MetricReport(rmae(truth, noisy, cap, policy), mre(truth, noisy, cap, policy), pairs, policy)


# --- models of the final estimate -------------------------------------------


@dataclass
class SimulationSpec:
    """Setup for the Y1 / Y2 simulators.

    ``a`` holds the three counts of the target's neighbors at distance t-1, t
    and t+1 from the source; ``m`` holds the k-hop population sizes for
    k = 1 .. T-1. Leave both unset for the uniform approximation.
    """

    n: int = 10_000
    t: int = 4
    T: int = 6
    eps: float = 1.0
    repeats: int = 1_000
    a: Optional[Tuple[int, int, int]] = None
    m: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if not 2 <= self.t <= self.T - 2:
            raise ValueError(f"need 2 <= t <= T - 2, got t={self.t}, T={self.T}")
        if self.n < 3:
            raise ValueError("n must be at least 3")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if (self.a is None) != (self.m is None):
            raise ValueError("explicit counts need both a and m")
        if self.m is not None and len(self.m) != self.T - 1:
            raise ValueError(f"m needs T-1={self.T - 1} entries, got {len(self.m)}")

    @property
    def uniform(self) -> bool:
        return self.a is None


class Histogram(NamedTuple):
    support: np.ndarray
    probs: np.ndarray
    total: float

    def sample(self, rng: RngStream, size) -> np.ndarray:
        return rng.generator.choice(self.support, size=size, p=self.probs)


@dataclass
class WHistograms:
    W: Histogram
    W1: Histogram
    W2: Histogram
    # Number of draws from W1 / W2 per trial.
    m_draws: int = 0
    a_draws: int = 0
    counts: Dict[int, float] = field(default_factory=dict)


def _normalized(counts: Dict[int, float]) -> Histogram:
    support = np.array(sorted(counts), dtype=np.int64)
    mass = np.array([counts[s] for s in support], dtype=np.float64)
    total = float(mass.sum())
    probs = mass / total if total > 0 else mass
    return Histogram(support, probs, total)


def build_w_histograms(spec: SimulationSpec) -> WHistograms:
    t, T = spec.t, spec.T
    near = [t, t + 1, t + 2]
    far = [T + k for k in range(1, T)]
    if spec.uniform:
        c2 = {v: 1.0 for v in near}
        c1 = {v: 1.0 for v in far}
    else:
        a1, a2, a3 = spec.a
        c2 = dict(zip(near, (a1, a2, a3)))
        m = list(spec.m)
        m[t - 2] -= a1  # k = t - 1
        m[t - 1] -= a2 + 1  # k = t; the target itself is not relayed
        m[t] -= a3  # k = t + 1
        c1 = dict(zip(far, m))
        negative = {k: v for k, v in list(c1.items()) + list(c2.items()) if v < 0}
        if negative:
            raise ValueError(f"negative adjusted histogram counts: {negative}")
        if sum(c1.values()) + sum(c2.values()) != spec.n - 2:
            raise ValueError(
                f"histogram counts total {sum(c1.values()) + sum(c2.values())}, expected n-2={spec.n - 2}"
            )
    W1, W2 = _normalized(c1), _normalized(c2)
    W = _normalized({**c1, **c2})
    if spec.uniform:
        a_draws = int(round((spec.n - 2) * W2.total / W.total))
    else:
        a_draws = int(W2.total)
    return WHistograms(W, W1, W2, m_draws=spec.n - 2 - a_draws, a_draws=a_draws, counts={**c1, **c2})


def _trial_chunks(repeats: int, width: int, budget: int = 4_000_000):
    per = max(1, budget // max(width, 1))
    start = 0
    while start < repeats:
        stop = min(repeats, start + per)
        yield start, stop
        start = stop


def simulate_y1(spec: SimulationSpec, rng: RngStream, clamp: bool = True) -> np.ndarray:
    """min(T, min of n-2 draws of W + Laplace((T-1)/eps)), optionally floored at 1."""
    hist = build_w_histograms(spec).W
    width = spec.n - 2
    scale = (spec.T - 1) / spec.eps
    out = np.empty(spec.repeats)
    for start, stop in _trial_chunks(spec.repeats, width):
        sub = rng.child(start)
        w = hist.sample(sub, (stop - start, width))
        x = laplace(scale, sub, (stop - start, width))
        out[start:stop] = np.minimum(spec.T, (w + x).min(axis=1))
    if clamp:
        out = np.maximum(out, 1.0)
    return out


def rr_offset_probability(T: int, p: float) -> float:
    """Probability that the additive offset in the RR model is non-zero."""
    return (T - 2) / (T - 1) * p


def simulate_y2(spec: SimulationSpec, rng: RngStream, p: Optional[float] = None) -> np.ndarray:
    """min(T, min of m draws W1 + X1, min of a draws W2 + X2).

    X1 is 0 or uniform on {1-T..-1}; X2 is 0 or uniform on {1..T-1}. ``p``
    overrides the resampling probability implied by ``spec.eps``.
    """
    h = build_w_histograms(spec)
    T = spec.T
    if p is None:
        p = distance_resample_probability(spec.eps, T)
    q = rr_offset_probability(T, p)
    out = np.empty(spec.repeats)
    width = spec.n - 2
    for start, stop in _trial_chunks(spec.repeats, width):
        sub = rng.child(start)
        rows = stop - start
        best = np.full(rows, float(T))
        if h.m_draws:
            w1 = h.W1.sample(sub, (rows, h.m_draws))
            x1 = np.where(sub.uniform((rows, h.m_draws)) < q, sub.integers(1 - T, 0, (rows, h.m_draws)), 0)
            best = np.minimum(best, (w1 + x1).min(axis=1))
        if h.a_draws:
            w2 = h.W2.sample(sub, (rows, h.a_draws))
            x2 = np.where(sub.uniform((rows, h.a_draws)) < q, sub.integers(1, T, (rows, h.a_draws)), 0)
            best = np.minimum(best, (w2 + x2).min(axis=1))
        out[start:stop] = best
    return out


def summarize(samples: Sequence[float]) -> Dict[str, float]:
    s = np.asarray(samples, dtype=np.float64)
    return {
        "mean": float(s.mean()),
        "std": float(s.std(ddof=1)) if s.size > 1 else 0.0,
        "p05": float(np.percentile(s, 5)),
        "p95": float(np.percentile(s, 95)),
    }


# --- expected minimum of i.i.d. Laplace draws -------------------------------


class MinLaplaceMethod(str, enum.Enum):
    EXACT_SERIES = "exact"
    MONTE_CARLO = "monte_carlo"
    PAPER_CLOSED_FORM = "closed_form"


class Estimate(NamedTuple):
    value: float
    stderr: float = 0.0


def _exact_min_laplace(n: int) -> Fraction:
    """E[min of n Laplace(0, 1)] as an exact rational."""
    series = sum(
        Fraction(math.comb(n, k) * (-1) ** (k + 1), k * 2**k) for k in range(1, n + 1)
    )
    return Fraction(1, n * 2**n) - series


def min_laplace_expectation(
    n: int,
    b: float = 1.0,
    method: MinLaplaceMethod = MinLaplaceMethod.EXACT_SERIES,
    rng: Optional[RngStream] = None,
    draws: int = 1_000_000,
) -> Estimate:
    """Expected minimum of ``n`` i.i.d. Laplace(0, b) variables.

    The closed form ``b ln(1/2 - 1/(n+1))`` is kept for comparison; it does
    not match direct integration.
    """
    method = MinLaplaceMethod(method)
    if n < 1:
        raise ValueError("n must be at least 1")
    if not b > 0:
        raise ValueError("b must be positive")
    if method is MinLaplaceMethod.EXACT_SERIES:
        return Estimate(b * float(_exact_min_laplace(n)))
    if method is MinLaplaceMethod.PAPER_CLOSED_FORM:
        if n < 2:
            raise ValueError("closed form is only stated for n > 1")
        return Estimate(b * math.log(0.5 - 1.0 / (n + 1)))
    if draws < 1_000_000:
        raise ValueError("Monte Carlo estimate needs at least 10^6 draws")
    rng = rng if rng is not None else RngStream(0)
    total = 0.0
    total_sq = 0.0
    for start, stop in _trial_chunks(draws, n):
        mins = laplace(b, rng.child(start), (stop - start, n)).min(axis=1)
        total += mins.sum()
        total_sq += np.square(mins).sum()
    mean = total / draws
    var = max(total_sq / draws - mean**2, 0.0) * draws / (draws - 1)
    return Estimate(mean, math.sqrt(var / draws))
