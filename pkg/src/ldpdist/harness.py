"""Experiment driver: trials, sweeps and simulator tables written as CSV."""

from __future__ import annotations

import csv
import dataclasses
import enum
import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, IO, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import analysis
from .analysis import MinLaplaceMethod, SimulationSpec, UnreachablePolicy
from .graph import Graph, density, distances_from_adjacency, exact_all_pairs, parse_edge_list
from .graph_agg import Variant, run_graph_agg, run_rnl_baseline
from .mechanisms import TRIAL, Mechanism, PrivacyParams, Protocol, RngStream, total_budget
from .neigh_agg import diameter_upper_bound, run_neigh_agg

CSV_COLUMNS = (
    "dataset",
    "method",
    "epsilon_total",
    "T",
    "seed",
    "trial",
    "rmae",
    "mre",
    "runtime_ms",
    "gamma_hat",
    "gamma_bar",
    "p",
    "alpha",
)


class Method(str, enum.Enum):
    GRAPH_AGG_AND = "GraphAggAnd"
    GRAPH_AGG_AND_OR = "GraphAggAndOr"
    RNL = "RNL"
    NEIGH_AGG_LAPLACE = "NeighAggLaplace"
    NEIGH_AGG_RR = "NeighAggRR"

    @property
    def is_graph_agg(self) -> bool:
        return self in (Method.GRAPH_AGG_AND, Method.GRAPH_AGG_AND_OR)

    @property
    def is_neigh_agg(self) -> bool:
        return self in (Method.NEIGH_AGG_LAPLACE, Method.NEIGH_AGG_RR)


@dataclass
class ExperimentConfig:
    dataset: Optional[str] = None
    directed: bool = False
    complement: bool = False
    largest_component: bool = False
    method: Method = Method.NEIGH_AGG_RR
    eps1: Optional[float] = None
    eps2: Optional[float] = None
    eps: Optional[float] = None
    T: int = 6
    seed: int = 0
    repeats: int = 1
    unreachable: UnreachablePolicy = UnreachablePolicy.CAP
    cap: float = 6.0
    out: Optional[str] = None
    timing: bool = True
    jobs: int = 1
    cache_dir: Optional[str] = None

    def __post_init__(self):
        self.method = Method(self.method)
        self.unreachable = UnreachablePolicy(self.unreachable)
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        for name in ("eps1", "eps2", "eps"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_mapping(cls, data: Dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def params(self) -> PrivacyParams:
        m = self.method
        if m.is_graph_agg:
            if self.eps1 is None:
                raise ValueError(f"{m.value} needs --eps1")
            if m is Method.GRAPH_AGG_AND_OR and self.eps2 is None:
                raise ValueError(f"{m.value} needs --eps2")
            return PrivacyParams(eps1=self.eps1, eps2=self.eps2, T=self.T)
        if self.eps is None:
            raise ValueError(f"{m.value} needs --eps")
        mech = Mechanism.LAPLACE if m is Method.NEIGH_AGG_LAPLACE else Mechanism.RR
        return PrivacyParams(eps=self.eps, T=self.T, mechanism=mech)

    def with_budget(self, value: float) -> "ExperimentConfig":
        """Copy with the method's primary budget set: eps1 for graph aggregation, eps otherwise."""
        key = "eps1" if self.method.is_graph_agg else "eps"
        return dataclasses.replace(self, **{key: value})


@dataclass
class ResultRecord:
    dataset: str
    method: str
    epsilon_total: float
    T: int
    seed: int
    trial: object
    rmae: float
    mre: float
    runtime_ms: Optional[float] = None
    gamma_hat: Optional[float] = None
    gamma_bar: Optional[float] = None
    p: Optional[float] = None
    alpha: Optional[float] = None

    def row(self, timing: bool = True) -> List[str]:
        values = dataclasses.asdict(self)
        if not timing:
            values["runtime_ms"] = None
        return [_cell(values[c]) for c in CSV_COLUMNS]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


# --- dataset + truth --------------------------------------------------------


@dataclass
class Dataset:
    name: str
    graph: Graph
    truth: np.ndarray
    digest: str = ""


def _digest(raw: bytes, cfg: ExperimentConfig) -> str:
    h = hashlib.sha256(raw)
    h.update(f"|directed={cfg.directed}|complement={cfg.complement}|lcc={cfg.largest_component}".encode())
    return h.hexdigest()


def load_dataset(cfg: ExperimentConfig, report_stream: Optional[IO] = None) -> Dataset:
    if not cfg.dataset:
        raise ValueError("no dataset given")
    with open(cfg.dataset, "rb") as fh:
        raw = fh.read()
    g, report = parse_edge_list(raw, cfg.directed, cfg.complement, cfg.largest_component)
    if report_stream is not None:
        print(report.summary(), file=report_stream)
    digest = _digest(raw, cfg)
    name = os.path.splitext(os.path.basename(cfg.dataset))[0]
    return Dataset(name, g, cached_truth(g, digest, cfg.cache_dir), digest)


def cached_truth(g: Graph, digest: str, cache_dir: Optional[str]) -> np.ndarray:
    """Exact distances, memoized on disk by content hash when ``cache_dir`` is set."""
    if cache_dir is None:
        return exact_all_pairs(g)
    path = os.path.join(cache_dir, f"truth-{digest[:32]}.npy")
    if os.path.exists(path):
        truth = np.load(path)
        if truth.shape == (g.n, g.n):
            return truth
    truth = exact_all_pairs(g)
    os.makedirs(cache_dir, exist_ok=True)
    tmp = path + f".{os.getpid()}.tmp.npy"
    np.save(tmp, truth)
    os.replace(tmp, path)
    return truth


# --- trials -----------------------------------------------------------------


def trial_stream(seed: int, trial: int) -> RngStream:
    return RngStream(seed, (TRIAL, trial))


def budget_of(cfg: ExperimentConfig, eps2_used: Optional[float] = None) -> float:
    m = cfg.method
    params = cfg.params()
    if m.is_graph_agg:
        return total_budget(Protocol.GRAPH_AGG, dataclasses.replace(params, eps2=eps2_used or params.eps2))
    if m is Method.RNL:
        return total_budget(Protocol.RNL, params)
    return total_budget(Protocol.NEIGH_AGG, params)


def run_trial(ds: Dataset, cfg: ExperimentConfig, trial: int) -> ResultRecord:
    params = cfg.params()
    rng = trial_stream(cfg.seed, trial)
    start = time.perf_counter()
    extras: Dict[str, Optional[float]] = {}
    m = cfg.method
    if m.is_neigh_agg:
        estimate = run_neigh_agg(ds.graph, params, rng)
    else:
        if m is Method.RNL:
            synth = run_rnl_baseline(ds.graph, cfg.eps, rng)
        else:
            variant = Variant.AND_ONLY if m is Method.GRAPH_AGG_AND else Variant.AND_OR
            synth = run_graph_agg(ds.graph, params, variant, rng)
        estimate = distances_from_adjacency(synth.adjacency)
        extras = dict(gamma_hat=synth.gamma_hat, gamma_bar=synth.gamma_bar, p=synth.p, alpha=synth.alpha)
        if m.is_graph_agg:
            extras["_eps2"] = synth.eps2
    report = analysis.metric_report(ds.truth, estimate, cfg.cap, cfg.unreachable)
    elapsed = (time.perf_counter() - start) * 1000.0
    eps2_used = extras.pop("_eps2", None)
    return ResultRecord(
        dataset=ds.name,
        method=m.value,
        epsilon_total=budget_of(cfg, eps2_used),
        T=cfg.T,
        seed=cfg.seed,
        trial=trial,
        rmae=report.rmae,
        mre=report.mre,
        runtime_ms=elapsed,
        **extras,
    )


def _run_one(job: Tuple[Dataset, ExperimentConfig, int]) -> ResultRecord:
    return run_trial(*job)


def _run_jobs(jobs: Sequence[Tuple[Dataset, ExperimentConfig, int]], workers: int) -> List[ResultRecord]:
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def cmd_run(cfg: ExperimentConfig, dataset: Optional[Dataset] = None) -> List[ResultRecord]:
    cfg.params()  # fail fast on missing budgets
    ds = dataset if dataset is not None else load_dataset(cfg)
    return _run_jobs([(ds, cfg, t) for t in range(cfg.repeats)], cfg.jobs)


def summary_rows(records: Sequence[ResultRecord]) -> List[ResultRecord]:
    first = records[0]
    out = []
    for label, fn in (("mean", np.mean), ("std", lambda x: np.std(x, ddof=1) if len(x) > 1 else 0.0)):
        def agg(name):
            vals = [getattr(r, name) for r in records if getattr(r, name) is not None]
            return float(fn(vals)) if vals else None

        out.append(
            ResultRecord(
                dataset=first.dataset,
                method=first.method,
                epsilon_total=first.epsilon_total,
                T=first.T,
                seed=first.seed,
                trial=label,
                rmae=agg("rmae"),
                mre=agg("mre"),
                runtime_ms=agg("runtime_ms"),
                gamma_hat=agg("gamma_hat"),
                gamma_bar=agg("gamma_bar"),
                p=agg("p"),
                alpha=agg("alpha"),
            )
        )
    return out


def cmd_sweep(
    cfg: ExperimentConfig,
    budget_grid: Sequence[float],
    t_grid: Optional[Sequence[int]] = None,
    dataset: Optional[Dataset] = None,
) -> List[ResultRecord]:
    """Every (budget, T) cell x repeats; each cell is followed by mean/std rows."""
    if not budget_grid:
        raise ValueError("budget grid is empty")
    t_values = list(t_grid) if t_grid else [cfg.T]
    if not t_values:
        raise ValueError("T grid is empty")
    ds = dataset if dataset is not None else load_dataset(cfg)
    cells = [dataclasses.replace(cfg.with_budget(b), T=int(T)) for b in budget_grid for T in t_values]
    for c in cells:
        c.params()
    jobs = [(ds, c, t) for c in cells for t in range(cfg.repeats)]
    flat = _run_jobs(jobs, cfg.jobs)
    out: List[ResultRecord] = []
    for i in range(len(cells)):
        block = flat[i * cfg.repeats : (i + 1) * cfg.repeats]
        out.extend(block)
        out.extend(summary_rows(block))
    return out


def write_records(records: Iterable[ResultRecord], stream: IO, timing: bool = True) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row(timing))


# --- simulators -------------------------------------------------------------

SIM_COLUMNS = ("mode", "epsilon", "n", "t", "T", "repeats", "mean", "std", "p05", "p95")
MIN_LAPLACE_COLUMNS = ("n", "b", "exact_series", "monte_carlo", "monte_carlo_stderr", "closed_form")


def cmd_simulate(
    spec: SimulationSpec,
    mode: str,
    eps_grid: Sequence[float] = tuple(range(1, 9)),
    seed: int = 0,
    clamp: bool = True,
    widths: Sequence[int] = (2, 3, 5),
    b: float = 1.0,
) -> Tuple[Tuple[str, ...], List[Dict[str, object]]]:
    mode = mode.upper() if mode.lower() in ("y1", "y2") else mode
    rows: List[Dict[str, object]] = []
    if mode in ("Y1", "Y2"):
        for eps in eps_grid:
            cell = dataclasses.replace(spec, eps=float(eps))
            rng = RngStream(seed).child(int(round(float(eps) * 1000)))
            if mode == "Y1":
                samples = analysis.simulate_y1(cell, rng, clamp=clamp)
            else:
                samples = analysis.simulate_y2(cell, rng)
            rows.append(
                dict(mode=mode, epsilon=float(eps), n=cell.n, t=cell.t, T=cell.T, repeats=cell.repeats,
                     **analysis.summarize(samples))
            )
        return SIM_COLUMNS, rows
    if mode.lower() in ("minlaplace", "min_laplace"):
        for n in widths:
            exact = analysis.min_laplace_expectation(n, b, MinLaplaceMethod.EXACT_SERIES)
            mc = analysis.min_laplace_expectation(n, b, MinLaplaceMethod.MONTE_CARLO, RngStream(seed).child(n))
            closed = (
                analysis.min_laplace_expectation(n, b, MinLaplaceMethod.PAPER_CLOSED_FORM).value
                if n > 1
                else None
            )
            rows.append(
                dict(n=n, b=b, exact_series=exact.value, monte_carlo=mc.value,
                     monte_carlo_stderr=mc.stderr, closed_form=closed)
            )
        return MIN_LAPLACE_COLUMNS, rows
    raise ValueError(f"unknown simulation mode {mode!r}")


def write_rows(columns: Sequence[str], rows: Iterable[Dict[str, object]], stream: IO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])


def dataset_stats(ds: Dataset, additive_constant: int = 1) -> Dict[str, object]:
    g = ds.graph
    finite = ds.truth[np.isfinite(ds.truth)]
    return {
        "dataset": ds.name,
        "n": g.n,
        "m": g.m,
        "density": density(g),
        "min_degree": int(g.degrees().min()),
        "diameter": int(finite.max()) if finite.size else 0,
        "connected": bool(np.isfinite(ds.truth).all()),
        "diameter_bound": diameter_upper_bound(g, additive_constant),
    }
