"""Command-line entry point (``ldpdist``)."""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from typing import Dict, List, Optional

from . import harness
from .analysis import SimulationSpec
from .harness import ExperimentConfig, Method

# Flags that map one-to-one onto ExperimentConfig fields.
_CONFIG_FLAGS = (
    "dataset", "directed", "complement", "largest_component", "method", "eps1", "eps2", "eps",
    "T", "seed", "repeats", "unreachable", "cap", "out", "timing", "jobs", "cache_dir",
)


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text: str) -> List[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _read_config(path: str) -> Dict:
    with open(path, "r", encoding="utf-8") as fh:
        if path.endswith((".yaml", ".yml")):
            import yaml

            data = yaml.safe_load(fh) or {}
        else:
            data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping")
    return data


def _experiment_args(p: argparse.ArgumentParser) -> None:
    # Defaults are None so that flags only override the config file when given.
    p.add_argument("--config", help="JSON or YAML file with ExperimentConfig fields")
    p.add_argument("--dataset", help="edge-list file")
    p.add_argument("--directed", action="store_const", const=True, help="input arcs are directed")
    p.add_argument("--complement", action="store_const", const=True, help="use the complement graph")
    p.add_argument("--largest-component", action="store_const", const=True, dest="largest_component")
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--eps1", type=float, help="degree-round budget (graph aggregation)")
    p.add_argument("--eps2", type=float, help="neighbor-list budget (derived for GraphAggAnd if absent)")
    p.add_argument("--eps", type=float, help="per-report budget (RNL, neighbor aggregation)")
    p.add_argument("--T", type=int, help="distance threshold (default 6)")
    p.add_argument("--seed", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--unreachable", choices=["cap", "exclude"])
    p.add_argument("--cap", type=float, help="distance used for unreachable pairs (default 6)")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.add_argument("--no-timing", action="store_const", const=False, dest="timing")
    p.add_argument("--jobs", type=int, help="worker processes for trials")
    p.add_argument("--cache-dir", dest="cache_dir", help="cache exact distance matrices here")


def build_config(ns: argparse.Namespace) -> ExperimentConfig:
    data = _read_config(ns.config) if getattr(ns, "config", None) else {}
    for key in _CONFIG_FLAGS:
        value = getattr(ns, key, None)
        if value is not None:
            data[key] = value
    return ExperimentConfig.from_mapping(data)


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _cmd_run(ns) -> int:
    cfg = build_config(ns)
    ds = harness.load_dataset(cfg, report_stream=sys.stderr)
    records = harness.cmd_run(cfg, ds)
    with _output(cfg.out) as fh:
        harness.write_records(records, fh, timing=cfg.timing)
    return 0


def _cmd_sweep(ns) -> int:
    cfg = build_config(ns)
    ds = harness.load_dataset(cfg, report_stream=sys.stderr)
    records = harness.cmd_sweep(cfg, ns.budgets, ns.t_grid, ds)
    with _output(cfg.out) as fh:
        harness.write_records(records, fh, timing=cfg.timing)
    return 0


def _cmd_simulate(ns) -> int:
    spec = SimulationSpec(n=ns.n, t=ns.t, T=ns.T, repeats=ns.repeats)
    columns, rows = harness.cmd_simulate(
        spec, ns.mode, ns.eps_grid, seed=ns.seed, clamp=not ns.no_clamp, widths=ns.widths, b=ns.b
    )
    with _output(ns.out) as fh:
        harness.write_rows(columns, rows, fh)
    return 0


def _cmd_stats(ns) -> int:
    cfg = build_config(ns)
    ds = harness.load_dataset(cfg, report_stream=sys.stderr)
    stats = harness.dataset_stats(ds, ns.additive_constant)
    with _output(cfg.out) as fh:
        harness.write_rows(list(stats), [stats], fh)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldpdist", description="Locally private distance queries on graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="repeated trials of one method on one dataset")
    _experiment_args(run)
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="grid over budgets and thresholds")
    _experiment_args(sweep)
    sweep.add_argument("--budgets", type=_floats, required=True,
                       help="values for eps1 (graph aggregation) or eps (other methods)")
    sweep.add_argument("--t-grid", type=_ints, dest="t_grid", help="values of T, e.g. '1,2,3'")
    sweep.set_defaults(func=_cmd_sweep)

    sim = sub.add_parser("simulate", help="random-variable models of the final estimate")
    sim.add_argument("--mode", choices=["Y1", "Y2", "MinLaplace"], required=True)
    sim.add_argument("--n", type=int, default=10_000)
    sim.add_argument("--t", type=int, default=4)
    sim.add_argument("--T", type=int, default=6)
    sim.add_argument("--repeats", type=int, default=1_000)
    sim.add_argument("--eps-grid", type=_floats, default=[1, 2, 3, 4, 5, 6, 7, 8], dest="eps_grid")
    sim.add_argument("--no-clamp", action="store_true", help="Y1: keep values below 1")
    sim.add_argument("--widths", type=_ints, default=[2, 3, 5], help="MinLaplace: values of n")
    sim.add_argument("--b", type=float, default=1.0, help="MinLaplace: Laplace scale")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out")
    sim.set_defaults(func=_cmd_simulate)

    stats = sub.add_parser("stats", help="dataset summary")
    _experiment_args(stats)
    stats.add_argument("--additive-constant", type=int, default=1, dest="additive_constant")
    stats.set_defaults(func=_cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (ValueError, OSError) as exc:
        print(f"ldpdist {ns.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
