"""Locally differentially private distance queries on distributed graphs."""

from .analysis import (
    MetricReport,
    MinLaplaceMethod,
    SimulationSpec,
    UnreachablePolicy,
    build_w_histograms,
    min_laplace_expectation,
    mre,
    rmae,
    simulate_y1,
    simulate_y2,
)
from .graph import Graph, complement, density, exact_all_pairs, load_edge_list, random_graph
from .graph_agg import (
    AlphaClampWarning,
    CalibrationError,
    SyntheticGraph,
    Variant,
    aggregate_and,
    aggregate_and_or,
    alpha_for,
    epsilon2_for_density,
    estimate_density,
    run_graph_agg,
    run_rnl_baseline,
)
from .mechanisms import (
    DistanceVector,
    Mechanism,
    NeighborBits,
    PrivacyParams,
    Protocol,
    RngStream,
    laplace_sample,
    noisy_degree,
    perturb_distance_vector,
    perturb_neighbor_bits,
    rr_bit,
    rr_distance,
    total_budget,
)
from .neigh_agg import aggregate_round, diameter_upper_bound, init_distance_vector, run_neigh_agg

__version__ = "0.1.0"
