"""Simulator and analytical toolkit for random wedge-relay geometric
routing in planar Poisson networks."""

from .bounds import (
    BoundReport,
    HopBounds,
    asymptotic_hop_ratio,
    empty_wedge_prob_exact,
    empty_wedge_prob_upper,
    expected_g,
    expected_x_prime,
    hop_bounds,
    mean_sd_distance,
    prop1_bounds,
    sigma_edge,
    sigma_interior,
    sigma_total,
    step_cdf,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    run_connectivity,
    run_eta_sweep,
    run_hopcount,
    run_prop1,
    run_stepdist,
    run_uwedge,
    substream,
)
from .geometry import (
    LocalStep,
    Point2D,
    Wedge,
    lens_area,
    sample_uniform_wedge,
    wedge_contains,
    wedge_overlap_area,
)
from .network import (
    NetworkParams,
    NodeSet,
    RegionSpec,
    classify_nodes,
    generate_ppp,
    load_nodes_csv,
    neighbors_in_wedge,
    save_nodes_csv,
)
from .routing import RouteOutcome, route_between_points, route_packet, select_relay
from .walk import (
    StoppingTimeSample,
    WalkState,
    batch_stopping_times,
    simulate_stopping_time,
    step_markov,
    walk_trace,
)

__version__ = "0.1.0"
