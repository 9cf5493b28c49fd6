"""Lattice and continuum simulation of Brownian motion with inert drift."""
from .clocks import geometric_exponential_sum, invert_integrated_intensity, sample_poisson_events
from .continuum import (
    BmidOutput,
    KnightOutput,
    ModelParams,
    WhiteMapOutput,
    bmid_from_path,
    bmid_functionals,
    knight_system,
    refine_and_compare,
    white_map,
)
from .lattice import (
    CouplingBundle,
    EventCapExceeded,
    JumpTrajectory,
    LatticeParams,
    LinearTrajectory,
    SystemState,
    build_coupling,
    simulate_szu,
    simulate_xn_direct,
)
from .paths import GridPath, RngStream, TimeGrid, running_signed_min, sample_brownian, skorohod_map
from .stats import EmpiricalSample, KSResult, ecdf, ks_one_sample, ks_two_sample, mean_with_ci, wasserstein1

__version__ = "0.1.0"
