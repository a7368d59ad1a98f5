"""Widely-spaced multi-subarray (WSMS) hybrid beamforming for THz links.

Channel models, the closed-form hybrid beamformer, the array-configuration
search, a hardware power model, and a sweep/CLI layer on top.
"""
from .arrayconfig import (
    ConfigSolution,
    config_capacity,
    dlr_gradient,
    dlr_objective,
    dlr_select,
    exhaustive_search,
    full_pipeline,
    optimize_spacing,
    psi_table,
    spacing_bounds,
    weighted_dlr,
)
from .beamforming import (
    BeamformerSet,
    DegenerateChannelError,
    Violation,
    closed_form_wsms,
    evaluate_se,
    validate_constraints,
)
from .channel import (
    ChannelMatrix,
    Path,
    PathKind,
    PathSet,
    assemble_los_mimo_channel,
    assemble_planar_channel,
    assemble_wsms_channel,
    backhaul_paths,
    path_gains_backhaul,
    steering_vector,
    wsms_singular_values,
)
from .config import ConfigError, ScenarioConfig, dump_config, load_config, parse_config
from .geometry import (
    ArrayLayout,
    GeometryError,
    aperture_and_rayleigh,
    build_layout,
    critical_aperture,
    feasible_k_set,
    reference_distance_los,
    reference_distance_reflected,
    wavelength,
)
from .numerics import WaterFillResult, capacity, numerical_rank, svd, water_fill
from .power import ARCHITECTURES, PowerModel, energy_efficiency, link_power, power_consumption
from .sweep import SweepResult, run_sweep

__version__ = "0.1.0"
