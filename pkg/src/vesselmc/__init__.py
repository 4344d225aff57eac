"""Monte Carlo simulation of nanomachine biomarker detection in microvessels."""

__version__ = "0.1.0"

from .errors import ConfigurationError
from .geometry import (
    Domain,
    RegionLabel,
    VesselKind,
    VesselSpec,
    classify_region,
    near_wall_area_fraction,
    preset,
    radial_distance,
)
from .flow import (
    FlowModel,
    LaminarAnalytic,
    LaminarDiscretized,
    Uniform,
    VelocityGrid,
    discretize,
    mean_axial_speed,
    velocity_at,
)
from .kinetics import (
    KineticParams,
    Role,
    SpeciesSpec,
    biomarker_species,
    diffusion_coefficient,
    margination_for_size,
    nanomachine_species,
    step,
    velocity_cofactor,
)
from .release import (
    InitialState,
    Points,
    Regions,
    ReleasePlan,
    default_points,
    realized_margination,
    sample_initial_positions,
)
from .engine import (
    BatchEstimate,
    DetectionEvent,
    ParticleStatus,
    TrialConfig,
    TrialOutcome,
    apply_boundaries,
    contact_distance,
    detect_pairs,
    run_batch,
    run_trial,
    run_trials,
)
from .stats import wilson_interval

__all__ = [
    "ConfigurationError",
    "Domain",
    "RegionLabel",
    "VesselKind",
    "VesselSpec",
    "classify_region",
    "near_wall_area_fraction",
    "preset",
    "radial_distance",
    "FlowModel",
    "LaminarAnalytic",
    "LaminarDiscretized",
    "Uniform",
    "VelocityGrid",
    "discretize",
    "mean_axial_speed",
    "velocity_at",
    "KineticParams",
    "Role",
    "SpeciesSpec",
    "biomarker_species",
    "diffusion_coefficient",
    "margination_for_size",
    "nanomachine_species",
    "step",
    "velocity_cofactor",
    "InitialState",
    "Points",
    "Regions",
    "ReleasePlan",
    "default_points",
    "realized_margination",
    "sample_initial_positions",
    "BatchEstimate",
    "DetectionEvent",
    "ParticleStatus",
    "TrialConfig",
    "TrialOutcome",
    "apply_boundaries",
    "contact_distance",
    "detect_pairs",
    "run_batch",
    "run_trial",
    "run_trials",
    "wilson_interval",
    "__version__",
]
