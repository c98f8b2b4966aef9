"""entrex: generalized-entropy toolkit and frontier-exploration benchmark."""

__version__ = "0.1.0"

from .entropy import (
    ALL_POINTS_FIXED,
    AdmissibilityReport,
    Behavioral,
    BehavioralConditioned,
    Distribution,
    EntropySpec,
    PrelecParams,
    Renyi,
    RenyiInfinity,
    Shannon,
    WeightVector,
    behavioral_entropy,
    bernoulli_entropy,
    check_admissibility,
    condition_beta,
    entropy,
    entropy_rows,
    prelec_fixed_point,
    prelec_weight,
    prelec_weights,
    renyi_entropy,
    shannon_entropy,
)
from .explore import (
    BeamSensor,
    DiskSensor,
    ExplorerConfig,
    GoalRegion,
    GridPathPlanner,
    Pose,
    TrialLog,
    euclidean_length,
    evaluate_frontiers,
    explore,
    info_gain,
    select_frontier,
    sensor_footprint,
)
from .frontiers import FrontierConfig, FrontierList, extract_frontiers
from .grid import (
    GridPartition,
    Kernel,
    OccupancyGrid,
    convolve_binary,
    gradient_nonzero,
    partition,
    read_grid,
    write_grid,
)
from .poc import (
    MappingNoise,
    PocEnvironment,
    TrialConfig,
    TrialSeeds,
    apply_mapping,
    build_sweep_configs,
    completion_metrics,
    generate_environment,
    run_sweep,
    run_trial,
)
from .simplex import (
    ParamGrid,
    PerceptivenessEstimate,
    SensitivityEstimate,
    bernoulli_entropy_curves,
    perceptiveness,
    sample_simplex,
    sensitivity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
