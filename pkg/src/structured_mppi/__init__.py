"""MPPI with interchangeable control-trajectory sampling strategies."""

from .bench import (
    CellSummary,
    ExperimentConfig,
    TrialRecord,
    aggregate,
    run_experiment,
    run_trial,
    write_csv,
)
from .dynamics import (
    CostWeights,
    EnvState,
    Environment,
    TaskSpec,
    Terrain,
    build_env,
    running_cost,
    step_dynamics,
    terminal_cost,
)
from .mppi import (
    CostBreakdown,
    MppiConfig,
    MppiController,
    NoViableRollout,
    control_step,
    importance_weights,
    trajectory_cost,
    update_nominal,
)
from .samplers import (
    CountingGenerator,
    KnotSet,
    NoiseSpec,
    SampleBatch,
    SamplerConfig,
    bernstein_basis,
    cubic_spline_eval,
    generate_batch,
    perturb_knots,
    reconstruct_bezier,
    reconstruct_cubic_spline,
    reconstruct_linear,
    sample_iid,
    uniform_indices,
)
from .trajectory import (
    ActionBounds,
    SmoothnessReport,
    clip_trajectory,
    shift_horizon,
    smoothness_report,
)

__version__ = "0.1.0"
