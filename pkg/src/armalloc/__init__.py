"""Operating characteristics, sample sizes and allocation ratios for multi-arm
trials sharing one control arm, in one-stage and two-stage select-then-test
form, with a Monte Carlo simulator for cross-checking every analytic value."""

from .errors import (
    ArmAllocError,
    BracketError,
    ConvergenceError,
    InfeasibleDesignError,
    InvalidIntegrandError,
    InvalidParameterError,
)
from .optimizer import (
    OptimalRatioReport,
    RatioGrid,
    Scenario,
    SweepRow,
    SweepTable,
    find_r_max,
    find_r_op,
    per_arm_reduction_report,
    solve,
    sweep,
)
from .params import OperatingTargets, TrialParams
from .simulate import (
    MeanVector,
    SimEstimate,
    lfc_config,
    null_config,
    simulate_power_single,
    simulate_two_stage,
    simulate_type1_single,
)
from .single_stage import (
    DesignPoint,
    dunnett_heuristic_ratio,
    power_single,
    solve_critical_value_single,
    solve_sample_size_single,
    type1_error_single,
)
from .stats import BisectionSpec, QuadratureSpec
from .two_stage import TwoStageDesignPoint, power_two_stage, solve_two_stage, type1_error_two_stage

__version__ = "0.1.0"
