"""Joint-sparse transmit beamformer design for dual-function radar-communications.

Designs beamformers that shape a radar beampattern (mainlobe floor, sidelobe
ceiling), serve downlink users at target SINRs, and respect per-antenna power
limits, while driving all users onto a common K-antenna support through an
l2,1 regularizer.  The nonconvex quadratically constrained program is solved
by consensus ADMM with closed-form primal updates and per-constraint
nearest-point projections.
"""

from .admm import (
    AdmmConfig,
    AdmmState,
    IterationRecord,
    WeakPenaltyWarning,
    check_penalty_ratio,
    cyclic_projection,
    find_feasible_point,
    initialize,
    restore_feasibility,
    solve,
    update_u,
    update_v,
    update_w,
)
from .arrays import (
    AngleGrids,
    ArrayGeometry,
    UserChannel,
    build_grids,
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    los_channel,
    rayleigh_channel,
    steering_vector,
)
from .errors import ConfigurationError, InfeasibleProblemError, ProjectionError
from .metrics import (
    DesignReport,
    FeasibilityReport,
    antenna_power,
    beampattern,
    design_report,
    feasibility_report,
    msrr,
    responses,
    sinr_per_user,
    tx_power,
)
from .problem import (
    AntennaPowerConstraint,
    BeamformerStack,
    PassbandConstraint,
    ProblemInstance,
    QuadraticConstraint,
    SinrConstraint,
    StopbandConstraint,
    assemble,
    build_passband_constraint,
    build_power_constraint,
    build_sinr_constraint,
    build_stopband_constraint,
    group_norms,
    objective,
    user_blocks,
)
from .projections import (
    ProjectionResult,
    penalty_oracle,
    project,
    project_antenna_power,
    project_generic,
    project_passband,
    project_sinr,
    project_stopband,
)
from .scenario import (
    Scenario,
    bundled_scenario_path,
    load_scenario,
    scenario_sha256,
    scenario_to_dict,
    write_scenario,
)
from .selection import (
    BaselineResult,
    random_selection_baseline,
    rank_groups,
    refit,
    select_support,
)
from .shrinkage import group_shrink, prox_oracle

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig", "AdmmState", "AngleGrids", "AntennaPowerConstraint",
    "ArrayGeometry", "BaselineResult", "BeamformerStack", "ConfigurationError",
    "DesignReport", "FeasibilityReport", "InfeasibleProblemError",
    "IterationRecord", "PassbandConstraint", "ProblemInstance",
    "ProjectionError", "ProjectionResult", "QuadraticConstraint", "Scenario",
    "SinrConstraint", "StopbandConstraint", "UserChannel", "WeakPenaltyWarning",
    "antenna_power", "assemble", "beampattern", "build_grids",
    "build_passband_constraint", "build_power_constraint",
    "build_sinr_constraint", "build_stopband_constraint",
    "bundled_scenario_path", "check_penalty_ratio", "cyclic_projection",
    "db_to_linear", "dbm_to_watts", "design_report", "feasibility_report",
    "find_feasible_point", "group_norms", "group_shrink", "initialize",
    "linear_to_db", "load_scenario", "los_channel", "msrr", "objective",
    "penalty_oracle", "project", "project_antenna_power", "project_generic",
    "project_passband", "project_sinr", "project_stopband", "prox_oracle",
    "random_selection_baseline", "rank_groups", "rayleigh_channel", "refit",
    "restore_feasibility",
    "responses", "scenario_sha256", "scenario_to_dict", "select_support",
    "sinr_per_user", "solve", "steering_vector", "tx_power", "update_u",
    "update_v", "update_w", "user_blocks", "write_scenario",
]
