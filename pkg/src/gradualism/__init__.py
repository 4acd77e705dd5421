"""Belief-learning simulator for stake schedules in weakest-link coordination games."""

from .beliefs import (
    BeliefCurve,
    InitialBeliefParams,
    KernelForm,
    UpdateParams,
    decide,
    evaluate,
    kernel_eval,
    sample_initial,
    update_after_observed_failure,
    update_after_own_abstention,
    update_after_success,
)
from .engine import (
    AgentState,
    AgentSummary,
    GroupRecord,
    PeriodRecord,
    SessionConfig,
    SessionRecord,
    TreatmentSpec,
    play_period,
    reshuffle,
    run_session,
    run_stage,
)
from .game import (
    Action,
    GameParams,
    contribution_premium,
    mixed_ne_probability,
    pure_equilibria,
    stage_payoff,
)
from .mechanisms import (
    DominanceReport,
    PathSynthesis,
    coupled_compare,
    synthesize_guaranteed_path,
)
from .schedules import StakeSchedule, make_schedule
from .stats import (
    CalibrationTarget,
    ElicitationReport,
    RunSummary,
    SummaryAccumulator,
    calibrate_beliefs,
    elicitation_regressions,
    mann_whitney_u,
    ols,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AgentState",
    "AgentSummary",
    "BeliefCurve",
    "CalibrationTarget",
    "DominanceReport",
    "ElicitationReport",
    "GameParams",
    "GroupRecord",
    "InitialBeliefParams",
    "KernelForm",
    "PathSynthesis",
    "PeriodRecord",
    "RunSummary",
    "SessionConfig",
    "SessionRecord",
    "StakeSchedule",
    "SummaryAccumulator",
    "TreatmentSpec",
    "UpdateParams",
    "calibrate_beliefs",
    "contribution_premium",
    "coupled_compare",
    "decide",
    "elicitation_regressions",
    "evaluate",
    "kernel_eval",
    "make_schedule",
    "mann_whitney_u",
    "mixed_ne_probability",
    "ols",
    "play_period",
    "pure_equilibria",
    "reshuffle",
    "run_session",
    "run_stage",
    "sample_initial",
    "stage_payoff",
    "summarize",
    "synthesize_guaranteed_path",
    "update_after_observed_failure",
    "update_after_own_abstention",
    "update_after_success",
]
