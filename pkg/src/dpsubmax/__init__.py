"""Differentially private online monotone submodular maximization.

Online learners that pick sets of at most k items per round (or points in a
box, for the continuous relaxation) against a stream of bounded monotone
submodular payoff functions, with differential privacy over the stream.
Includes full-information and bandit-feedback learners built on
multiplicative weights, offline baselines and regret accounting, a
continuous DR-submodular cascade, and an empirical privacy auditor.
"""

from .functions import (
    CappedModularFunction,
    CoverageFunction,
    GroundSet,
    check_monotone,
    check_submodular,
    check_unit_range,
    default_ground,
    marginal_vector,
    oracle_from_json,
    oracle_to_json,
)
from .streams import (
    FunctionStream,
    StreamSpec,
    differing_rounds,
    generate_stream,
    load_spec,
    load_stream,
    neighboring_stream,
    save_spec,
    save_stream,
)
from .hedge import (
    ExpertState,
    HedgeHistory,
    calibrate_eta_bandit,
    calibrate_eta_full_info,
    hedge_init,
    hedge_sample,
    hedge_update,
    regret_certificate,
    run_hedge,
)
from .trace import RunRngs, Trace, spawn_run_rngs
from .full_info import (
    CascadeState,
    FullInfoMaximizer,
    expert_history,
    fi_round,
    replay_gains,
    run_full_info,
)
from .bandit import (
    VARIANTS,
    BanditConfig,
    BanditMaximizer,
    BanditState,
    bandit_round,
    calibrate_gamma,
    explore_count_tail,
    explore_flags,
    replay_bandit_gains,
    run_bandit,
)
from .offline import (
    ONE_MINUS_INV_E,
    RegretReport,
    brute_force_opt,
    cascade_regret_decomposition,
    expert_realized_regrets,
    greedy_opt,
    regret_report,
)
from .continuous import (
    BoxDomain,
    ConcaveQuadratic,
    DRMaximizer,
    DRState,
    DRTrace,
    FollowTheLeader,
    MultilinearCoverage,
    PrivateFollowTheLeader,
    calibrate_K,
    check_dr,
    decomposition_check,
    dr_round,
    dr_stream_from_coverage,
    eval_dr,
    grad_dr,
    grid_max,
    run_dr,
)
from .audit import (
    AuditConfig,
    AuditReport,
    audit_bandit_delta,
    bandit_mechanism,
    distinguishing_pair,
    estimate_epsilon,
    full_info_mechanism,
)
from .cli import ConfigError, loglog_slope, main, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AuditConfig",
    "AuditReport",
    "BanditConfig",
    "BanditMaximizer",
    "BanditState",
    "BoxDomain",
    "CappedModularFunction",
    "CascadeState",
    "ConcaveQuadratic",
    "ConfigError",
    "CoverageFunction",
    "DRMaximizer",
    "DRState",
    "DRTrace",
    "ExpertState",
    "FollowTheLeader",
    "FullInfoMaximizer",
    "FunctionStream",
    "GroundSet",
    "HedgeHistory",
    "MultilinearCoverage",
    "ONE_MINUS_INV_E",
    "PrivateFollowTheLeader",
    "RegretReport",
    "RunRngs",
    "StreamSpec",
    "Trace",
    "VARIANTS",
    "audit_bandit_delta",
    "bandit_mechanism",
    "bandit_round",
    "brute_force_opt",
    "calibrate_K",
    "calibrate_eta_bandit",
    "calibrate_eta_full_info",
    "calibrate_gamma",
    "cascade_regret_decomposition",
    "check_dr",
    "check_monotone",
    "check_submodular",
    "check_unit_range",
    "decomposition_check",
    "default_ground",
    "differing_rounds",
    "distinguishing_pair",
    "dr_round",
    "dr_stream_from_coverage",
    "estimate_epsilon",
    "eval_dr",
    "expert_history",
    "expert_realized_regrets",
    "explore_count_tail",
    "explore_flags",
    "fi_round",
    "full_info_mechanism",
    "generate_stream",
    "grad_dr",
    "greedy_opt",
    "grid_max",
    "hedge_init",
    "hedge_sample",
    "hedge_update",
    "load_spec",
    "load_stream",
    "loglog_slope",
    "main",
    "marginal_vector",
    "neighboring_stream",
    "oracle_from_json",
    "oracle_to_json",
    "regret_certificate",
    "regret_report",
    "replay_bandit_gains",
    "replay_gains",
    "run_bandit",
    "run_dr",
    "run_experiment",
    "run_full_info",
    "run_hedge",
    "save_spec",
    "save_stream",
    "spawn_run_rngs",
    "__version__",
]
