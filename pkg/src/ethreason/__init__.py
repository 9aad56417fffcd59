"""Probabilistic ethical decision engine."""

from .model import (
    ActionDef,
    Dictum,
    InvalidScenarioError,
    Prescript,
    ScenarioError,
    ScenarioModel,
    ValidationReport,
    Violation,
    joint_probability,
    validate_scenario,
)
from .decision import (
    DecisionReport,
    action_distribution,
    decide,
    expected_utility,
    sample_action,
    weighted_expected_utility,
)
from .profiles import (
    EthicalProfileMatrix,
    ProfileCollection,
    apply_profile,
    build_matrix,
    cluster_collection,
    matrix_distance,
    normalize_matrix,
    retrieve_profile,
)
from .verifier import (
    PerturbationSpec,
    VerifierReport,
    check_alignment,
    check_consistency,
    check_optimality,
    check_robustness,
)
from .learning import ConvergenceReport, PolicyState, policy_distance, run_learning
from .scenario_io import bundled_scenarios, load_scenario, parse_scenario, serialize_scenario

__version__ = "0.1.0"

__all__ = [
    "ActionDef",
    "Dictum",
    "InvalidScenarioError",
    "Prescript",
    "ScenarioError",
    "ScenarioModel",
    "ValidationReport",
    "Violation",
    "joint_probability",
    "validate_scenario",
    "DecisionReport",
    "action_distribution",
    "decide",
    "expected_utility",
    "sample_action",
    "weighted_expected_utility",
    "EthicalProfileMatrix",
    "ProfileCollection",
    "apply_profile",
    "build_matrix",
    "cluster_collection",
    "matrix_distance",
    "normalize_matrix",
    "retrieve_profile",
    "PerturbationSpec",
    "VerifierReport",
    "check_alignment",
    "check_consistency",
    "check_optimality",
    "check_robustness",
    "ConvergenceReport",
    "PolicyState",
    "policy_distance",
    "run_learning",
    "bundled_scenarios",
    "load_scenario",
    "parse_scenario",
    "serialize_scenario",
]
