"""A small ASP grounder that decomposes rules when the estimated grounding cost drops."""

from .cost import PredicateStats, estimate_decomposition, estimate_rule
from .decomposer import FreshNamer, RuleDecomposition, grounding_order, restore_safety, to_rules
from .errors import (
    ASPError,
    BudgetExceeded,
    DecompositionDegenerate,
    EvaluationError,
    GroundingTimeout,
    InternalError,
    MissingStats,
    ParseError,
    SafetyError,
    UnsupportedFeature,
)
from .grounder import GroundConfig, GroundProgram, GroundRule, build_module_plan, ground_program
from .hypergraph import TDConfig, generate_tree_decompositions, to_hypergraph, validate_td
from .oracle import brute_force_answer_sets, naive_ground, project
from .parser import parse_program, parse_rule, render_program
from .smart import SDConfig, rewrite_program, smart_decompose
from .syntax import Program, Rule, safety_check

__version__ = "0.1.0"

__all__ = [
    "PredicateStats",
    "estimate_decomposition",
    "estimate_rule",
    "FreshNamer",
    "RuleDecomposition",
    "grounding_order",
    "restore_safety",
    "to_rules",
    "ASPError",
    "BudgetExceeded",
    "DecompositionDegenerate",
    "EvaluationError",
    "GroundingTimeout",
    "InternalError",
    "MissingStats",
    "ParseError",
    "SafetyError",
    "UnsupportedFeature",
    "GroundConfig",
    "GroundProgram",
    "GroundRule",
    "build_module_plan",
    "ground_program",
    "TDConfig",
    "generate_tree_decompositions",
    "to_hypergraph",
    "validate_td",
    "brute_force_answer_sets",
    "naive_ground",
    "project",
    "parse_program",
    "parse_rule",
    "render_program",
    "SDConfig",
    "rewrite_program",
    "smart_decompose",
    "Program",
    "Rule",
    "safety_check",
]
