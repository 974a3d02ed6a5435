"""Contextual and single-space probability for EPRB experiments.

Data tables with counterfactual gaps, lower/upper probabilities from
multi-valued maps, context-conditioned statistics, CHSH under both
semantics, and a classical local hidden-variable model that reproduces
the singlet correlations.
"""
from .chsh import CorrelationQuad, Semantics, chsh_all_variants, chsh_f, chsh_max
from .circle import Density, EventRegion, canonical_angle
from .dempster_shafer import (
    ContextStats,
    ProbabilityInterval,
    context_stats_joint,
    context_stats_single,
    dont_know,
    gamma_joint,
    gamma_single,
    lower_upper_joint,
    lower_upper_single,
)
from .hv import (
    JointDistribution16,
    averages,
    bell_locality_check,
    chsh_theorem_check,
    conditional_density,
    marginal,
    ontic_conditional,
    polytope_membership,
    total_probability_check,
)
from .local_model import (
    DeviceSetting,
    ModelConfig,
    correlation,
    domain_arcs,
    joint_density,
    joint_prob,
    observable,
    quantum_oracle,
    single_prob,
)
from .simulate import Schedule, SimConfig, analyze, sample_lambda, scan, simulate
from .table import (
    Outcome,
    Setting,
    Table,
    TableKind,
    ValidationError,
    build_table,
    complete,
    completions_count,
    frequency,
    joint_frequency,
    read_csv,
    table_average,
    table_correlation,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CorrelationQuad",
    "Semantics",
    "chsh_all_variants",
    "chsh_f",
    "chsh_max",
    "Density",
    "EventRegion",
    "canonical_angle",
    "ContextStats",
    "ProbabilityInterval",
    "context_stats_joint",
    "context_stats_single",
    "dont_know",
    "gamma_joint",
    "gamma_single",
    "lower_upper_joint",
    "lower_upper_single",
    "JointDistribution16",
    "averages",
    "bell_locality_check",
    "chsh_theorem_check",
    "conditional_density",
    "marginal",
    "ontic_conditional",
    "polytope_membership",
    "total_probability_check",
    "DeviceSetting",
    "ModelConfig",
    "correlation",
    "domain_arcs",
    "joint_density",
    "joint_prob",
    "observable",
    "quantum_oracle",
    "single_prob",
    "Schedule",
    "SimConfig",
    "analyze",
    "sample_lambda",
    "scan",
    "simulate",
    "Outcome",
    "Setting",
    "Table",
    "TableKind",
    "ValidationError",
    "build_table",
    "complete",
    "completions_count",
    "frequency",
    "joint_frequency",
    "read_csv",
    "table_average",
    "table_correlation",
    "write_csv",
]
