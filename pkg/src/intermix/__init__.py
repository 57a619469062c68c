"""Identify the components of a mixture of perfect interventions on a causal
Bayesian network."""
from .cbn import (CausalNet, Cpt, Node, delete_last, joint_prob, make_net,
                  topological_order, validate)
from .intervene import (InterventionTuple, Target, TupleSet, check_exclusion,
                        interventional_prob, marginalize_tuples, mixture_prob)
from .solver import StructuredSystem, solve_exact, solve_scored
from .disentangle import (DisentangleReport, MixtureOracle, NetOracle, TableOracle,
                          base_case, disentangle_finite, disentangle_oracle, lift_level)
from .estimate import (FrequencyOracle, SampleSet, ancestral_sample, empirical_marginal,
                       mixture_sample, mle_cpds)

__version__ = "0.1.0"

__all__ = [
    "CausalNet", "Cpt", "Node", "delete_last", "joint_prob", "make_net", "topological_order",
    "validate", "InterventionTuple", "Target", "TupleSet", "check_exclusion",
    "interventional_prob", "marginalize_tuples", "mixture_prob", "StructuredSystem",
    "solve_exact", "solve_scored", "DisentangleReport", "MixtureOracle", "NetOracle",
    "TableOracle", "base_case", "disentangle_finite", "disentangle_oracle", "lift_level",
    "FrequencyOracle", "SampleSet", "ancestral_sample", "empirical_marginal", "mixture_sample",
    "mle_cpds",
]
