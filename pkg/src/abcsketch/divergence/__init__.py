"""Rényi divergences on spheres and on finite sets."""
from .densities import CapUniform, DiscreteTable, VonMisesFisher, density_eval
from .discrete import (SuiteReport, classical_inequality_suite, coarsen,
                       conditional_divergence_suite, conditional_divergences,
                       discrete_renyi, random_bipartite_pair, random_distribution,
                       random_partition, total_variation)
from .sphere import (INF_PROXY_ALPHA, DegenerateSampleError, DivergenceEstimate,
                     EquatorTrial, TailReport, equator_tail_experiment, equator_trial,
                     exact_divergence, renyi_mc)

__all__ = [
    "CapUniform", "DiscreteTable", "VonMisesFisher", "density_eval",
    "SuiteReport", "classical_inequality_suite", "coarsen",
    "conditional_divergence_suite", "conditional_divergences", "discrete_renyi",
    "random_bipartite_pair", "random_distribution", "random_partition", "total_variation",
    "INF_PROXY_ALPHA", "DegenerateSampleError", "DivergenceEstimate", "EquatorTrial",
    "TailReport", "equator_tail_experiment", "equator_trial", "exact_divergence", "renyi_mc",
]
