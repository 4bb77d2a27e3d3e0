"""Bell, contextuality, MUB, graph, key-distribution and metrology analyses."""
from .bell import CglmpSetting, cglmp_bases, cglmp_i3, cglmp_probabilities, cglmp_table
from .contextuality import ks_lhs, ks_projectors, no_signalling_checks
from .graphs import Graph, perfect_matchings, state_terms
from .metrology import sensitivity_scan
from .mub import correlation_coefficient, mub_bases
from .qkd import SECURITY_BOUND, qkd_error_rate

__all__ = [
    "CglmpSetting", "cglmp_bases", "cglmp_i3", "cglmp_probabilities", "cglmp_table",
    "ks_lhs", "ks_projectors", "no_signalling_checks",
    "Graph", "perfect_matchings", "state_terms",
    "sensitivity_scan", "correlation_coefficient", "mub_bases",
    "SECURITY_BOUND", "qkd_error_rate",
]
