"""Univalence criteria for harmonic maps lifted to minimal surfaces."""
from .errors import SchwarzliftError
from .harmonic import HarmonicMap, conformal_factor, gauss_curvature, harmonic_schwarzian
from .jets import AnalyticFn, DiskMobius, Jet3, Z, classical_schwarzian
from .lift import SpaceMobius, lift_mesh, lift_points, lift_segment
from .metric import RadialMetric
from .nehari import CATALOGUE, get_nehari, solve_extremal
from .parser import parse_expression
from .verify import check_criterion, make_example, univalence_scan

__all__ = [
    "SchwarzliftError", "HarmonicMap", "conformal_factor", "gauss_curvature",
    "harmonic_schwarzian", "AnalyticFn", "DiskMobius", "Jet3", "Z", "classical_schwarzian",
    "SpaceMobius", "lift_mesh", "lift_points", "lift_segment", "RadialMetric", "CATALOGUE",
    "get_nehari", "solve_extremal", "parse_expression", "check_criterion", "make_example",
    "univalence_scan",
]
