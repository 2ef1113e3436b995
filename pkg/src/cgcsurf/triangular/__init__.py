"""Model surface over the ideal triangle: profile, development, and Monge-Ampere counterpart."""

from .bochner import BochnerProfile, EmbeddingData, bochner_shoot, fit_bounds, intrinsic_curvature
from .develop import Development, curve_speed_curvature, develop_ray, develop_surface
from .properness import axis_properness_report, divergence_integral, normal_evolution_check
from .support import (cross_validate, developed_support_samples, edge_trace, symmetry_check,
                      triangle_phi, triangular_support)

__all__ = [
    "BochnerProfile", "EmbeddingData", "bochner_shoot", "fit_bounds", "intrinsic_curvature",
    "Development", "curve_speed_curvature", "develop_ray", "develop_surface",
    "axis_properness_report", "divergence_integral", "normal_evolution_check",
    "cross_validate", "developed_support_samples", "edge_trace", "symmetry_check",
    "triangle_phi", "triangular_support",
]
