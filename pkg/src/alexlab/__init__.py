"""Quantitative Alexandrov stability experiments in hyperbolic space."""
from .hyperbolic import (
    Hyperplane,
    Isometry,
    dist,
    exp_map,
    log_map,
    normalize_to_standard,
    parallel_transport,
)
from .moving_planes import critical_value, plane_family
from .stability import analyze, run_sweep
from .surfaces import PerturbedSphereSpec, make_profile, mean_curvature, osc_H, perturbed_sphere, sphere

__version__ = "0.1.0"
