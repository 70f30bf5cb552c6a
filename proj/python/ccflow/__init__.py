"""Discrete conformal structures and fractional combinatorial Calabi flows."""

from ._ccflow import (
    CCFlowError,
    Mesh,
    compute_metric,
    delaunay_check,
    flip_to_delaunay,
    fractional_power,
    jacobian,
    preset_names,
    run_experiment,
    spectral_decompose,
    structure_jacobian,
)

__all__ = [
    "CCFlowError",
    "Mesh",
    "compute_metric",
    "delaunay_check",
    "flip_to_delaunay",
    "fractional_power",
    "jacobian",
    "preset_names",
    "run_experiment",
    "spectral_decompose",
    "structure_jacobian",
]
