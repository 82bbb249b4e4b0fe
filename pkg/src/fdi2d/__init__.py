"""Geometric fault detection and isolation for 2D Fornasini-Marchesini systems."""

from .invariants import (friend_maps, invariant_unobservable, measurement_maps,
                         min_conditioned_invariant, min_unobservability)
from .model import DetectionFilter, Fault, FmiiModel, RoesserModel, roesser_to_fmii
from .subspace import Subspace
from .synthesis import NotIsolable, design_filter, isolability, quotient_system

__version__ = "0.1.0"

__all__ = [
    "DetectionFilter", "Fault", "FmiiModel", "NotIsolable", "RoesserModel", "Subspace",
    "design_filter", "friend_maps", "invariant_unobservable", "isolability",
    "measurement_maps", "min_conditioned_invariant", "min_unobservability",
    "quotient_system", "roesser_to_fmii",
]
