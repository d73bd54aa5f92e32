"""Sparse admissible prime sets for ternary sums, checked by counting and by the circle method."""

from .residue_system import AdmissibleSystem, ConstructionParams, build_system, system_for_basis

__all__ = ["AdmissibleSystem", "ConstructionParams", "build_system", "system_for_basis"]
__version__ = "0.1.0"
