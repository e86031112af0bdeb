"""Random-current, FK, and spin Monte Carlo toolkit for finite-volume
ferromagnetic Ising systems.

The package is organized around plain integer-indexed host graphs
(`graph`), sparse integer currents and their combinatorics (`currents`),
truncated exact enumeration and identity verifiers (`exact`), Monte Carlo
samplers (`mc`), scan drivers with CSV output (`analysis`), and a command
line front end (`cli`).
"""
from __future__ import annotations

__version__ = "0.1.0"

from .graph import (
    CouplingField,
    FiniteGraph,
    GhostGraph,
    System,
    build_box,
    build_long_range_chain,
    build_tree_ball,
    free_system,
    ghost_augment,
    ghost_system,
    nearest_neighbor_coupling,
    validate_conditions,
)

__all__ = [
    "CouplingField",
    "FiniteGraph",
    "GhostGraph",
    "System",
    "build_box",
    "build_long_range_chain",
    "build_tree_ball",
    "free_system",
    "ghost_augment",
    "ghost_system",
    "nearest_neighbor_coupling",
    "validate_conditions",
    "__version__",
]
