"""Perturbative two-photon Kapitza-Dirac diffraction in a Gaussian standing wave."""
from .driver import SimConfig, count_iterations, run, scenario_count

__all__ = ["SimConfig", "count_iterations", "run", "scenario_count"]
