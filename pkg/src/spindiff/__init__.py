"""Spin-diffusion mode toolkit for buffered alkali-metal vapor cells.

Solves the diffusion (Helmholtz) eigenvalue problem with Robin walls for a
spherical cell and Dirichlet walls for a rectangular wafer cell, models
Gaussian pump/probe overlap with the modes, integrates the coupled two-mode
non-Hermitian dynamics driven by a pump-induced inhomogeneity, and
synthesizes/fits lock-in magnetic-resonance spectra.
"""

from spindiff.eigenmodes import (
    BoxSpec,
    CellSpec,
    Mode,
    ModeIndex,
    mode_value,
    overlap_integral,
    robin_wall_factor,
    solve_box_modes,
    solve_sphere_roots,
    spherical_j,
    spherical_j_derivative,
)
from spindiff.gas import GasSpec, RateTable
from spindiff.optics import BeamSpec, SlitSpec
from spindiff.dynamics import CoupledSystem, ModeAmplitudes, SweepPoint
from spindiff.signals import LorentzianComponent, Spectrum

__all__ = [
    "BoxSpec",
    "CellSpec",
    "Mode",
    "ModeIndex",
    "GasSpec",
    "RateTable",
    "BeamSpec",
    "SlitSpec",
    "CoupledSystem",
    "ModeAmplitudes",
    "SweepPoint",
    "LorentzianComponent",
    "Spectrum",
    "mode_value",
    "overlap_integral",
    "robin_wall_factor",
    "solve_box_modes",
    "solve_sphere_roots",
    "spherical_j",
    "spherical_j_derivative",
]

__version__ = "0.1.0"
