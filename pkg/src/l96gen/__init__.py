"""Generalized Lorenz '96 systems: advection terms, spectra, bifurcations and simulation."""

from .gmap import G0, G1, G2, G3, G4, G5, G6, G7, G8, GMap, basis, parse, tilde
from .dynamics import SystemSpec, Trajectory, integrate_adaptive, integrate_rk4
from .spectral import LaurentPoly, laurent_of, eigenvalues
from .bifurcation import first_hopf, second_hopf, first_lyapunov, hopf_hopf

__version__ = "0.1.0"

__all__ = [
    "G0", "G1", "G2", "G3", "G4", "G5", "G6", "G7", "G8",
    "GMap", "basis", "parse", "tilde",
    "SystemSpec", "Trajectory", "integrate_adaptive", "integrate_rk4",
    "LaurentPoly", "laurent_of", "eigenvalues",
    "first_hopf", "second_hopf", "first_lyapunov", "hopf_hopf",
]
