"""Zero-energy (parabolic) trajectories of homogeneous potentials V(x) = U(x/|x|)/|x|^alpha.

Modules: ``potential`` (potentials and admissibility checks), ``action``
(discrete paths and action functionals), ``bolza`` (obstacle-constrained
free-time minimisation), ``morse`` (level functions, jumps, In/Out
classification), ``planar`` (reduced phase-plane system) and ``cli``.
"""
from .errors import ParabolicError
from .potential import HomogeneousPotential, load_potential
from .action import DiscretePath
from .bolza import BolzaProblem, BolzaSolution, minimize_bolza
from .morse import classify, find_alpha_bar
from .planar import PlanarPotential, PhasePoint, saddle_connection_bisect

__all__ = [
    "ParabolicError",
    "HomogeneousPotential",
    "load_potential",
    "DiscretePath",
    "BolzaProblem",
    "BolzaSolution",
    "minimize_bolza",
    "classify",
    "find_alpha_bar",
    "PlanarPotential",
    "PhasePoint",
    "saddle_connection_bisect",
]

__version__ = "0.1.0"
