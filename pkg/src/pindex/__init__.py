"""Index theory for linear Hamiltonian systems with a P-boundary condition.

Ekeland and Maslov P-indices of positive definite coefficient paths,
splitting numbers, and P-symmetric closed characteristics on ellipsoids.
"""

from .ekeland import index_by_crossings, index_by_galerkin
from .maslov import i_P_omega, splitting_limit, splitting_table, theorem36_check
from .paths import CoefficientPath, integrate_fundamental
from .symplectic import NormalForm, build_symmetry, diamond, rotation

__version__ = "0.1.0"

__all__ = ["CoefficientPath", "NormalForm", "build_symmetry", "diamond", "i_P_omega",
           "index_by_crossings", "index_by_galerkin", "integrate_fundamental", "rotation",
           "splitting_limit", "splitting_table", "theorem36_check", "__version__"]
