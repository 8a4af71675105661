"""Bergman orthogonal polynomials on analytic Jordan domains."""

from .curves import Cassini, Disk, Ellipse, Joukowsky, JordanDomain, make_domain
from .errors import BergmanError
from .gram import OrthoBasis, build_basis, compute_moments, eval_poly, orthonormality_residual
from .precision import PrecisionConfig

__version__ = "0.1.0"
