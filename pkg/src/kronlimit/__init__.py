"""Kronecker limit formulas for CM fields at desk scale.

Modules: numerics (special functions), quadfields (forms, units, catalog),
lseries (Dirichlet L-data at 0), epstein (Epstein zeta continuation and Ψ),
cmtypes (exact CM-type algebra), verify (identity checkers), cli.
"""

from .numerics import PrecisionContext

__version__ = "0.1.0"

__all__ = ["PrecisionContext", "__version__"]
