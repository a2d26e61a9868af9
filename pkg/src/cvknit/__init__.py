"""Quasiprobability decompositions of continuous-variable states.

Modules:
    fock          truncated Fock-space kets and operators
    gaussian      Gaussian overlaps and covariance algebra
    states        immutable state specs and their JSON codec
    qpd           decomposition builders with reconstruction
    montecarlo    signed-weight estimators and shot planning
    applications  end-to-end application pipelines
    cli           command-line front end
"""

from .errors import (CvknitError, DegeneracyError, InputError, ResourceError, ToleranceError,
                     TruncationError)
from .qpd import (C2Grid, Qpd, build_bell_cat, build_c2, build_fock_k, build_g2, build_gkp,
                  build_single_photon_eps, reconstruct, validate)

__version__ = "0.1.0"

__all__ = [
    "CvknitError", "DegeneracyError", "InputError", "ResourceError", "ToleranceError",
    "TruncationError", "C2Grid", "Qpd", "build_bell_cat", "build_c2", "build_fock_k",
    "build_g2", "build_gkp", "build_single_photon_eps", "reconstruct", "validate",
]
