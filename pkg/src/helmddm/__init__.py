"""2D Helmholtz transmission scattering workbench.

High-order Nystrom boundary integral operators on corner-graded meshes,
quasi-optimal transmission operators, Robin-to-Robin maps, non-overlapping
domain-decomposition solvers, a second-kind combined-field reference
solver, and a benchmark harness.
"""

__version__ = "0.1.0"

from . import geometry, fourier, linalg, nystrom, transmission, rtr
from . import scattering, ddm, ddm_multi, cfiesk

__all__ = ["geometry", "fourier", "linalg", "nystrom", "transmission", "rtr",
           "scattering", "ddm", "ddm_multi", "cfiesk", "__version__"]
