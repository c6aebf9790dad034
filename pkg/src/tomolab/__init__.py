"""Tomographic probability representation of quantum and classical dynamics.

Optical and symplectic tomograms, their evolution and energy-level
equations, and an independent Wigner-function (Moyal) reference solver.
"""

__version__ = "0.1.0"

from .errors import (ContractViolation, DomainError, GridMismatchError,  # noqa: E402
                     InstabilityError, SingularRayError)
from .fields import *  # noqa: E402,F401,F403
from .states import *  # noqa: E402,F401,F403
from .potentials import *  # noqa: E402,F401,F403
from .transforms import *  # noqa: E402,F401,F403
from .dynamics import *  # noqa: E402,F401,F403
from .moyal import *  # noqa: E402,F401,F403
