"""Numerical verification of a quadratic-polynomial variance computation for
Hecke eigenvalues: Kloosterman and quadratic-twisted sums, oscillatory
integral identities, level-one eigenforms with the trace formula, and the
two-route variance experiment.
"""

__version__ = "0.1.0"

from .kernels import BACKEND, set_threads  # noqa: E402
from .arithmetic import *  # noqa: E402,F401,F403
from .windows import *  # noqa: E402,F401,F403
from .kloosterman import *  # noqa: E402,F401,F403
from .oscillatory import *  # noqa: E402,F401,F403
from .eigenforms import *  # noqa: E402,F401,F403
from .variance import *  # noqa: E402,F401,F403
