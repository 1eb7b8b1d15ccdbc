"""Error-decomposed, class-conditional detection fusion.

Python surface of the C++ core: evaluation, error decomposition, fusion
operators, routing policy, calibration, statistics, and seeded synthetic
scenarios.
"""

from edccf._edccf import *  # noqa: F401,F403
from edccf._edccf import __version__  # noqa: F401
