"""Pseudospectral simulator for NLS with Ornstein-Uhlenbeck confinement."""

from ._ounls import *  # noqa: F401,F403
from ._ounls import __version__  # noqa: F401
