"""Rehearsal-based continual linear regression: closed forms and Monte Carlo."""

from ._clsim import *  # noqa: F401,F403
from ._clsim import __doc__  # noqa: F401

__version__ = "1.0.0"
