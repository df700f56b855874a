"""Scaling-law fitting and analysis: power-law-plus-constant fits, compute
frontiers, forecasting and information-theoretic summaries."""

from ._scalefit import *  # noqa: F401,F403
from ._scalefit import ScalefitError, __version__  # noqa: F401
