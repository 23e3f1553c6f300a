"""Patterned-illumination microscopy: simulation, blind pattern estimation,
covariance reconstruction, pixel reassignment, and resolution metrics."""

from ._core import *  # noqa: F401,F403

__version__ = "0.1.0"
