"""Dirichlet polyharmonic eigenvalues on balls, intervals and boxes."""

__version__ = "0.1.0"

from .ball_secular import ProblemSpec, ScanConfig, SpectrumEntry, assemble_spectrum  # noqa: E402,F401
from .bounds import LogValue  # noqa: E402,F401
