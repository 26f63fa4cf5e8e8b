"""Hilbert scales of Fourier coefficients, scale-derivative checks and the free Schrodinger flow."""

from .scales import BandVector, WeightSequence, level_norm, omega
from .multipliers import MultiplierOperator
from .schrodinger import SchrodingerSystem

__all__ = ["BandVector", "WeightSequence", "level_norm", "omega", "MultiplierOperator", "SchrodingerSystem"]
__version__ = "0.1.0"
