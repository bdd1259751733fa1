"""Finite groups: models, Fourier calculus and deformed convolution."""
from .groups import *  # noqa: F401,F403
from .harmonic import *  # noqa: F401,F403
