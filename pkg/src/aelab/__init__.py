"""Undercomplete autoencoders with random-target training regimes and
latent-space analysis tools."""

from .ndcore import NUMBA_ENABLED

__version__ = "0.1.0"
__all__ = ["NUMBA_ENABLED", "__version__"]
