"""Pseudo-spectral solver and estimate checks for the generalized Leray-alpha equation."""

from importlib.metadata import PackageNotFoundError, version

from .fields import SpectralVectorField
from .grid import TorusGrid
from .symbols import SymbolSpec, registered_g

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0+unknown"

__all__ = ["SpectralVectorField", "SymbolSpec", "TorusGrid", "registered_g", "__version__"]
