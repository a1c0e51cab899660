"""Design, simulation, and calibration toolkit for reflection-type
kinetic-inductance parametric amplifiers."""

from . import circuits, material, netcore, noise, presets, pump, search, simulator, synthesis
from .errors import KipaError

__version__ = "0.1.0"

__all__ = [
    "KipaError",
    "circuits",
    "material",
    "netcore",
    "noise",
    "presets",
    "pump",
    "search",
    "simulator",
    "synthesis",
    "__version__",
]
