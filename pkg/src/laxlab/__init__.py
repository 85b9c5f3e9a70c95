"""Verification laboratory for the theta-deformed Dirac/sinh-Gordon system."""

from .fields import FieldState, GridSpec, ModelParams

__version__ = "0.1.0"

__all__ = ["FieldState", "GridSpec", "ModelParams", "__version__"]
