"""Exception hierarchy shared by every module."""

from __future__ import annotations


class HankelWaveError(Exception):
    """Base class for all library errors."""


class ParameterError(HankelWaveError, ValueError):
    """An argument is outside its documented domain."""


class ShapeError(HankelWaveError, ValueError):
    """Two sampled objects live on incompatible grids."""


class ResolutionError(HankelWaveError):
    """The discretization cannot resolve the requested computation."""


class CalibrationError(HankelWaveError):
    """The triangle kernel failed its normalization probes."""

    def __init__(self, message: str, residuals: dict | None = None):
        super().__init__(message)
        self.residuals = residuals or {}


class StateError(HankelWaveError):
    """An object was used before it was ready."""


class AdmissibilityError(HankelWaveError):
    """The admissibility integral of a wavelet is zero or divergent."""


class CapabilityError(HankelWaveError):
    """A requested path needs data the caller did not supply."""
