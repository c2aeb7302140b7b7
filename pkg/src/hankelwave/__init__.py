"""Hankel transform, Hankel translation and convolution, continuous Bessel
wavelet transform and Besov-Hankel seminorms on weighted half-line grids."""

from __future__ import annotations

from .besov import (
    BesovParams,
    BesovReport,
    besov_report,
    converse_bound_check,
    direct_bound_check,
    equivalence_report,
    modulus,
    seminorm_via_modulus,
    seminorm_via_wavelet,
    smoothness_exponent,
)
from .convolution import convolve, spectral_convolve, translate, translate_spectral, translation_operator
from .errors import (
    AdmissibilityError,
    CalibrationError,
    CapabilityError,
    HankelWaveError,
    ParameterError,
    ResolutionError,
    ShapeError,
    StateError,
)
from .hankel import HankelPlan, forward, inverse, parseval_residual, plan
from .kernels import DKernelCalibration, calibrate_d_constant, d_kernel, kernel_j, kernel_j_derivative, triangle_area
from .measure import MeasureParams, RadialGrid, SampledFunction, build_grid, default_grid, inner_product, lp_norm
from .testfunctions import generate_test_function
from .wavelet import (
    Scalogram,
    Wavelet,
    admissibility_constant,
    cwt,
    cwt_invert,
    cwt_parseval,
    daughter,
    geometric_scales,
    make_wavelet,
    sp_norm,
)

__version__ = "0.1.0"
