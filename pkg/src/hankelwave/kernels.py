"""Normalized Bessel kernel and the three-point translation kernel D(x, y, z).

D is supported where x, y, z are the sides of a triangle and equals

    D(x, y, z) = K * (x*y*z)**(-2*mu) * area(x, y, z)**(2*mu - 1).

In the variable u = z**2 the support is [(x-y)**2, (x+y)**2] and the area
factor becomes a symmetric Jacobi weight, so integrals against D dsigma(z)
are done with Gauss-Jacobi nodes in u. K is fixed numerically by requiring
unit mass at (x, y) = (1, 1) and then checked at the other probe pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .errors import CalibrationError, ParameterError, StateError
from .measure import MeasureParams

__all__ = [
    "kernel_j",
    "kernel_j_derivative",
    "kernel_j_derivatives",
    "triangle_area",
    "DKernelCalibration",
    "PROBE_PAIRS",
    "calibrate_d_constant",
    "d_kernel",
    "nu_form_d_prefactor",
    "support_rule",
    "translate_callable",
]

_SERIES_CUTOFF = 1.0
_DERIV_SERIES_CUTOFF = 2.5
_SERIES_TERMS = 40


def _series_coeffs(mu: float, terms: int = _SERIES_TERMS) -> np.ndarray:
    # j(z) = sum_k c_k z**(2k),  c_k = (-1/4)**k Gamma(mu+1) / (k! Gamma(mu+k+1))
    k = np.arange(terms)
    logc = special.gammaln(mu + 1) - special.gammaln(k + 1) - special.gammaln(mu + k + 1) - k * math.log(4.0)
    return np.where(k % 2 == 0, 1.0, -1.0) * np.exp(logc)


def _kernel_j_order(mu: float, z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    small = z < _SERIES_CUTOFF
    if small.any():
        c = _series_coeffs(mu, 16)
        out[small] = np.polynomial.polynomial.polyval(z[small] ** 2, c)
    big = ~small
    if big.any():
        zb = z[big]
        out[big] = math.exp(special.gammaln(mu + 1)) * (2.0 / zb) ** mu * special.jv(mu, zb)
    return out


def kernel_j(params: MeasureParams, z):
    """Normalized Bessel kernel ``j(z)`` with ``j(0) = 1``.

    Power series below z = 1, scipy's ``jv`` above.
    """
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ParameterError("kernel_j is defined for z >= 0")
    out = _kernel_j_order(params.mu, arr.ravel()).reshape(arr.shape)
    return float(out) if np.ndim(z) == 0 else out


def kernel_j_derivative(params: MeasureParams, z, order: int = 1):
    """``d^order/dz^order j(z)``.

    Series near the origin; above it, the first derivative comes from
    ``j_mu'(z) = -z j_{mu+1}(z) / (2(mu+1))`` and higher ones from the
    differentiated Bessel equation
    ``z j^(k+2) + (k+2mu+1) j^(k+1) + z j^(k) + k j^(k-1) = 0``.
    """
    if order < 0:
        raise ParameterError("order must be >= 0")
    out = kernel_j_derivatives(params, z, order)[order]
    return out if np.ndim(z) else float(out)


def kernel_j_derivatives(params: MeasureParams, z, max_order: int) -> list:
    """``[j(z), j'(z), ..., j^(max_order)(z)]`` from one recurrence pass."""
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0):
        raise ParameterError("kernel_j_derivative is defined for z >= 0")
    mu = params.mu
    zf = arr.ravel()
    outs = [_kernel_j_order(mu, zf)]
    if max_order == 0:
        return [outs[0].reshape(arr.shape)]
    outs += [np.empty_like(zf) for _ in range(max_order)]
    small = zf < _DERIV_SERIES_CUTOFF
    if small.any():
        c = _series_coeffs(mu)
        zs = zf[small]
        for m in range(1, max_order + 1):
            # d^m/dz^m sum c_k z^(2k) = sum c_k (2k)!/(2k-m)! z^(2k-m)
            acc = np.zeros_like(zs)
            for k, ck in enumerate(c):
                q = 2 * k
                if q < m:
                    continue
                acc += ck * math.prod(range(q - m + 1, q + 1)) * zs ** (q - m)
            outs[m][small] = acc
    big = ~small
    if big.any():
        zb = zf[big]
        d = [outs[0][big], -zb * _kernel_j_order(mu + 1.0, zb) / (2.0 * (mu + 1.0))]
        for k in range(0, max_order - 1):
            prev = d[k - 1] if k >= 1 else 0.0
            d.append(-((k + 2.0 * mu + 1.0) * d[k + 1] + zb * d[k] + k * prev) / zb)
        for m in range(1, max_order + 1):
            outs[m][big] = d[m]
    return [o.reshape(arr.shape) for o in outs]


def triangle_area(x, y, z):
    """Heron area of the triangle with sides x, y, z; exactly 0 if degenerate.

    Uses Kahan's sorted form so nearly-flat triangles keep their digits.
    """
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    if np.any(x <= 0) or np.any(y <= 0) or np.any(z <= 0):
        raise ParameterError("triangle sides must be positive")
    s = np.sort(np.stack([x, y, z]), axis=0)
    c, b, a = s[0], s[1], s[2]
    t2 = c - (a - b)
    ok = t2 > 0
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    area = np.where(ok, 0.25 * np.sqrt(np.where(ok, prod, 0.0)), 0.0)
    return float(area) if area.ndim == 0 else area


def nu_form_d_prefactor(params: MeasureParams) -> float:
    """``2**(3nu-5/2) Gamma(nu+1/2)**2 / (Gamma(nu) sqrt(pi))``, written in terms of nu."""
    nu = params.nu
    return float(2.0 ** (3 * nu - 2.5) * special.gamma(nu + 0.5) ** 2 / (special.gamma(nu) * math.sqrt(math.pi)))


@lru_cache(maxsize=64)
def _jacobi_rule(beta: float, m: int):
    s, w = special.roots_jacobi(m, beta, beta)
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


def support_rule(params: MeasureParams, x, y, order: int = 64):
    """Nodes z and weights W with ``sum W f(z) ~ int f(z) D(x,y,z) dsigma(z) / K``.

    Broadcasts over ``x``/``y``; returned arrays carry a trailing node axis.
    The weights include every factor except the prefactor K.
    """
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]
    mu = params.mu
    s, w = _jacobi_rule(mu - 0.5, int(order))
    u1 = (x - y) ** 2
    u = u1 + 2.0 * x * y * (1.0 + s)
    z = np.sqrt(u)
    # K (xy)^-2mu 4^(1-2mu) (c/2) (2xy)^(2mu) sum w f  ==  K 2^(1-2mu) c sum w f
    scale = 2.0 ** (1.0 - 2.0 * mu) * params.measure_const
    W = np.broadcast_to(scale * w, z.shape)
    return z, W


@dataclass(frozen=True)
class DKernelCalibration:
    params: MeasureParams
    constant: float
    calibration_residual: float
    probe_residuals: dict = field(default_factory=dict)
    nu_form_constant: float = float("nan")
    order: int = 64

    @property
    def nu_form_relative_deviation(self) -> float:
        return abs(self.constant - self.nu_form_constant) / self.constant

    def as_dict(self) -> dict:
        return {
            "nu": self.params.nu,
            "mu": self.params.mu,
            "constant": self.constant,
            "nu_form_constant": self.nu_form_constant,
            "nu_form_relative_deviation": self.nu_form_relative_deviation,
            "calibration_residual": self.calibration_residual,
            "order": self.order,
            "probe_residuals": {f"{x:g},{y:g}": r for (x, y), r in self.probe_residuals.items()},
        }


PROBE_PAIRS = ((1.0, 1.0), (0.5, 2.0), (1.0, 3.0), (2.0, 2.0), (0.3, 0.4), (1.5, 1.5), (0.7, 2.4), (3.0, 0.5))


def _raw_d(params: MeasureParams, x, y, z):
    mu = params.mu
    area = triangle_area(x, y, z)
    # sorted product keeps D exactly symmetric under permutations
    s = np.sort(np.stack(np.broadcast_arrays(*(np.asarray(v, float) for v in (x, y, z)))), axis=0)
    xyz = s[0] * s[1] * s[2]
    with np.errstate(divide="ignore"):
        if mu == 0.5:
            val = np.where(area > 0, 1.0 / xyz, 0.0)
        else:
            val = np.where(area > 0, xyz ** (-2.0 * mu) * np.where(area > 0, area, 1.0) ** (2.0 * mu - 1.0), 0.0)
    return val


def _unit_mass_integral(params: MeasureParams, x: float, y: float, order: int) -> float:
    """int (xyz)^-2mu area^(2mu-1) dsigma(z), by evaluating the pointwise kernel.

    The Jacobi weight is divided back out of the pointwise values, so this
    exercises :func:`triangle_area` rather than the closed factorization.
    """
    mu = params.mu
    beta = mu - 0.5
    s, w = _jacobi_rule(beta, order)
    u1, u2 = (x - y) ** 2, (x + y) ** 2
    half = 0.5 * (u2 - u1)
    u = u1 + half * (1.0 + s)
    z = np.sqrt(u)
    jac_weight = ((1.0 - s) * (1.0 + s)) ** beta
    integrand = _raw_d(params, x, y, z) * 0.5 * params.measure_const * u**mu
    return float(half * np.sum(w * integrand / jac_weight))


def calibrate_d_constant(
    params: MeasureParams,
    order: int = 64,
    probes=PROBE_PAIRS,
    tol: float = 1e-6,
) -> DKernelCalibration:
    """Fix the D prefactor by unit mass at (1, 1) and validate it on ``probes``."""
    ref = _unit_mass_integral(params, 1.0, 1.0, order)
    if not np.isfinite(ref) or ref <= 0:
        raise CalibrationError("reference mass integral is not positive", {(1.0, 1.0): ref})
    const = 1.0 / ref
    residuals = {}
    for x, y in probes:
        residuals[(float(x), float(y))] = abs(const * _unit_mass_integral(params, x, y, order) - 1.0)
    worst = max(residuals.values())
    if worst > tol:
        raise CalibrationError(f"D normalization residual {worst:.3e} exceeds {tol:g}", residuals)
    return DKernelCalibration(
        params=params,
        constant=const,
        calibration_residual=worst,
        probe_residuals=residuals,
        nu_form_constant=nu_form_d_prefactor(params),
        order=int(order),
    )


def d_kernel(cal: DKernelCalibration, x, y, z):
    """Calibrated D(x, y, z); literal 0 off the open triangle support."""
    if not isinstance(cal, DKernelCalibration):
        raise StateError("d_kernel needs a DKernelCalibration; call calibrate_d_constant first")
    for v in (x, y, z):
        if np.any(np.asarray(v, dtype=float) <= 0):
            raise ParameterError("D(x, y, z) needs positive arguments")
    out = cal.constant * _raw_d(cal.params, x, y, z)
    return float(out) if np.ndim(out) == 0 else out


def translate_callable(cal: DKernelCalibration, func: Callable, x, y, order: int | None = None):
    """``int func(z) D(x, y, z) dsigma(z)`` for an arbitrary vectorized callable."""
    z, W = support_rule(cal.params, x, y, order or cal.order)
    return cal.constant * np.sum(W * func(z), axis=-1)
