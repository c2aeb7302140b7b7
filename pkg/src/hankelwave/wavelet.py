"""Bessel wavelets, the continuous Bessel wavelet transform and its inverse.

A wavelet is specified by its Hankel-domain profile ``psi_hat``. Dilation is
normalized so that the scale-``a`` wavelet has transform ``psi_hat(a w)``::

    psi_a(t) = a**-(2mu+2) psi(t / a)

and the daughter ``psi_{b,a}`` is the Hankel translate of ``psi_a`` by ``b``.
The transform ``B f(b, a) = (f # psi_a)(b)`` is therefore computed per scale
as ``inverse(f_hat * psi_hat(a .))``.

Two constants are attached to a wavelet:

``admissibility``
    ``int_0^inf w**(-2nu-1) |psi_hat(w)|**2 dw`` (plain ``dw``).
``plancherel_constant``
    the same integrand against ``dsigma(w)``; this is the number that makes
    ``||B f||_{S_2}**2 = C ||f||_2**2`` and the reconstruction formula exact
    under the scale measure ``dsigma(a) / a**(2nu+1)``.
"""

from __future__ import annotations

import io
import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import interpolate, special

from .errors import AdmissibilityError, ParameterError, ResolutionError, ShapeError
from .hankel import HankelPlan, forward, inverse, kernel_matrix, plan as make_plan
from .kernels import DKernelCalibration, kernel_j_derivatives, support_rule
from .measure import MeasureParams, RadialGrid, SampledFunction, lp_norm

__all__ = [
    "Wavelet",
    "Scalogram",
    "make_wavelet",
    "admissibility_constant",
    "plancherel_constant",
    "daughter",
    "cwt",
    "cwt_direct",
    "sp_norm",
    "cwt_parseval",
    "cwt_invert",
    "geometric_scales",
    "log_trapezoid_weights",
    "spectral_derivatives",
]

# relative size of f_hat * psi_hat(a w) allowed on the last spectral panel
_SPECTRAL_LEAK_TOL = 1e-7
_ROUNDOFF_FLOOR = 1e-11


def geometric_scales(a_min: float = 2.0**-5, a_max: float = 2.0**5, count: int = 64) -> np.ndarray:
    if not (0 < a_min < a_max) or count < 2:
        raise ParameterError("need 0 < a_min < a_max and count >= 2")
    return np.geomspace(a_min, a_max, int(count))


def log_trapezoid_weights(scales) -> np.ndarray:
    """Trapezoid weights in log(a): ``sum w_k g(a_k) ~ int g(a) da / a``."""
    s = np.log(np.asarray(scales, dtype=float))
    if s.size < 2 or np.any(np.diff(s) <= 0):
        raise ParameterError("scales must be positive and strictly increasing")
    d = np.diff(s)
    w = np.zeros_like(s)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


# ---------------------------------------------------------------------------
# admissibility integrals


def _octave_integral(func: Callable, lo_exp: int = -60, hi_exp: int = 12, nodes: int = 24):
    """Integrate ``func(w) dw`` over (0, inf) octave by octave.

    Returns ``(total, contributions)`` with contributions ordered from the
    smallest octave upward. Above 2**hi_exp the profile is expected to be
    negligible.
    """
    s, wts = special.roots_legendre(nodes)
    edges = 2.0 ** np.arange(lo_exp, hi_exp + 1, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    w = lo + half * (s + 1.0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        vals = func(w)
    contrib = np.sum(half * wts * vals, axis=1)
    return float(np.sum(contrib)), contrib


def _checked_integral(name: str, func: Callable) -> float:
    total, contrib = _octave_integral(func)
    if not np.all(np.isfinite(contrib)):
        raise AdmissibilityError(f"{name} integrand is not finite near the origin")
    if total <= 0.0:
        raise AdmissibilityError(f"{name} integral is {total:.3g}; it must be > 0")
    low = np.abs(contrib[:8])
    # panel-growth test: the lowest octaves must be shrinking toward w = 0
    if low[0] > 1e-13 * total or not np.all(low[:-1] <= low[1:] + 1e-300):
        raise AdmissibilityError(
            f"{name} integral does not converge at w = 0 "
            f"(lowest octave contributes {low[0] / total:.2e} of the total); "
            "the profile must vanish fast enough at the origin"
        )
    if abs(contrib[-1]) > 1e-13 * total:
        raise AdmissibilityError(f"{name} integral does not converge at w = inf")
    return total


def admissibility_constant(wavelet_or_profile, params: MeasureParams | None = None) -> float:
    """``int_0^inf w**(-2nu-1) |psi_hat(w)|**2 dw``."""
    if isinstance(wavelet_or_profile, Wavelet):
        return wavelet_or_profile.admissibility
    profile = wavelet_or_profile
    e = -2.0 * params.nu - 1.0
    return _checked_integral("admissibility", lambda w: w**e * profile(w) ** 2)


def plancherel_constant(wavelet_or_profile, params: MeasureParams | None = None) -> float:
    """``int_0^inf w**(-2nu-1) |psi_hat(w)|**2 dsigma(w)``."""
    if isinstance(wavelet_or_profile, Wavelet):
        return wavelet_or_profile.plancherel_constant
    profile = wavelet_or_profile
    e = -2.0 * params.nu - 1.0
    return _checked_integral("Plancherel", lambda w: params.density(w) * w**e * profile(w) ** 2)


# ---------------------------------------------------------------------------
# wavelet construction


def hankel_mexican(n: int) -> Callable:
    """Profile ``w**(2n) exp(-w**2)``."""
    if n < 1:
        raise ParameterError("hankel_mexican order must be >= 1")

    def profile(w):
        w = np.asarray(w, dtype=float)
        return w ** (2 * n) * np.exp(-w * w)

    profile.__name__ = f"hankel_mexican_{n}"
    return profile


def _table_profile(table) -> Callable:
    omega, values = (np.asarray(v, dtype=float) for v in table)
    if omega.ndim != 1 or omega.shape != values.shape or omega.size < 4:
        raise ParameterError("custom profile table needs matching 1-d omega/value arrays (>= 4 rows)")
    order = np.argsort(omega)
    omega, values = omega[order], values[order]
    spline = interpolate.CubicSpline(omega, values, extrapolate=False)

    def profile(w):
        w = np.asarray(w, dtype=float)
        out = spline(w)
        return np.where(np.isfinite(out), out, 0.0)

    profile.__name__ = "custom_table"
    return profile


def _estimate_cancellation(profile: Callable) -> int:
    w = np.array([1e-4, 2e-4])
    v = np.abs(profile(w))
    if np.any(v == 0):
        return 1
    slope = math.log(v[1] / v[0]) / math.log(2.0)
    return max(1, int(round(slope / 2.0)))


def parse_profile_id(profile_id):
    """Accepts ``'hankel_mexican:n'``, ``('hankel_mexican', n)``,
    ``('custom', (omega, values))`` or a bare callable."""
    if callable(profile_id):
        return profile_id, None, getattr(profile_id, "__name__", "callable")
    if isinstance(profile_id, str):
        m = re.fullmatch(r"\s*hankel_mexican\s*(?:[:(]\s*(\d+)\s*\)?)?\s*", profile_id)
        if not m:
            raise ParameterError(f"unknown wavelet id {profile_id!r}")
        n = int(m.group(1) or 1)
        return hankel_mexican(n), n, f"hankel_mexican:{n}"
    kind, arg = profile_id
    if kind == "hankel_mexican":
        return hankel_mexican(int(arg)), int(arg), f"hankel_mexican:{int(arg)}"
    if kind == "custom":
        return _table_profile(arg), None, "custom"
    raise ParameterError(f"unknown wavelet kind {kind!r}")


@dataclass(frozen=True, eq=False)
class Wavelet:
    params: MeasureParams
    spectral_profile: Callable
    cancellation_order: int
    admissibility: float
    plancherel_constant: float
    samples: SampledFunction
    derivative_samples: tuple = ()
    name: str = "wavelet"

    @property
    def grid(self) -> RadialGrid:
        return self.samples.grid

    def profile_on(self, omega) -> np.ndarray:
        return np.asarray(self.spectral_profile(np.asarray(omega, dtype=float)), dtype=float)

    def derivative(self, k: int) -> SampledFunction:
        if k == 0:
            return self.samples
        if k > len(self.derivative_samples):
            raise ParameterError(f"derivative {k} not available (have {len(self.derivative_samples)})")
        return self.derivative_samples[k - 1]

    def evaluate(self, points) -> np.ndarray:
        """psi at arbitrary points, via panel interpolation of the samples."""
        return self.samples(points)


def spectral_derivatives(p: HankelPlan, fhat: SampledFunction, count: int) -> list[SampledFunction]:
    """``d^k/dt^k`` of the function whose transform is ``fhat``, k = 1..count.

    Differentiates the kernel: ``f^(k)(t) = int w**k j^(k)(t w) fhat(w) dsigma(w)``.
    """
    params = p.params
    spec_grid = fhat.grid
    out_grid = p.input_grid
    z = np.multiply.outer(out_grid.nodes, spec_grid.nodes)
    if count < 1:
        return []
    mats = kernel_j_derivatives(params, z, count)
    return [
        SampledFunction(out_grid, mats[k] @ (spec_grid.weights * spec_grid.nodes**k * fhat.values))
        for k in range(1, count + 1)
    ]


def make_wavelet(
    params: MeasureParams,
    profile_id="hankel_mexican:1",
    grid: RadialGrid | None = None,
    plan: HankelPlan | None = None,
    n_derivatives: int | None = None,
) -> Wavelet:
    """Build a wavelet from its Hankel-domain profile.

    The spatial samples (and ``cancellation_order + 1`` derivatives) are
    synthesized by the inverse transform on ``grid``.
    """
    profile, order, name = parse_profile_id(profile_id)
    if plan is None:
        if grid is None:
            raise ParameterError("make_wavelet needs a grid or a plan")
        plan = make_plan(params, grid)
    grid = plan.input_grid
    spec_grid = plan.output_grid
    omega = spec_grid.nodes
    values = np.asarray(profile(omega), dtype=float)
    if not np.all(np.isfinite(values)):
        raise ParameterError("profile must be finite on the spectral grid")
    if not np.any(values != 0.0):
        raise AdmissibilityError("admissibility constant is 0 for the zero profile")
    if order is None:
        order = _estimate_cancellation(profile)
    adm = admissibility_constant(profile, params)
    planch = plancherel_constant(profile, params)
    tail = np.max(np.abs(values[omega > 0.9 * spec_grid.r_max]), initial=0.0)
    if tail > 1e-10 * np.max(np.abs(values)):
        raise ResolutionError("wavelet profile is not negligible at the end of the spectral grid")
    psi_hat = SampledFunction(spec_grid, values)
    samples = inverse(plan, psi_hat)
    nd = order + 1 if n_derivatives is None else int(n_derivatives)
    derivs = tuple(spectral_derivatives(plan, psi_hat, nd)) if nd > 0 else ()
    return Wavelet(params, profile, int(order), adm, planch, samples, derivs, name)


# ---------------------------------------------------------------------------
# daughters and the transform


def daughter(cal: DKernelCalibration, wavelet: Wavelet, b: float, a: float, grid: RadialGrid | None = None) -> SampledFunction:
    """``psi_{b,a}(x) = a**-(2mu+2) (tau_{b/a} psi)(x/a)`` sampled on ``grid``."""
    if not a > 0:
        raise ParameterError(f"scale a must be > 0, got {a}")
    if b < 0:
        raise ParameterError(f"position b must be >= 0, got {b}")
    grid = wavelet.grid if grid is None else grid
    mu = cal.params.mu
    x = grid.nodes / a
    if b == 0:
        vals = wavelet.evaluate(x)
    else:
        z, W = support_rule(cal.params, x, b / a, cal.order)
        vals = cal.constant * np.sum(W * wavelet.evaluate(z), axis=-1)
    return SampledFunction(grid, a ** -(2.0 * mu + 2.0) * vals)


@dataclass(frozen=True, eq=False)
class Scalogram:
    """``coefficients[s, k] = B f(b_k, a_s)``."""

    positions: RadialGrid
    scales: np.ndarray
    coefficients: np.ndarray
    wavelet: Wavelet | None = None
    source_norm_p: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.coefficients.shape != (self.scales.size, len(self.positions)):
            raise ShapeError("coefficients must be |scales| x |positions|")
        if not np.all(np.isfinite(self.coefficients)):
            raise ParameterError("scalogram has non-finite entries")

    @property
    def params(self) -> MeasureParams:
        return self.positions.params

    def row(self, s: int) -> SampledFunction:
        return SampledFunction(self.positions, self.coefficients[s])

    def scale_norms(self, p: float) -> np.ndarray:
        key = float(p)
        cached = self.source_norm_p.get(key)
        if cached is None:
            cached = np.array([lp_norm(self.row(s), p) for s in range(self.scales.size)])
            self.source_norm_p[key] = cached
        return cached

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("a,b,coeff\n")
        for s, a in enumerate(self.scales):
            for b, c in zip(self.positions.nodes, self.coefficients[s]):
                buf.write(f"{a:.17g},{b:.17g},{c:.17g}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "nu": self.params.nu,
                "wavelet": self.wavelet.name if self.wavelet else None,
                "scales": self.scales.tolist(),
                "positions": self.positions.nodes.tolist(),
                "grid": self.positions.spec(),
                "coefficients": self.coefficients.tolist(),
            }
        )


def _spectral_rows(p: HankelPlan, fhat: np.ndarray, wavelet: Wavelet, scales: np.ndarray, check: bool = True):
    omega = p.output_grid.nodes
    psi = wavelet.profile_on(np.multiply.outer(omega, scales))  # (N_w, S)
    prod = fhat[:, None] * psi
    if check:
        edge = omega > 0.9 * p.output_grid.r_max
        peak = np.max(np.abs(prod), axis=0)
        leak = np.max(np.abs(prod[edge]), axis=0, initial=0.0)
        # below the transform's own round-off the leak carries no information
        floor = _ROUNDOFF_FLOOR * np.max(np.abs(fhat), initial=0.0) * np.max(np.abs(psi), axis=0)
        bad = (leak > _SPECTRAL_LEAK_TOL * np.where(peak > 0, peak, 1.0)) & (leak > floor)
        if np.any(bad & (peak > 0)):
            a_bad = scales[bad][0]
            raise ResolutionError(
                f"at scale a={a_bad:.4g} f_hat * psi_hat(a w) is not negligible at w={p.output_grid.r_max:.3g}; "
                "use larger scales or a longer spectral grid"
            )
    return prod


def cwt(
    p: HankelPlan,
    cal: DKernelCalibration | None,
    f: SampledFunction,
    wavelet: Wavelet,
    scales,
    positions: RadialGrid | None = None,
    check_resolution: bool = True,
) -> Scalogram:
    """Continuous Bessel wavelet transform on ``positions x scales``.

    Spectral path: one forward transform of ``f``, then one inverse per scale
    (batched as a single matrix product).
    """
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or scales.size == 0 or np.any(scales <= 0) or np.any(np.diff(scales) <= 0):
        raise ParameterError("scales must be positive and strictly increasing")
    fhat = forward(p, f).values
    prod = _spectral_rows(p, fhat, wavelet, scales, check_resolution)
    spec = p.output_grid
    if positions is None or positions.same_as(p.input_grid):
        positions = p.input_grid
        K = p._reverse
    else:
        K = kernel_matrix(p.params, positions.nodes, spec.nodes, spec.weights)
    coeffs = (K @ prod).T
    return Scalogram(positions, scales, np.ascontiguousarray(coeffs), wavelet)


def cwt_direct(cal: DKernelCalibration, f: SampledFunction, wavelet: Wavelet, b: float, a: float) -> float:
    """Single coefficient by the double integral ``int f psi_{b,a} dsigma``."""
    d = daughter(cal, wavelet, b, a, f.grid)
    return f.grid.integrate(f.values * d.values)


def _scale_weights(params: MeasureParams, scales) -> np.ndarray:
    # dsigma(a) / a**(2nu+1) = measure_const * da / a
    return params.measure_const * log_trapezoid_weights(scales)


def sp_norm(scalogram: Scalogram, p: float) -> float:
    """Mixed norm: L^2 over scales (``dsigma(a)/a**(2nu+1)``), then L^p over positions."""
    p = float(p)
    if not (1.0 < p < np.inf):
        raise ParameterError(f"sp_norm needs 1 < p < inf, got {p}")
    if scalogram.scales.size < 4:
        raise ResolutionError("sp_norm needs at least 4 scales")
    sw = _scale_weights(scalogram.params, scalogram.scales)
    inner = sw @ (scalogram.coefficients**2)
    if not np.any(inner > 0):
        return 0.0
    return float(np.dot(scalogram.positions.weights, inner ** (p / 2.0)) ** (1.0 / p))


def cwt_parseval(p: HankelPlan, cal, f: SampledFunction, g: SampledFunction, wavelet: Wavelet, scales):
    """``(lhs, rhs)`` of the wavelet Parseval identity; lhs uses the Plancherel constant."""
    if not f.grid.same_as(g.grid):
        raise ShapeError("f and g must share a grid")
    sf = cwt(p, cal, f, wavelet, scales)
    sg = cwt(p, cal, g, wavelet, scales)
    sw = _scale_weights(p.params, sf.scales)
    inner = sw @ (sf.coefficients * sg.coefficients)
    lhs = float(np.dot(sf.positions.weights, inner)) / wavelet.plancherel_constant
    rhs = f.grid.integrate(f.values * g.values)
    return lhs, rhs


def cwt_invert(p: HankelPlan, cal, scalogram: Scalogram, wavelet: Wavelet) -> SampledFunction:
    """Reconstruction ``(1/C) int int B(b,a) psi_{b,a}(x) dsigma(a)/a**(2nu+1) dsigma(b)``.

    Per scale, ``int B(b,a) psi_{b,a}(x) dsigma(b) = (B(.,a) # psi_a)(x)``, so the
    b-integral is a forward transform of each row times ``psi_hat(a w)``.
    """
    spec = p.output_grid
    pos = scalogram.positions
    if pos.same_as(p.input_grid):
        rows_hat = p.kernel_matrix @ scalogram.coefficients.T  # (N_w, S)
    else:
        K = kernel_matrix(p.params, spec.nodes, pos.nodes, pos.weights)
        rows_hat = K @ scalogram.coefficients.T
    psi = wavelet.profile_on(np.multiply.outer(spec.nodes, scalogram.scales))
    sw = _scale_weights(p.params, scalogram.scales)
    rec_hat = (rows_hat * psi) @ sw / wavelet.plancherel_constant
    return inverse(p, SampledFunction(spec, rec_hat))
