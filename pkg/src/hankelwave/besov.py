"""Besov-Hankel seminorms by modulus of smoothness and by wavelet coefficients,
and the two inequalities that tie them together.

Both seminorms are computed on a finite window of steps/scales. Tails beyond
the window are reported separately:

* modulus, large h: rigorous cap ``w_p(f)(h) <= 2 ||f||_p``;
* everything else: power-law extrapolation from the two end points.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .convolution import translate
from .errors import CapabilityError, ParameterError, ResolutionError
from .kernels import DKernelCalibration
from .measure import SampledFunction, lp_norm
from .wavelet import Scalogram, Wavelet, geometric_scales, log_trapezoid_weights

__all__ = [
    "BesovParams",
    "BesovReport",
    "BoundCheck",
    "SlopeReport",
    "modulus",
    "modulus_curve",
    "seminorm_via_modulus",
    "seminorm_via_wavelet",
    "wavelet_moment",
    "direct_constant",
    "converse_constant",
    "direct_bound_check",
    "converse_bound_check",
    "besov_report",
    "equivalence_report",
    "smoothness_exponent",
]

DEFAULT_TOL = 0.05


@dataclass(frozen=True, eq=False)
class BesovParams:
    alpha: float
    p: float = 2.0
    q: float = 2.0
    h_grid: np.ndarray = field(default_factory=geometric_scales)
    scale_grid: np.ndarray = field(default_factory=geometric_scales)

    def __post_init__(self):
        a = float(self.alpha)
        if not a > 0 or a != a or abs(a - round(a)) < 1e-12:
            raise ParameterError(f"alpha must be positive and non-integer, got {self.alpha}")
        for name in ("p", "q"):
            v = float(getattr(self, name))
            if not (1.0 < v < math.inf):
                raise ParameterError(f"{name} must lie in (1, inf), got {v}")
        for name in ("h_grid", "scale_grid"):
            g = np.asarray(getattr(self, name), dtype=float)
            if g.ndim != 1 or g.size < 2 or np.any(g <= 0) or np.any(np.diff(g) <= 0):
                raise ParameterError(f"{name} must be positive and strictly increasing")
            object.__setattr__(self, name, g)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))

    @property
    def alpha_int(self) -> int:
        return int(math.floor(self.alpha))

    @property
    def alpha_frac(self) -> float:
        return self.alpha - self.alpha_int

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "alpha_int": self.alpha_int,
            "alpha_frac": self.alpha_frac,
            "p": self.p,
            "q": self.q,
            "h_grid": self.h_grid.tolist(),
            "scale_grid": self.scale_grid.tolist(),
        }


@dataclass(frozen=True)
class WindowIntegral:
    """``(int (x**-alpha v(x))**q dx/x)**(1/q)`` on the window plus tail estimates."""

    value: float
    low_tail: float
    high_tail: float

    @property
    def completed(self) -> float:
        return self.value if self.value == 0 else self.value + self.low_tail + self.high_tail


def _power_tail(g_edge: float, g_inner: float, x_edge: float, x_inner: float) -> float:
    """Tail of ``int g dx/x`` past ``x_edge`` for the power law through both points."""
    if g_edge <= 0.0:
        return 0.0
    if g_inner <= 0.0:
        return math.inf
    decay = math.log(g_inner / g_edge) / abs(math.log(x_edge / x_inner))
    return g_edge / decay if decay > 0 else math.inf


def _window(x: np.ndarray, values: np.ndarray, alpha: float, q: float, high_cap: float | None = None) -> WindowIntegral:
    g = (x ** -alpha * np.abs(values)) ** q
    total = float(np.dot(log_trapezoid_weights(x), g))
    if total <= 0.0:
        return WindowIntegral(0.0, 0.0, 0.0)
    low = _power_tail(g[0], g[1], x[0], x[1])
    if high_cap is not None:
        high = high_cap**q * x[-1] ** (-alpha * q) / (alpha * q)
    else:
        high = _power_tail(g[-1], g[-2], x[-1], x[-2])
    val = total ** (1.0 / q)
    # tails converted to additive increments on the q-th root
    lo_inc = (total + low) ** (1.0 / q) - val if math.isfinite(low) else math.inf
    hi_inc = (total + high) ** (1.0 / q) - val if math.isfinite(high) else math.inf
    return WindowIntegral(val, lo_inc, hi_inc)


@dataclass
class BoundCheck:
    """One side of the seminorm equivalence, with its slack ``rhs - lhs``."""

    kind: str
    lhs: float
    rhs: float
    constant: float
    holds: bool
    tol: float
    alternative: dict = field(default_factory=dict)
    note: str = ""

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def as_dict(self) -> dict:
        d = asdict(self)
        d["slack"] = self.slack
        return d


@dataclass
class BesovReport:
    params: BesovParams
    seminorm_modulus: float
    seminorm_wavelet: float
    direct_bound_rhs: float
    converse_constant: float
    ratio: float | None
    direct_constant: float = math.nan
    bracket: tuple = (0.0, math.inf)
    in_bracket: bool | None = None
    degenerate: bool = False
    direct: BoundCheck | None = None
    converse: BoundCheck | None = None
    label: str = ""

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "params": self.params.as_dict(),
            "seminorm_modulus": self.seminorm_modulus,
            "seminorm_wavelet": self.seminorm_wavelet,
            "direct_bound_rhs": self.direct_bound_rhs,
            "direct_constant": self.direct_constant,
            "converse_constant": self.converse_constant,
            "ratio": self.ratio,
            "bracket": list(self.bracket),
            "in_bracket": self.in_bracket,
            "degenerate": self.degenerate,
            "direct": self.direct.as_dict() if self.direct else None,
            "converse": self.converse.as_dict() if self.converse else None,
        }


# ---------------------------------------------------------------------------
# modulus of smoothness


def modulus(cal: DKernelCalibration, f: SampledFunction, h: float, p: float, order: int | None = None) -> float:
    """``w_p(f)(h) = ||tau_h f - f||_p``."""
    if not h > 0:
        raise ParameterError(f"step h must be > 0, got {h}")
    if not np.any(f.values):
        return 0.0
    return lp_norm(translate(cal, f, h, order) - f, p)


def modulus_curve(cal: DKernelCalibration, f: SampledFunction, h_grid, p: float, order: int | None = None) -> np.ndarray:
    return np.array([modulus(cal, f, float(h), p, order) for h in h_grid])


def _reduced(f: SampledFunction, params: BesovParams, derivatives):
    """Function whose modulus enters at order ``alpha_frac``: f itself or f^([alpha])."""
    k = params.alpha_int
    if k == 0:
        return f
    if derivatives is None or len(derivatives) < k:
        raise CapabilityError(
            f"alpha={params.alpha} needs derivative {k} of f; pass derivatives=[f', ...] "
            "(see wavelet.spectral_derivatives)"
        )
    return derivatives[k - 1]


def _modulus_window(cal, f, params: BesovParams, derivatives=None, curve=None) -> WindowIntegral:
    g = _reduced(f, params, derivatives)
    if curve is None:
        curve = modulus_curve(cal, g, params.h_grid, params.p)
    cap = 2.0 * lp_norm(g, params.p)
    return _window(params.h_grid, curve, params.alpha_frac, params.q, high_cap=cap)


def seminorm_via_modulus(cal: DKernelCalibration, f: SampledFunction, params: BesovParams, derivatives=None, curve=None) -> float:
    """``(int (h**-a w_p(g)(h))**q dh/h)**(1/q)`` on ``h_grid``.

    ``g = f`` and ``a = alpha`` for ``alpha < 1``; otherwise ``g = f^([alpha])``
    and ``a = alpha - [alpha]``.
    """
    return _modulus_window(cal, f, params, derivatives, curve).value


# ---------------------------------------------------------------------------
# wavelet seminorm


def _scale_norms(scalogram: Scalogram, params: BesovParams):
    s = scalogram.scales
    lo, hi = params.scale_grid[0], params.scale_grid[-1]
    rtol = 1e-9
    if s[0] > lo * (1 + rtol) or s[-1] < hi * (1 - rtol):
        raise ResolutionError(f"scalogram scales [{s[0]:.4g}, {s[-1]:.4g}] do not cover [{lo:.4g}, {hi:.4g}]")
    keep = (s >= lo * (1 - rtol)) & (s <= hi * (1 + rtol))
    if keep.sum() < 4:
        raise ResolutionError("fewer than 4 scales inside the scale window")
    return s[keep], scalogram.scale_norms(params.p)[keep]


def _wavelet_window(scalogram: Scalogram, params: BesovParams) -> WindowIntegral:
    scales, norms = _scale_norms(scalogram, params)
    return _window(scales, norms, params.alpha, params.q)


def seminorm_via_wavelet(scalogram: Scalogram, params: BesovParams) -> float:
    """``(int (a**-alpha ||B f(., a)||_p)**q da/a)**(1/q)`` on the scale window."""
    return _wavelet_window(scalogram, params).value


# ---------------------------------------------------------------------------
# constants of the two inequalities


def wavelet_moment(wavelet: Wavelet, power: float, k: int = 0) -> float:
    """``int z**power |psi^(k)(z)| dsigma(z)`` on the wavelet's grid; inf if divergent."""
    g = wavelet.derivative(k)
    x = g.grid.nodes
    vals = np.abs(g.values) * x**power
    if not np.all(np.isfinite(vals)):
        return math.inf
    return g.grid.integrate(vals)


def direct_constant(wavelet: Wavelet, params: BesovParams) -> dict:
    """Moments for the wavelet-side bound ``|f|_wav <= M |f|_mod``.

    ``fractional_power``: ``int z**(alpha-[alpha]) |psi| dsigma`` (used for the check).
    ``negative_power``: ``int z**-alpha |psi| dsigma`` (reported only).
    """
    a = params.alpha_frac
    return {
        "fractional_power": wavelet_moment(wavelet, a),
        "negative_power": wavelet_moment(wavelet, -params.alpha),
    }


def converse_constant(wavelet: Wavelet, params: BesovParams) -> float:
    """``(1/A)(2/a ||psi^(k)||_1 + 1/(1-a) ||psi^(k+1)||_1)``, ``k = [alpha]``, ``a = alpha - k``."""
    k = params.alpha_int
    a = params.alpha_frac
    if len(wavelet.derivative_samples) < k + 1:
        raise CapabilityError(f"wavelet lacks derivative {k + 1}")
    n0 = wavelet_moment(wavelet, 0.0, k)
    n1 = wavelet_moment(wavelet, 0.0, k + 1)
    return (2.0 / a * n0 + 1.0 / (1.0 - a) * n1) / wavelet.plancherel_constant


def _check_hypotheses(wavelet: Wavelet, params: BesovParams) -> str:
    if wavelet.cancellation_order < params.alpha_int + 1:
        return f"wavelet has {wavelet.cancellation_order} cancellations, needs {params.alpha_int + 1}"
    return ""


def direct_bound_check(
    cal,
    f: SampledFunction,
    wavelet: Wavelet,
    params: BesovParams,
    scalogram: Scalogram,
    derivatives=None,
    curve=None,
    tol: float = DEFAULT_TOL,
) -> BoundCheck:
    """``|f|_wav <= (1+tol) M |f|_mod`` with ``M = int z**(alpha-[alpha]) |psi| dsigma``.

    The right side includes the modulus tail beyond the h-window.
    """
    note = _check_hypotheses(wavelet, params)
    moments = direct_constant(wavelet, params)
    M = moments["fractional_power"]
    lhs = seminorm_via_wavelet(scalogram, params)
    mod = _modulus_window(cal, f, params, derivatives, curve)
    if not math.isfinite(M):
        return BoundCheck("direct", lhs, math.inf, M, False, tol, {"moments": moments}, note or "divergent wavelet moment")
    rhs = M * mod.completed
    alt = {
        "moment_negative_power": moments["negative_power"],
        "rhs_negative_power": moments["negative_power"] * mod.completed,
        "rhs_window_only": M * mod.value,
        "modulus_tails": [mod.low_tail, mod.high_tail],
    }
    alt["holds_negative_power"] = bool(lhs <= (1 + tol) * alt["rhs_negative_power"])
    holds = bool(lhs <= (1 + tol) * rhs) and not note
    return BoundCheck("direct", lhs, rhs, M, holds, tol, alt, note)


def converse_bound_check(
    cal,
    f: SampledFunction,
    wavelet: Wavelet,
    params: BesovParams,
    scalogram: Scalogram,
    derivatives=None,
    curve=None,
    tol: float = DEFAULT_TOL,
) -> BoundCheck:
    """``|f|_mod <= (1+tol) K |f|_wav`` with the derivative-norm constant K.

    The right side includes extrapolated wavelet tails beyond the scale window.
    """
    note = _check_hypotheses(wavelet, params)
    K = converse_constant(wavelet, params)
    lhs = _modulus_window(cal, f, params, derivatives, curve).value
    wav = _wavelet_window(scalogram, params)
    rhs = K * wav.completed
    alt = {
        "rhs_window_only": K * wav.value,
        "wavelet_tails": [wav.low_tail, wav.high_tail],
        "constant_with_measure_factor": K * cal.params.measure_const,
    }
    holds = bool(lhs <= (1 + tol) * rhs) and not note
    return BoundCheck("converse", lhs, rhs, K, holds, tol, alt, note)


def besov_report(
    cal,
    f: SampledFunction,
    wavelet: Wavelet,
    params: BesovParams,
    scalogram: Scalogram,
    derivatives=None,
    curve=None,
    tol: float = DEFAULT_TOL,
    label: str = "",
) -> BesovReport:
    g = _reduced(f, params, derivatives)
    if curve is None:
        curve = modulus_curve(cal, g, params.h_grid, params.p)
    d = direct_bound_check(cal, f, wavelet, params, scalogram, derivatives, curve, tol)
    c = converse_bound_check(cal, f, wavelet, params, scalogram, derivatives, curve, tol)
    smod, swav = c.lhs, d.lhs
    degenerate = smod <= 0.0 or swav <= 0.0
    ratio = None if degenerate else swav / smod
    lo = 1.0 / (c.constant * (1 + tol))
    hi = d.constant * (1 + tol)
    inside = None if degenerate else bool(lo <= ratio <= hi)
    return BesovReport(
        params=params,
        seminorm_modulus=smod,
        seminorm_wavelet=swav,
        direct_bound_rhs=d.rhs,
        converse_constant=c.constant,
        ratio=ratio,
        direct_constant=d.constant,
        bracket=(lo, hi),
        in_bracket=inside,
        degenerate=degenerate,
        direct=d,
        converse=c,
        label=label,
    )


def equivalence_report(cal, family, wavelet: Wavelet, params: BesovParams, scalograms, derivatives=None, tol: float = DEFAULT_TOL, labels=None):
    """One :class:`BesovReport` per family member; zero members are marked degenerate."""
    out = []
    for i, (f, s) in enumerate(zip(family, scalograms)):
        der = derivatives[i] if derivatives is not None else None
        lab = labels[i] if labels is not None else f"f{i}"
        out.append(besov_report(cal, f, wavelet, params, s, der, tol=tol, label=lab))
    return out


@dataclass(frozen=True)
class SlopeReport:
    slope: float | None
    defined: bool
    reason: str = ""
    scales: tuple = ()


def smoothness_exponent(scalogram: Scalogram, p: float, count: int = 8) -> SlopeReport:
    """Least-squares slope of ``log ||B f(., a)||_p`` against ``log a`` over the smallest scales."""
    s = scalogram.scales
    below = s < 1.0
    if below.sum() < count:
        raise ResolutionError(f"need >= {count} scales below a = 1, have {int(below.sum())}")
    norms = scalogram.scale_norms(p)[:count]
    xs = s[:count]
    if np.any(norms <= 0):
        return SlopeReport(None, False, "zero coefficient norms", tuple(xs))
    slope = float(np.polyfit(np.log(xs), np.log(norms), 1)[0])
    return SlopeReport(slope, True, "", tuple(xs))
