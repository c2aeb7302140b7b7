"""Deterministic test functions: spatial Gaussians, spectrally built families, noise."""

from __future__ import annotations

import re

import numpy as np

from .errors import ParameterError
from .hankel import HankelPlan, inverse, plan as make_plan
from .measure import RadialGrid, SampledFunction, lp_norm

__all__ = ["generate_test_function", "parse_kind", "smooth_bump", "normalize", "KINDS"]

KINDS = ("gaussian", "hankel_band", "spectral_decay", "noise")
# spectra must be this small at the end of the spectral grid
_SPECTRAL_EDGE_TOL = 1e-10


def smooth_bump(w, lo: float, hi: float) -> np.ndarray:
    """Bump on (lo, hi): ``(1 - s**2) exp(-18 s**2)`` in the centred variable s.

    It is ~1.5e-8 at the edges with a kink of the same size, so its spatial
    counterpart decays like a Gaussian instead of the slow decay of a
    compactly supported C-infinity bump.
    """
    w = np.asarray(w, dtype=float)
    s = (2.0 * w - (lo + hi)) / (hi - lo)
    inside = np.abs(s) < 1.0
    out = np.zeros_like(w)
    si = s[inside]
    out[inside] = (1.0 - si**2) * np.exp(-18.0 * si**2)
    return out


def parse_kind(kind) -> tuple[str, tuple]:
    """``'gaussian:1'``, ``'hankel_band:0:2'``, ``('noise', 7)`` ... -> (name, args)."""
    if isinstance(kind, str):
        parts = [p for p in re.split(r"[:,()\s]+", kind.strip()) if p]
        if not parts:
            raise ParameterError("empty test-function kind")
        name, raw = parts[0], parts[1:]
    else:
        name, *raw = kind
    if name not in KINDS:
        raise ParameterError(f"unknown test-function kind {name!r}; expected one of {KINDS}")
    try:
        args = tuple(int(a) if name == "noise" else float(a) for a in raw)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"bad arguments for {name}: {raw}") from exc
    return name, args


def _from_spectrum(p: HankelPlan, spectrum: np.ndarray) -> SampledFunction:
    peak = np.max(np.abs(spectrum))
    edge = p.output_grid.nodes > 0.9 * p.output_grid.r_max
    if peak > 0 and np.max(np.abs(spectrum[edge]), initial=0.0) > _SPECTRAL_EDGE_TOL * peak:
        raise ParameterError("spectrum is not negligible at the end of the spectral grid")
    f = inverse(p, SampledFunction(p.output_grid, spectrum))
    edge = f.grid.nodes > 0.9 * f.grid.r_max
    if np.max(np.abs(f.values[edge]), initial=0.0) > 1e-6 * np.max(np.abs(f.values)):
        raise ParameterError("spectrum is too narrow: its inverse is not negligible at r_max")
    return f


def generate_test_function(kind, grid: RadialGrid, plan: HankelPlan | None = None, seed: int | None = None) -> SampledFunction:
    """Sample a named test function on ``grid``.

    gaussian(width)
        ``exp(-t**2 / (2 width**2))``, value 1 at the origin.
    hankel_band(lo, hi)
        inverse transform of a smooth bump supported in ``(lo, hi)``.
    spectral_decay(rate)
        inverse transform of ``sech(rate * w)``; larger rate, smoother function.
    noise(seed)
        iid standard normal values at the grid nodes.
    """
    name, args = parse_kind(kind)
    if name == "gaussian":
        width = args[0] if args else 1.0
        if not width > 0:
            raise ParameterError("gaussian width must be > 0")
        return SampledFunction.from_callable(grid, lambda t: np.exp(-0.5 * (t / width) ** 2))
    if name == "noise":
        s = args[0] if args else (0 if seed is None else int(seed))
        rng = np.random.default_rng(s)
        return SampledFunction(grid, rng.standard_normal(len(grid)))
    p = plan if plan is not None else make_plan(grid.params, grid)
    if not p.input_grid.same_as(grid):
        raise ParameterError("plan input grid differs from the requested grid")
    omega = p.output_grid.nodes
    if name == "hankel_band":
        lo, hi = (tuple(args) + (0.0, 2.0)[len(args):])[:2]
        if not (0.0 <= lo < hi <= p.output_grid.r_max):
            raise ParameterError(f"band ({lo}, {hi}) must satisfy 0 <= lo < hi <= {p.output_grid.r_max:g}")
        return _from_spectrum(p, smooth_bump(omega, lo, hi))
    rate = args[0] if args else 1.0
    if not rate > 0:
        raise ParameterError("spectral_decay rate must be > 0")
    return _from_spectrum(p, 1.0 / np.cosh(rate * omega))


def normalize(f: SampledFunction, p: float = 2.0) -> SampledFunction:
    n = lp_norm(f, p)
    if n == 0:
        raise ParameterError("cannot normalize the zero function")
    return f * (1.0 / n)
