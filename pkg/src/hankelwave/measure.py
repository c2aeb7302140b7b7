"""Weighted half-line measure, composite quadrature grids and sampled functions.

Everything in the package integrates against

    dsigma(t) = t**(2*mu + 1) dt / (2**mu * Gamma(mu + 1)),   mu = nu - 1/2,

and uses the normalized Bessel kernel ``j(z) = 2**mu Gamma(mu+1) z**-mu J_mu(z)``.
With this pair the Hankel transform is its own inverse and the Gaussian
``exp(-t**2/2)`` is a fixed point.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special

from .errors import ParameterError, ShapeError

__all__ = [
    "MeasureParams",
    "Segment",
    "RadialGrid",
    "SampledFunction",
    "build_grid",
    "build_composite_grid",
    "default_grid",
    "lp_norm",
    "inner_product",
]


@dataclass(frozen=True)
class MeasureParams:
    """Order parameter and normalization constants of the measure and kernel.

    ``kernel_const``/``measure_const`` are the self-reciprocal pair actually
    used. ``nu_form_kernel_const``/``nu_form_measure_const`` are the constants
    written in terms of ``nu`` with the ``2*nu + 1`` density exponent; they are
    kept for reporting only because they do not make the transform an
    involution.
    """

    nu: float
    mu: float = field(init=False)
    kernel_const: float = field(init=False)
    measure_const: float = field(init=False)
    nu_form_kernel_const: float = field(init=False)
    nu_form_measure_const: float = field(init=False)

    def __post_init__(self):
        nu = float(self.nu)
        if not np.isfinite(nu) or nu <= 0:
            raise ParameterError(f"nu must be a positive finite number, got {self.nu!r}")
        mu = nu - 0.5
        kc = 2.0**mu * special.gamma(mu + 1.0)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kernel_const", float(kc))
        object.__setattr__(self, "measure_const", float(1.0 / kc))
        object.__setattr__(self, "nu_form_kernel_const", float(2.0 ** (nu + 0.5) * special.gamma(nu + 0.5)))
        object.__setattr__(
            self, "nu_form_measure_const", float(1.0 / (2.0 ** (nu + 0.5) * special.gamma(nu + 1.5)))
        )

    @property
    def density_exponent(self) -> float:
        return 2.0 * self.mu + 1.0

    def density(self, t):
        """sigma-density at ``t`` (so that dsigma = density(t) dt)."""
        t = np.asarray(t, dtype=float)
        return self.measure_const * t**self.density_exponent

    def mass(self, r):
        """Closed form sigma-measure of (0, r]."""
        r = np.asarray(r, dtype=float)
        e = self.density_exponent + 1.0
        return self.measure_const * r**e / e

    def as_dict(self) -> dict:
        return {
            "nu": self.nu,
            "mu": self.mu,
            "kernel_const": self.kernel_const,
            "measure_const": self.measure_const,
            "nu_form_kernel_const": self.nu_form_kernel_const,
            "nu_form_measure_const": self.nu_form_measure_const,
        }


@dataclass(frozen=True)
class Segment:
    """A run of equal-log or equal-width panels on ``[r0, r1]``."""

    r0: float
    r1: float
    n_panels: int
    spacing: str = "log"

    def edges(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.r0, self.r1, self.n_panels + 1)
        return np.linspace(self.r0, self.r1, self.n_panels + 1)


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


class RadialGrid:
    """Composite Gauss quadrature on (0, r_max] for integrals against dsigma.

    The first panel is ``(0, r_min]`` and uses Gauss-Jacobi nodes for the
    weight ``t**(2mu+1)``, so the origin singularity of the density is
    integrated exactly. Every other panel is Gauss-Legendre with the density
    folded into the weights. Instances are immutable.
    """

    def __init__(self, params: MeasureParams, segments: Sequence[Segment], nodes_per_panel: int = 8):
        if nodes_per_panel < 2:
            raise ParameterError("nodes_per_panel must be >= 2")
        segments = tuple(segments)
        if not segments:
            raise ParameterError("at least one segment is required")
        prev = None
        for seg in segments:
            if seg.spacing not in ("log", "linear"):
                raise ParameterError(f"unknown spacing {seg.spacing!r}; expected 'log' or 'linear'")
            if not (0 < seg.r0 < seg.r1) or not np.isfinite(seg.r1):
                raise ParameterError(f"invalid range [{seg.r0}, {seg.r1}]: need 0 < r_min < r_max")
            if seg.n_panels < 1:
                raise ParameterError("n_panels must be >= 1")
            if prev is not None and not math.isclose(prev.r1, seg.r0, rel_tol=1e-14):
                raise ParameterError("segments must be contiguous")
            prev = seg
        self.params = params
        self.segments = segments
        self.nodes_per_panel = int(nodes_per_panel)
        n = self.nodes_per_panel
        mu = params.mu

        inner = [segments[0].edges()]
        for seg in segments[1:]:
            inner.append(seg.edges()[1:])
        edges = np.concatenate([[0.0], np.concatenate(inner)])
        n_pan = len(edges) - 1

        gl_s, gl_w = special.roots_legendre(n)
        gj_s, gj_w = special.roots_jacobi(n, 0.0, 2.0 * mu + 1.0)

        ref = np.tile(gl_s, (n_pan, 1))
        ref[0] = gj_s
        lo, hi = edges[:-1, None], edges[1:, None]
        half = 0.5 * (hi - lo)
        nodes = lo + half * (ref + 1.0)
        weights = half * gl_w[None, :] * params.density(nodes)
        r0 = edges[1]
        weights[0] = params.measure_const * (0.5 * r0) ** (2.0 * mu + 2.0) * gj_w

        bary = np.tile(_barycentric_weights(gl_s), (n_pan, 1))
        bary[0] = _barycentric_weights(gj_s)

        self.edges = edges
        self.nodes = nodes.ravel()
        self.weights = weights.ravel()
        self._ref = ref
        self._bary = bary
        for arr in (self.edges, self.nodes, self.weights, self._ref, self._bary):
            arr.setflags(write=False)

    @property
    def r_min(self) -> float:
        return float(self.segments[0].r0)

    @property
    def r_max(self) -> float:
        return float(self.segments[-1].r1)

    @property
    def n_panels(self) -> int:
        return len(self.edges) - 1

    def __len__(self) -> int:
        return self.nodes.size

    def __repr__(self) -> str:
        return f"RadialGrid(nu={self.params.nu}, n={len(self)}, r_max={self.r_max})"

    def same_as(self, other: "RadialGrid") -> bool:
        if self is other:
            return True
        return (
            isinstance(other, RadialGrid)
            and self.params == other.params
            and len(self) == len(other)
            and bool(np.array_equal(self.nodes, other.nodes))
        )

    def spec(self) -> dict:
        return {
            "nodes_per_panel": self.nodes_per_panel,
            "segments": [[s.r0, s.r1, s.n_panels, s.spacing] for s in self.segments],
        }

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def interpolate(self, values, points) -> np.ndarray:
        """Panel-wise polynomial interpolation of grid samples at ``points``.

        Points beyond ``r_max`` evaluate to 0 (the truncation convention).
        """
        values = np.asarray(values, dtype=float)
        pts = np.asarray(points, dtype=float)
        shape = pts.shape
        pts = pts.ravel()
        out = np.zeros(pts.size)
        inside = pts <= self.r_max
        if not inside.any():
            return out.reshape(shape)
        z = pts[inside]
        k = np.clip(np.searchsorted(self.edges, z, side="right") - 1, 0, self.n_panels - 1)
        lo, hi = self.edges[k], self.edges[k + 1]
        s = 2.0 * (z - lo) / (hi - lo) - 1.0
        ref = self._ref[k]
        bw = self._bary[k]
        v = values.reshape(self.n_panels, self.nodes_per_panel)[k]
        d = s[:, None] - ref
        exact = d == 0.0
        d[exact] = 1.0
        t = bw / d
        res = np.sum(t * v, axis=1) / np.sum(t, axis=1)
        hit = exact.any(axis=1)
        if hit.any():
            res[hit] = v[hit][exact[hit]]
        out[inside] = res
        return out.reshape(shape)

    def interpolation_matrix(self, points) -> "np.ndarray":
        """Sparse-by-construction row data (rows, cols, vals) for interpolation at points."""
        pts = np.asarray(points, dtype=float).ravel()
        n = self.nodes_per_panel
        inside = pts <= self.r_max
        idx = np.nonzero(inside)[0]
        z = pts[idx]
        k = np.clip(np.searchsorted(self.edges, z, side="right") - 1, 0, self.n_panels - 1)
        lo, hi = self.edges[k], self.edges[k + 1]
        s = 2.0 * (z - lo) / (hi - lo) - 1.0
        d = s[:, None] - self._ref[k]
        exact = d == 0.0
        d[exact] = 1.0
        t = self._bary[k] / d
        basis = t / np.sum(t, axis=1, keepdims=True)
        hit = exact.any(axis=1)
        if hit.any():
            basis[hit] = exact[hit].astype(float)
        cols = k[:, None] * n + np.arange(n)[None, :]
        rows = np.repeat(idx, n).reshape(-1, n)
        return rows, cols, basis


def build_composite_grid(params: MeasureParams, segments: Iterable, nodes_per_panel: int = 8) -> RadialGrid:
    segs = [s if isinstance(s, Segment) else Segment(*s) for s in segments]
    return RadialGrid(params, segs, nodes_per_panel)


def build_grid(
    params: MeasureParams,
    r_min: float,
    r_max: float,
    n_panels: int,
    nodes_per_panel: int = 8,
    spacing: str = "log",
) -> RadialGrid:
    """Single-segment composite grid on ``(0, r_max]`` with panels starting at ``r_min``."""
    if not (0 < r_min < r_max):
        raise ParameterError(f"need 0 < r_min < r_max, got r_min={r_min}, r_max={r_max}")
    return RadialGrid(params, [Segment(float(r_min), float(r_max), int(n_panels), spacing)], nodes_per_panel)


# Panel width on the middle segment caps x*t oscillation per panel for x up to r_max.
DEFAULT_SEGMENTS = (
    (1e-4, 0.5, 40, "log"),
    (0.5, 40.0, 220, "linear"),
)
# linear panels per unit length; 8-point panels of width 0.18 resolve j(x t) for x t <= 40 * 40
_LINEAR_DENSITY = 220 / 39.5


def default_grid(params: MeasureParams, r_max: float = 40.0, refine: float = 1) -> RadialGrid:
    """Log panels near the origin, uniform panels out to ``r_max``.

    ``refine`` multiplies every panel count. The uniform segment keeps its
    panel width when ``r_max`` changes.
    """
    lo, mid, n_log, _ = DEFAULT_SEGMENTS[0]
    if not r_max > mid:
        raise ParameterError(f"default grid needs r_max > {mid}")
    n_lin = _LINEAR_DENSITY * (float(r_max) - mid)
    segs = [
        Segment(lo, mid, max(1, int(round(n_log * refine))), "log"),
        Segment(mid, float(r_max), max(1, int(round(n_lin * refine))), "linear"),
    ]
    return RadialGrid(params, segs, 8)


class SampledFunction:
    """Real function values on the nodes of a :class:`RadialGrid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: RadialGrid, values):
        vals = np.array(values, dtype=float).ravel()
        if vals.size != len(grid):
            raise ShapeError(f"{vals.size} values for a grid of {len(grid)} nodes")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("sampled values must be finite")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals

    @classmethod
    def from_callable(cls, grid: RadialGrid, func: Callable) -> "SampledFunction":
        return cls(grid, func(grid.nodes))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "SampledFunction":
        return cls(grid, np.zeros(len(grid)))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"SampledFunction(n={len(self)}, max|f|={np.max(np.abs(self.values)):.3g})"

    def _check(self, other: "SampledFunction"):
        if not self.grid.same_as(other.grid):
            raise ShapeError("sampled functions live on different grids")

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return SampledFunction(self.grid, self.values + other.values)
        return SampledFunction(self.grid, self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return SampledFunction(self.grid, self.values - other.values)
        return SampledFunction(self.grid, self.values - float(other))

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return SampledFunction(self.grid, self.values * other.values)
        return SampledFunction(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return SampledFunction(self.grid, -self.values)

    def __call__(self, points):
        return self.grid.interpolate(self.values, points)

    # -- serialization -------------------------------------------------
    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("x,value\n")
        for x, v in zip(self.grid.nodes, self.values):
            buf.write(f"{x:.17g},{v:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_json_obj(self) -> dict:
        return {
            "schema": 1,
            "nu": self.grid.params.nu,
            "r_min": self.grid.r_min,
            "r_max": self.grid.r_max,
            "grid": self.grid.spec(),
            "nodes": self.grid.nodes.tolist(),
            "values": self.values.tolist(),
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_json_obj())
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, text: str, grid: RadialGrid | None = None) -> "SampledFunction":
        obj = json.loads(text)
        if grid is None:
            spec = obj.get("grid")
            if spec is None:
                raise ParameterError("JSON carries no grid spec; pass the grid explicitly")
            grid = build_composite_grid(MeasureParams(obj["nu"]), spec["segments"], spec["nodes_per_panel"])
        nodes = np.asarray(obj["nodes"], dtype=float)
        if nodes.size != len(grid) or not np.array_equal(nodes, grid.nodes):
            raise ShapeError("JSON nodes do not match the grid")
        return cls(grid, obj["values"])

    @classmethod
    def from_csv(cls, source, grid: RadialGrid) -> "SampledFunction":
        """Read ``x,value`` rows. Exact node matches are taken verbatim,
        otherwise the data are interpolated onto ``grid`` (zero outside)."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            text = Path(source).read_text()
        else:
            text = str(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["x", "value"]:
            raise ParameterError("CSV must start with header 'x,value'")
        try:
            data = np.array([[float(a), float(b)] for a, b in rows[1:] if a.strip()], dtype=float)
        except ValueError as exc:
            raise ParameterError(f"malformed CSV row: {exc}") from exc
        if data.size == 0:
            raise ParameterError("CSV contains no rows")
        x, v = data[:, 0], data[:, 1]
        if x.size == len(grid) and np.array_equal(x, grid.nodes):
            return cls(grid, v)
        order = np.argsort(x)
        x, v = x[order], v[order]
        vals = np.interp(grid.nodes, x, v, left=v[0], right=0.0)
        vals[grid.nodes > x[-1]] = 0.0
        return cls(grid, vals)


def lp_norm(f: SampledFunction, p: float = 2.0) -> float:
    """Weighted L^p norm; ``p = inf`` gives the sup over nodes."""
    p = float(p)
    if np.isnan(p) or p < 1:
        raise ParameterError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    m = a.max()
    if m == 0.0:
        return 0.0
    # scale out the max to keep |f|**p representable
    return float(m * np.dot(f.grid.weights, (a / m) ** p) ** (1.0 / p))


def inner_product(f: SampledFunction, g: SampledFunction) -> float:
    f._check(g)
    return float(np.dot(f.grid.weights, f.values * g.values))
