"""Hankel translation and convolution, direct (quadrature) and spectral."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ParameterError, ShapeError
from .hankel import HankelPlan, forward, inverse, plan as make_plan
from .kernels import DKernelCalibration, kernel_j, support_rule
from .measure import RadialGrid, SampledFunction

__all__ = [
    "TranslationOperator",
    "translation_operator",
    "translate",
    "translate_spectral",
    "convolve",
    "spectral_convolve",
]


def _check_shift(grid: RadialGrid, y: float):
    if not (0.0 < y < grid.r_max):
        raise ParameterError(f"shift y={y} must lie in (0, r_max={grid.r_max})")


@dataclass(frozen=True, eq=False)
class TranslationOperator:
    """tau_y as a sparse matrix on one grid: quadrature weights times interpolation."""

    cal: DKernelCalibration
    y: float
    grid: RadialGrid
    row_weights: sparse.csr_matrix

    def __call__(self, f: SampledFunction) -> SampledFunction:
        if not f.grid.same_as(self.grid):
            raise ShapeError("function is not on the operator's grid")
        return SampledFunction(self.grid, self.row_weights @ f.values)

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.row_weights.sum(axis=1)).ravel()

    def untruncated_rows(self) -> np.ndarray:
        """Rows whose whole support [|x-y|, x+y] lies inside the grid."""
        return self.grid.nodes + self.y <= self.grid.r_max


def translation_operator(cal: DKernelCalibration, grid: RadialGrid, y: float, order: int | None = None):
    _check_shift(grid, y)
    z, W = support_rule(cal.params, grid.nodes, y, order or cal.order)
    n, m = z.shape
    rows, cols, basis = grid.interpolation_matrix(z.ravel())
    wflat = (cal.constant * W).ravel()
    point = rows[:, 0]
    vals = basis * wflat[point][:, None]
    mat = sparse.coo_matrix((vals.ravel(), (point.repeat(grid.nodes_per_panel) // m, cols.ravel())), shape=(n, n))
    return TranslationOperator(cal, float(y), grid, mat.tocsr())


def _translate_values(cal: DKernelCalibration, grid: RadialGrid, values, x, y, order):
    z, W = support_rule(cal.params, x, y, order)
    return cal.constant * np.sum(W * grid.interpolate(values, z), axis=-1)


def translate(cal: DKernelCalibration, f: SampledFunction, y: float, order: int | None = None) -> SampledFunction:
    """``(tau_y f)(x_i)`` by Gauss-Jacobi quadrature over the triangle support.

    ``f`` is evaluated off-grid through panel interpolation and is taken as
    zero beyond ``r_max``.
    """
    _check_shift(f.grid, y)
    vals = _translate_values(cal, f.grid, f.values, f.grid.nodes, float(y), order or cal.order)
    return SampledFunction(f.grid, vals)


def translate_spectral(p: HankelPlan, f: SampledFunction, y: float) -> SampledFunction:
    """tau_y f through the transform: multiply by j(y w) and invert."""
    _check_shift(f.grid, y)
    fh = forward(p, f)
    return inverse(p, SampledFunction(fh.grid, fh.values * kernel_j(p.params, y * fh.grid.nodes)))


def _direct_convolve(cal, f: SampledFunction, g: SampledFunction, order: int, chunk: int = 16):
    grid = f.grid
    w = grid.weights * g.values
    scale = np.max(np.abs(w)) if w.size else 0.0
    if scale == 0.0:
        return np.zeros(len(grid))
    active = np.nonzero(np.abs(w) > 1e-18 * scale)[0]
    x = grid.nodes
    acc = np.zeros(len(grid))
    for start in range(0, active.size, chunk):
        idx = active[start : start + chunk]
        ys = grid.nodes[idx]
        # (chunk, N) translated values, row k is tau_{y_k} f on the grid
        tv = _translate_values(cal, grid, f.values, x[None, :], ys[:, None], order)
        acc += w[idx] @ tv
    return acc


def convolve(
    cal: DKernelCalibration,
    f: SampledFunction,
    g: SampledFunction,
    path: str = "spectral",
    plan: HankelPlan | None = None,
    order: int | None = None,
) -> SampledFunction:
    """Hankel convolution ``(f # g)(x) = int tau_y f(x) g(y) dsigma(y)``.

    ``path='direct'`` does the nested quadrature (O(N^2 m)); ``'spectral'``
    multiplies transforms.
    """
    if not f.grid.same_as(g.grid):
        raise ShapeError("convolution operands live on different grids")
    if path == "direct":
        return SampledFunction(f.grid, _direct_convolve(cal, f, g, order or cal.order))
    if path == "spectral":
        p = plan if plan is not None else make_plan(f.grid.params, f.grid)
        return spectral_convolve(p, f, g)
    raise ParameterError(f"unknown convolution path {path!r}")


def spectral_convolve(p: HankelPlan, f: SampledFunction, g: SampledFunction) -> SampledFunction:
    if not f.grid.same_as(g.grid):
        raise ShapeError("convolution operands live on different grids")
    fh, gh = forward(p, f), forward(p, g)
    return inverse(p, SampledFunction(fh.grid, fh.values * gh.values))
