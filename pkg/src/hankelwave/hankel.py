"""Dense-quadrature Hankel transform on composite grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ResolutionError, ShapeError
from .kernels import kernel_j
from .measure import MeasureParams, RadialGrid, SampledFunction, inner_product

__all__ = ["HankelPlan", "plan", "forward", "inverse", "parseval_residual", "OSCILLATION_BUDGET"]

# periods of j(x t) across the grid, max(out) * r_max / (2 pi)
OSCILLATION_BUDGET = 1000.0
# nodes needed per period for 8-point panels to stay near 1e-10
_NODES_PER_PERIOD = 6


@dataclass(frozen=True, eq=False)
class HankelPlan:
    """Precomputed ``j(x_i t_j) w_j`` so a transform is one matrix product."""

    params: MeasureParams
    input_grid: RadialGrid
    output_grid: RadialGrid
    kernel_matrix: np.ndarray

    @property
    def shape(self):
        return self.kernel_matrix.shape

    @property
    def symmetric(self) -> bool:
        return self.input_grid.same_as(self.output_grid)

    def apply(self, values, transpose: bool = False) -> np.ndarray:
        """Raw matrix application. ``transpose=True`` maps output-grid samples
        back to the input grid using the same kernel (the transform is an
        involution, so only the quadrature weights change sides)."""
        if not transpose:
            return self.kernel_matrix @ values
        return self._reverse @ values

    @property
    def _reverse(self) -> np.ndarray:
        rev = self.__dict__.get("_rev")
        if rev is None:
            if self.symmetric:
                rev = self.kernel_matrix
            else:
                rev = kernel_matrix(self.params, self.input_grid.nodes, self.output_grid.nodes, self.output_grid.weights)
            rev.setflags(write=False)
            object.__setattr__(self, "_rev", rev)
        return rev


def kernel_matrix(params: MeasureParams, out_nodes, in_nodes, in_weights) -> np.ndarray:
    z = np.multiply.outer(np.asarray(out_nodes, float), np.asarray(in_nodes, float))
    return kernel_j(params, z) * np.asarray(in_weights, float)[None, :]


def plan(params: MeasureParams, in_grid: RadialGrid, out_grid: RadialGrid | None = None) -> HankelPlan:
    """Build a reusable transform from ``in_grid`` samples to ``out_grid`` samples."""
    out_grid = in_grid if out_grid is None else out_grid
    for g in (in_grid, out_grid):
        if g.params != params:
            raise ParameterError("grid was built for a different nu")
    periods = out_grid.r_max * in_grid.r_max / (2.0 * math.pi)
    if periods > OSCILLATION_BUDGET:
        need = int(math.ceil(periods * _NODES_PER_PERIOD))
        raise ResolutionError(
            f"kernel spans {periods:.0f} periods (budget {OSCILLATION_BUDGET:.0f}); "
            f"this needs about {need} input nodes, reduce r_max or the output range"
        )
    mat = kernel_matrix(params, out_grid.nodes, in_grid.nodes, in_grid.weights)
    mat.setflags(write=False)
    return HankelPlan(params, in_grid, out_grid, mat)


def forward(p: HankelPlan, f: SampledFunction) -> SampledFunction:
    if not f.grid.same_as(p.input_grid):
        raise ShapeError("function is not sampled on the plan's input grid")
    return SampledFunction(p.output_grid, p.kernel_matrix @ f.values)


def inverse(p: HankelPlan, fhat: SampledFunction) -> SampledFunction:
    """Inverse transform. Same kernel as :func:`forward`; on an asymmetric
    plan it maps output-grid spectra back to the input grid."""
    if fhat.grid.same_as(p.input_grid) and p.symmetric:
        return SampledFunction(p.input_grid, p.kernel_matrix @ fhat.values)
    if not fhat.grid.same_as(p.output_grid):
        raise ShapeError("spectrum is not sampled on the plan's output grid")
    return SampledFunction(p.input_grid, p.apply(fhat.values, transpose=True))


def parseval_residual(p: HankelPlan, f: SampledFunction, g: SampledFunction, eps: float = 1e-300):
    """Relative Parseval defect ``|<f^, g^> - <f, g>| / max(|<f, g>|, eps)``.

    Returns ``(relative, raw_difference)``.
    """
    direct = inner_product(f, g)
    spectral = inner_product(forward(p, f), forward(p, g))
    raw = abs(spectral - direct)
    return raw / max(abs(direct), eps), raw
