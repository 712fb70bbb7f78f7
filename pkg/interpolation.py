"""
Entropic interpolation from converged scalings

The two heat flows a_t = exp(t eps Laplacian) a and b_t = exp((1-t) eps Laplacian) b
of the atomic scalings meet in the interior density rho_t = a_t * b_t.
Only rho_t is exposed: a_t and b_t are individually defined up to a
time-dependent gauge factor, their product is not.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from config import Config
from kernels import DomainSpec, build_kernel_matrix
from problem import ProblemInstance

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EvaluationGrid:
    """Uniform midpoint grid on a box, 1-D or 2-D"""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    cells: Tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lower) == len(self.upper) == len(self.cells)) or len(self.cells) not in (1, 2):
            raise ValueError("grid must be 1-D or 2-D with matching bounds")
        if any(u <= l for l, u in zip(self.lower, self.upper)) or any(c < 1 for c in self.cells):
            raise ValueError("grid bounds must be increasing and cells positive")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / np.array(self.cells)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self):
        return [l + (np.arange(c) + 0.5) * d
                for l, c, d in zip(self.lower, self.cells, self.spacing)]

    @property
    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing='ij')
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def integrate(self, values) -> float:
        return float(np.sum(values) * self.cell_volume)

    @classmethod
    def parse(cls, text: str) -> 'EvaluationGrid':
        """'lo:hi:n' per axis, axes separated by commas"""
        lower, upper, cells = [], [], []
        for axis in text.split(','):
            parts = axis.strip().split(':')
            if len(parts) != 3:
                raise ValueError(f"bad grid axis {axis!r}; expected lo:hi:n")
            lower.append(float(parts[0]))
            upper.append(float(parts[1]))
            cells.append(int(parts[2]))
        return cls(tuple(lower), tuple(upper), tuple(cells))


def default_grid(problem: ProblemInstance, cells: int = None) -> EvaluationGrid:
    """Point bounding box padded by GRID_PADDING_WIDTHS * sqrt(2 eps); the fundamental cell on a torus"""
    cells = cells or Config.GRID_CELLS
    if problem.domain.is_torus:
        lower, upper = problem.domain.cell_bounds()
        return EvaluationGrid(tuple(lower.tolist()), tuple(upper.tolist()), (cells,) * problem.domain.dim)
    pts = np.vstack([problem.xs, problem.ys])
    pad = Config.GRID_PADDING_WIDTHS * math.sqrt(2.0 * problem.epsilon)
    lower = tuple(float(v) for v in pts.min(axis=0) - pad)
    upper = tuple(float(v) for v in pts.max(axis=0) + pad)
    return EvaluationGrid(lower, upper, (cells,) * problem.domain.dim)


@dataclass(frozen=True, eq=False)
class BridgeDensity:
    times: np.ndarray
    grid: EvaluationGrid
    values: np.ndarray  # (len(times), number of grid points)
    epsilon: float

    def masses(self) -> np.ndarray:
        return np.array([self.grid.integrate(row) for row in self.values])

    def rows(self):
        pts = self.grid.points
        for t, row in zip(self.times, self.values):
            for p, rho in zip(pts, row):
                yield (t, *p, rho)


def evolve_scaling(weights, source_points, t_eps: float, grid: EvaluationGrid,
                   domain: DomainSpec) -> np.ndarray:
    """(exp(t_eps Laplacian) a)(x) = sum_i a_i K_{t_eps}(x, x_i) on the grid points"""
    if t_eps <= 0:
        raise ValueError("atomic scaling not pointwise evaluable at t_eps = 0")
    if grid.dim != domain.dim:
        raise ValueError("grid and domain dimensions differ")
    K = build_kernel_matrix(domain, t_eps, grid.points, source_points)
    return K.entries @ np.asarray(weights, dtype=float)


def bridge_density(S, problem: ProblemInstance, times: Sequence[float],
                   grid: EvaluationGrid = None) -> BridgeDensity:
    """rho_t = (exp(t eps Laplacian) a) (exp((1-t) eps Laplacian) b) for interior times"""
    times = np.asarray(list(times), dtype=float)
    if times.size == 0:
        raise ValueError("no times given")
    if np.any(times <= 0) or np.any(times >= 1):
        raise ValueError("bridge times must lie in the open interval (0, 1)")
    grid = grid or default_grid(problem)
    eps = problem.epsilon

    values = np.empty((times.size, grid.points.shape[0]))
    for k, t in enumerate(times):
        forward = evolve_scaling(S.a, problem.xs, t * eps, grid, problem.domain)
        backward = evolve_scaling(S.b, problem.ys, (1.0 - t) * eps, grid, problem.domain)
        values[k] = forward * backward
    logger.info("bridge density on %d grid points at %d times", grid.points.shape[0], times.size)
    return BridgeDensity(times, grid, values, eps)
