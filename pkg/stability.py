"""
Linear stability of the Trotter-Euler splitting

The test equation x' = -x - (1-delta) y, y' = -(1-delta) x - y is discretized
exactly like splitting_step: x first, then y with the updated x. Near a fixed
point of the transport flow the linearized splitting decouples, in the
singular basis of the normalized coupling, into copies of this test equation
with 1 - delta equal to a singular value; the top singular value 1 carries the
gauge direction (eigenvalue 1) and the total-mass direction ((1-h)^2).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from config import Config
from problem import ProblemInstance
from sinkhorn_core import Potentials, SolveConfig, entropic_plan, solve, splitting_step

logger = logging.getLogger(__name__)


@dataclass
class StabilityReport:
    delta: float
    h_values: np.ndarray
    radii: np.ndarray
    eig_abs: np.ndarray  # (len(h_values), 2), sorted descending
    eig_phase: np.ndarray
    h_optimal: float
    radius_optimal: float
    h_unstable_onset: Optional[float]
    notes: List[str] = field(default_factory=list)

    def rows(self):
        return [(h, r, e[0], e[1]) for h, r, e in zip(self.h_values, self.radii, self.eig_abs)]

    def summary(self) -> dict:
        return {
            'delta': self.delta,
            'h_optimal': self.h_optimal,
            'radius_optimal': self.radius_optimal,
            'h_unstable_onset': self.h_unstable_onset,
        }


def test_equation_flow_map(h: float, delta: float) -> np.ndarray:
    """Flow map of one sequential Trotter-Euler step on the 2x2 test equation"""
    if h < 0:
        raise ValueError("h must be non-negative")
    c = h * (1.0 - delta)
    return np.array([
        [1.0 - h, -c],
        [-c * (1.0 - h), (1.0 - h) + c * c],
    ])


test_equation_flow_map.__test__ = False


def eigenvalues(M) -> Tuple[complex, complex]:
    """Roots of the characteristic polynomial lambda^2 - tr lambda + det"""
    M = np.asarray(M, dtype=float)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    root = np.emath.sqrt(tr * tr - 4.0 * det)
    return complex((tr + root) / 2.0), complex((tr - root) / 2.0)


def spectral_radius(M) -> float:
    M = np.asarray(M, dtype=float)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0:
        # complex pair: |lambda|^2 = det
        return math.sqrt(det)
    root = math.sqrt(disc)
    return max(abs(tr + root), abs(tr - root)) / 2.0


def _radius(h: float, delta: float) -> float:
    return spectral_radius(test_equation_flow_map(h, delta))


def scan_stability(delta: float, h_min: float, h_max: float, steps: int) -> StabilityReport:
    """Spectral radius over a grid of step sizes, optimal step and instability onset"""
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    if not 0 <= h_min < h_max:
        raise ValueError("need 0 <= h_min < h_max")
    if steps < 2:
        raise ValueError("steps must be at least 2")

    h_values = np.linspace(h_min, h_max, steps)
    radii = np.empty(steps)
    eig_abs = np.empty((steps, 2))
    eig_phase = np.empty((steps, 2))
    for i, h in enumerate(h_values):
        M = test_equation_flow_map(h, delta)
        radii[i] = spectral_radius(M)
        pair = sorted(eigenvalues(M), key=abs, reverse=True)
        eig_abs[i] = [abs(z) for z in pair]
        eig_phase[i] = [math.atan2(z.imag, z.real) for z in pair]

    notes = []
    h_optimal, radius_optimal = _refine_minimum(h_values, radii, delta, notes)
    h_unstable_onset = _locate_onset(h_values, radii, delta, notes)

    logger.info("stability delta=%g: h_optimal=%.4f (radius %.4f), onset=%s",
                delta, h_optimal, radius_optimal, h_unstable_onset)
    return StabilityReport(delta, h_values, radii, eig_abs, eig_phase,
                           h_optimal, radius_optimal, h_unstable_onset, notes)


def _refine_minimum(h_values, radii, delta, notes) -> Tuple[float, float]:
    i = int(np.argmin(radii))
    if i == 0 or i == len(h_values) - 1:
        notes.append("minimum on the grid boundary; golden-section refinement skipped")
        return float(h_values[i]), float(radii[i])
    bracket = (h_values[i - 1], h_values[i], h_values[i + 1])
    try:
        result = minimize_scalar(lambda h: _radius(h, delta), bracket=bracket, method='golden',
                                 tol=Config.GOLDEN_SECTION_TOL / max(h_values[i], 1.0))
    except ValueError as e:
        notes.append(f"golden-section refinement failed: {e}")
        return float(h_values[i]), float(radii[i])
    if result.fun <= radii[i]:
        return float(result.x), float(result.fun)
    return float(h_values[i]), float(radii[i])


def _locate_onset(h_values, radii, delta, notes) -> Optional[float]:
    unstable = np.nonzero((radii >= 1.0) & (h_values > 0))[0]
    if unstable.size == 0:
        notes.append("no unstable step size on the grid")
        return None
    j = int(unstable[0])
    if j == 0 or h_values[j - 1] <= 0:
        return float(h_values[j])
    lo, hi = float(h_values[j - 1]), float(h_values[j])
    return float(bisect(lambda h: _radius(h, delta) - 1.0, lo, hi, xtol=1e-9))


def matched_delta(problem: ProblemInstance, plan: np.ndarray = None) -> float:
    """delta = 1 - s2 for the second singular value s2 of the normalized optimal coupling"""
    if plan is None:
        result = solve(problem, SolveConfig(tol=1e-12, max_iter=100000))
        plan = entropic_plan(result.scalings, problem.kernel)
    normalized = plan / np.sqrt(plan.sum(axis=1))[:, None] / np.sqrt(plan.sum(axis=0))[None, :]
    s = np.linalg.svd(normalized, compute_uv=False)
    if s.size < 2:
        return 1.0
    return float(1.0 - s[1])


def splitting_jacobian_radius(problem: ProblemInstance, h: float, step: float = 1e-6) -> float:
    """Spectral radius of the splitting Jacobian at the fixed point, gauge direction removed"""
    K, mass0, mass1 = problem.kernel, problem.mass0, problem.mass1
    fixed = solve(problem, SolveConfig(tol=1e-12, max_iter=100000)).potentials
    n0 = K.shape[0]
    y0 = fixed.stacked()

    def step_map(y):
        out = splitting_step(Potentials(y[:n0], y[n0:]), K, mass0, mass1, h)
        return out.stacked()

    n = y0.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        J[:, j] = (step_map(y0 + e) - step_map(y0 - e)) / (2.0 * step)

    gauge = np.concatenate([np.ones(n0), -np.ones(n - n0)])
    gauge /= np.linalg.norm(gauge)
    Q = np.eye(n) - np.outer(gauge, gauge)
    return float(np.max(np.abs(np.linalg.eigvals(Q @ J @ Q))))
