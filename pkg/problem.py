"""
Discrete transport problems: atomic marginals on a domain plus a diffusivity

Pairing convention: the scaling a lives on the support of mu0 and enforces
a * (K b) = mass0; b lives on the support of mu1 and enforces
b * (K^T a) = mass1. With rho0 = sum p_i delta_{x_i} and
rho1 = sum q_i delta_{y_i}, the f-equation carries log p and the
g-equation log q.
"""
import json
import logging
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Dict

import numpy as np

from config import Config
from kernels import DomainSpec, KernelOperator, as_points, build_kernel_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def create(cls, points, weights, dim: int) -> 'AtomicMeasure':
        pts = as_points(points, dim)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != pts.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {w.shape[0]} weights")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        return cls(pts, w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def to_dict(self) -> Dict:
        return {'points': self.points.tolist(), 'weights': self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    domain: DomainSpec
    mu0: AtomicMeasure
    mu1: AtomicMeasure
    epsilon: float

    @property
    def xs(self) -> np.ndarray:
        return self.mu0.points

    @property
    def ys(self) -> np.ndarray:
        return self.mu1.points

    @property
    def mass0(self) -> np.ndarray:
        return self.mu0.weights

    @property
    def mass1(self) -> np.ndarray:
        return self.mu1.weights

    @cached_property
    def kernel(self) -> KernelOperator:
        return build_kernel_matrix(self.domain, self.epsilon, self.xs, self.ys)

    def reversed(self) -> 'ProblemInstance':
        """The same problem with the two marginals swapped"""
        return ProblemInstance(self.domain, self.mu1, self.mu0, self.epsilon)

    def to_dict(self) -> Dict:
        return {
            'domain': self.domain.to_dict(),
            'epsilon': self.epsilon,
            'mu0': self.mu0.to_dict(),
            'mu1': self.mu1.to_dict(),
        }


def validate_problem(domain: DomainSpec, mu0, mu1, epsilon: float) -> ProblemInstance:
    """Check positivity, balance and regularization; weights are never renormalized"""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")

    measures = []
    for mu in (mu0, mu1):
        if isinstance(mu, AtomicMeasure):
            mu = AtomicMeasure.create(mu.points, mu.weights, domain.dim)
        else:
            mu = AtomicMeasure.create(mu['points'], mu['weights'], domain.dim)
        measures.append(mu)
    mu0, mu1 = measures

    mass0, mass1 = mu0.total_mass, mu1.total_mass
    if abs(mass0 - mass1) > Config.MASS_TOLERANCE * mass0:
        raise ValueError(f"unbalanced problem: total masses {mass0!r} and {mass1!r}")

    return ProblemInstance(domain, mu0, mu1, float(epsilon))


def random_instance(seed: int, n: int, domain: DomainSpec, epsilon: float) -> ProblemInstance:
    """Uniform points in the unit box (or torus cell), positive weights of total mass 1"""
    if n < 1:
        raise ValueError("N must be at least 1")
    rng = np.random.default_rng(seed)
    lower, upper = domain.cell_bounds()

    def draw():
        points = lower + (upper - lower) * rng.random((n, domain.dim))
        weights = rng.uniform(0.5, 1.5, size=n)
        return AtomicMeasure(points, weights / weights.sum())

    mu0 = draw()
    mu1 = draw()
    return validate_problem(domain, mu0, mu1, epsilon)


def domain_from_dict(data: Dict) -> DomainSpec:
    kind = data.get('kind', 'Euclidean')
    dim = int(data.get('dim', len(data.get('periods', [])) or 1))
    periods = tuple(data.get('periods', ()))
    image_count = int(data.get('image_count', Config.TORUS_IMAGE_COUNT))
    return DomainSpec(kind, dim, periods, image_count)


def problem_from_dict(data: Dict, seed: int = 0) -> ProblemInstance:
    """Build a problem from the JSON schema; {"random": {"n": N}} draws the marginals"""
    domain = domain_from_dict(data.get('domain', {}))
    if 'epsilon' not in data:
        raise ValueError("missing field 'epsilon'")
    epsilon = float(data['epsilon'])

    if 'random' in data:
        n = int(data['random'].get('n', 1))
        seed = int(data['random'].get('seed', seed))
        return random_instance(seed, n, domain, epsilon)

    for key in ('mu0', 'mu1'):
        if key not in data:
            raise ValueError(f"missing field '{key}'")
    return validate_problem(domain, data['mu0'], data['mu1'], epsilon)


def problem_to_dict(problem: ProblemInstance) -> Dict:
    return problem.to_dict()


def load_config(path: str) -> Dict:
    if not os.path.exists(path):
        raise FileNotFoundError(f"config not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def load_problem(path: str, seed: int = 0) -> ProblemInstance:
    problem = problem_from_dict(load_config(path), seed=seed)
    logger.info("loaded problem from %s: N0=%d N1=%d eps=%g",
                path, problem.mu0.size, problem.mu1.size, problem.epsilon)
    return problem
