"""
Product measures and the quadratic map T_eps on finite point sets

A measure nu on the product of the two supports has generalized marginals
nu0_i = sum_j K_ij nu_ij and nu1_j = sum_i K_ij nu_ij, and T_eps sends nu to
the product measure nu0 x nu1. The Schroedinger system is
T_eps(alpha x beta) = mu0 x mu1, and its solution is computed with the
Sinkhorn solver. Product measures only have meaning as classes
{(c alpha, beta / c)}, so every comparison goes through the outer product.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from config import Config
from kernels import KernelOperator, apply_semigroup
from sinkhorn_core import (DivergenceError, Potentials, SolveConfig, SolveStatus,
                           sinkhorn_iterate)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProductMeasure:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.alpha) <= 0) or np.any(np.asarray(self.beta) <= 0):
            raise ValueError("product measure components must be strictly positive")

    def canonical(self) -> 'ProductMeasure':
        """Representative with sum(alpha) = sum(beta)"""
        c = np.sqrt(self.beta.sum() / self.alpha.sum())
        return ProductMeasure(self.alpha * c, self.beta / c)

    def outer(self) -> np.ndarray:
        return np.outer(self.alpha, self.beta)

    def same_class(self, other: 'ProductMeasure', rtol: float = 1e-8) -> bool:
        a, b = self.outer(), other.outer()
        return bool(np.max(np.abs(a - b)) <= rtol * np.max(np.abs(b)))


@dataclass(frozen=True, eq=False)
class GeneralMeasure:
    nu: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        if nu.ndim != 2 or np.any(nu < 0) or not np.any(nu > 0):
            raise ValueError("measure must be a non-negative matrix with positive mass")

    @classmethod
    def from_product(cls, pm: ProductMeasure) -> 'GeneralMeasure':
        return cls(pm.outer())


def generalized_marginals(nu: GeneralMeasure, K: KernelOperator):
    weighted = K.entries * nu.nu
    return weighted.sum(axis=1), weighted.sum(axis=0)


def t_epsilon_map(pm: ProductMeasure, K: KernelOperator) -> ProductMeasure:
    """T_eps(alpha x beta) = (alpha * K beta) x (beta * K^T alpha), canonicalized"""
    nu0 = pm.alpha * apply_semigroup(K, pm.beta)
    nu1 = pm.beta * apply_semigroup(K, pm.alpha, transpose=True)
    return ProductMeasure(nu0, nu1).canonical()


def invert_t_epsilon(mu0, mu1, K: KernelOperator, tol: float = 1e-12,
                     initial: Optional[Potentials] = None, max_iter: int = 100000) -> ProductMeasure:
    """Solve T_eps(alpha x beta) = mu0 x mu1 with the Sinkhorn solver"""
    mu0 = np.asarray(mu0, dtype=float)
    mu1 = np.asarray(mu1, dtype=float)
    if np.any(mu0 <= 0) or np.any(mu1 <= 0):
        raise ValueError("weights must be strictly positive")
    if abs(mu0.sum() - mu1.sum()) > Config.MASS_TOLERANCE * mu0.sum():
        raise ValueError("unbalanced problem")

    result = sinkhorn_iterate(K, mu0, mu1, SolveConfig(tol=tol, max_iter=max_iter), initial)
    if result.status is SolveStatus.DIVERGED:
        raise DivergenceError("Sinkhorn solve diverged while inverting T_eps")
    if result.status is SolveStatus.MAX_ITER:
        logger.warning("T_eps inversion stopped at max_iter with residual %.3e", result.residual)
    return ProductMeasure(result.scalings.a, result.scalings.b).canonical()


def log_kernel_integrability(mu0, mu1, K: KernelOperator) -> float:
    """sum_ij mu0_i mu1_j log K_ij"""
    return float(np.asarray(mu0, dtype=float) @ K.log_entries @ np.asarray(mu1, dtype=float))


def random_potentials(rng: np.random.Generator, K: KernelOperator, scale: float = 1.0) -> Potentials:
    return Potentials(scale * rng.standard_normal(K.shape[0]), scale * rng.standard_normal(K.shape[1]))


def _relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def roundtrip_error(mu0, mu1, K: KernelOperator, tol: float = 1e-12) -> float:
    """Relative gap between T_eps(T_eps^-1(mu0 x mu1)) and mu0 x mu1"""
    pm = invert_t_epsilon(mu0, mu1, K, tol)
    return _relative_gap(t_epsilon_map(pm, K).outer(), np.outer(mu0, mu1))


def uniqueness_error(mu0, mu1, K: KernelOperator, seed: int = 0, trials: int = None,
                     tol: float = 1e-12) -> float:
    """Largest relative gap between outer products from random-start inversions"""
    trials = trials or Config.BEURLING_TRIALS
    rng = np.random.default_rng(seed)
    outers = [invert_t_epsilon(mu0, mu1, K, tol, initial=random_potentials(rng, K)).outer()
              for _ in range(max(trials, 2))]
    return max(_relative_gap(o, outers[0]) for o in outers[1:])


def automorphism_error(K: KernelOperator, trials: int = 20, seed: int = 0, tol: float = 1e-12) -> float:
    """Worst relative gap of T_eps^-1(T_eps(alpha x beta)) against alpha x beta over random inputs"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        pm = ProductMeasure(rng.uniform(0.2, 2.0, K.shape[0]), rng.uniform(0.2, 2.0, K.shape[1])).canonical()
        image = t_epsilon_map(pm, K)
        back = invert_t_epsilon(image.alpha, image.beta, K, tol)
        worst = max(worst, _relative_gap(back.outer(), pm.outer()))
    return worst


def inversion_sensitivity(mu0, mu1, K: KernelOperator, rel: float = 1e-6, seed: int = 0,
                          tol: float = 1e-13) -> float:
    """Measured Lipschitz ratio of the inverse map under a relative perturbation of the data"""
    mu0 = np.asarray(mu0, dtype=float)
    mu1 = np.asarray(mu1, dtype=float)
    rng = np.random.default_rng(seed)
    p0 = mu0 * (1.0 + rel * rng.uniform(-1.0, 1.0, mu0.size))
    p1 = mu1 * (1.0 + rel * rng.uniform(-1.0, 1.0, mu1.size))
    p1 *= p0.sum() / p1.sum()
    base = invert_t_epsilon(mu0, mu1, K, tol).outer()
    moved = invert_t_epsilon(p0, p1, K, tol).outer()
    return _relative_gap(moved, base) / rel


def beurling_report(mu0, mu1, K: KernelOperator, seed: int = 0, tol: float = 1e-12) -> Dict:
    return {
        'roundtrip_err': roundtrip_error(mu0, mu1, K, tol),
        'uniqueness_err': uniqueness_error(mu0, mu1, K, seed=seed, tol=tol),
        'log_kernel_quantity': log_kernel_integrability(mu0, mu1, K),
        'continuity_constant': inversion_sensitivity(mu0, mu1, K, seed=seed),
    }
