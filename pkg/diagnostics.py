"""
Information functionals and flow diagnostics

Coupling mass C = sum a (K b) and its rate along the a-b flow, relative
entropy and the Fisher-Rao metric on positive vectors, the half-flow
functionals F1, F2 whose Fisher-Rao gradient flows are the two halves of
the Sinkhorn flow, the almost-linear operator T_eps, and entropy / Fisher
information of densities on uniform 1-D grids.
"""
import logging
from dataclasses import replace
from typing import TYPE_CHECKING, List, Tuple

import numpy as np
from scipy.special import logsumexp

from kernels import KernelOperator, apply_semigroup, log_apply_semigroup

if TYPE_CHECKING:
    from sinkhorn_core import Potentials, Scalings

logger = logging.getLogger(__name__)


def _xlogy_ratio(sigma: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """sigma * log(sigma / ref) with 0 log 0 = 0"""
    out = np.zeros_like(sigma, dtype=float)
    pos = sigma > 0
    out[pos] = sigma[pos] * np.log(sigma[pos] / ref[pos])
    return out


def _marginals(S: 'Scalings', K: KernelOperator) -> Tuple[np.ndarray, np.ndarray]:
    sigma0 = S.a * apply_semigroup(K, S.b)
    sigma1 = S.b * apply_semigroup(K, S.a, transpose=True)
    return sigma0, sigma1


def coupling_mass(S: 'Scalings', K: KernelOperator) -> float:
    """C = sum_i a_i (K b)_i"""
    return float(S.a @ apply_semigroup(K, S.b))


def coupling_mass_derivative(S: 'Scalings', K: KernelOperator, mass0, mass1) -> float:
    """dC/ds along the unsplit a-b flow"""
    sigma0, sigma1 = _marginals(S, K)
    return float(-np.sum(sigma0 * np.log(sigma0 / mass0)) - np.sum(sigma1 * np.log(sigma1 / mass1)))


def log_domain_summary(P: 'Potentials', K: KernelOperator, mass0, mass1) -> Tuple[float, float, float]:
    """(C, F1, F2) from potentials, never forming exp(f) or exp(g) on their own

    Overflowing marginals give inf / nan entries instead of an exception.
    """
    log_sigma0 = P.f + log_apply_semigroup(K, P.g)
    log_sigma1 = P.g + log_apply_semigroup(K, P.f, transpose=True)
    with np.errstate(over='ignore', invalid='ignore'):
        c = float(np.exp(logsumexp(log_sigma0)))
        f1 = _log_relative_entropy(log_sigma0, mass0)
        f2 = _log_relative_entropy(log_sigma1, mass1)
    return c, f1, f2


def _log_relative_entropy(log_sigma: np.ndarray, ref) -> float:
    """Mass-corrected relative entropy with sigma given by its logarithm"""
    sigma = np.exp(log_sigma)
    ref = np.asarray(ref, dtype=float)
    return float(np.sum(sigma * (log_sigma - np.log(ref)) - sigma + ref))


def relative_entropy(sigma, ref, mass_corrected: bool = False) -> float:
    """H_ref(sigma) = sum sigma log(sigma / ref), optionally plus sum(ref - sigma)"""
    sigma = np.asarray(sigma, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if sigma.shape != ref.shape:
        raise ValueError("length mismatch")
    if np.any(ref <= 0):
        raise ValueError("reference must be strictly positive")
    if np.any(sigma < 0):
        raise ValueError("sigma must be non-negative")
    value = float(np.sum(_xlogy_ratio(sigma, ref)))
    if mass_corrected:
        value += float(np.sum(ref) - np.sum(sigma))
    return value


def fisher_rao_norm(delta_sigma, sigma) -> float:
    """sum delta_sigma^2 / sigma"""
    delta_sigma = np.asarray(delta_sigma, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if delta_sigma.shape != sigma.shape:
        raise ValueError("length mismatch")
    if np.any(sigma <= 0):
        raise ValueError("sigma must be strictly positive")
    return float(np.sum(delta_sigma ** 2 / sigma))


def half_flow_functionals(S: 'Scalings', K: KernelOperator, mass0, mass1) -> Tuple[float, float]:
    """(F1, F2) = relative entropies of a (K b) to mass0 and of b (K^T a) to mass1"""
    sigma0, sigma1 = _marginals(S, K)
    return (relative_entropy(sigma0, mass0, mass_corrected=True),
            relative_entropy(sigma1, mass1, mass_corrected=True))


def half_flow_velocity(S: 'Scalings', K: KernelOperator, mass0, mass1, frozen: str = 'b') -> np.ndarray:
    """da/ds with b frozen (or db/ds with a frozen)"""
    if frozen == 'b':
        return -S.a * np.log(S.a * apply_semigroup(K, S.b) / mass0)
    if frozen == 'a':
        return -S.b * np.log(S.b * apply_semigroup(K, S.a, transpose=True) / mass1)
    raise ValueError("frozen must be 'a' or 'b'")


def fisher_rao_dissipation(S: 'Scalings', K: KernelOperator, mass0, mass1, frozen: str = 'b') -> float:
    """Fisher-Rao norm of the half-flow velocity, i.e. -dF/ds along that half flow"""
    velocity = half_flow_velocity(S, K, mass0, mass1, frozen)
    if frozen == 'b':
        kb = apply_semigroup(K, S.b)
        return fisher_rao_norm(velocity * kb, S.a * kb)
    ka = apply_semigroup(K, S.a, transpose=True)
    return fisher_rao_norm(velocity * ka, S.b * ka)


def half_flow(S: 'Scalings', K: KernelOperator, mass0, mass1, ds: float, steps: int,
              frozen: str = 'b') -> Tuple['Scalings', List[float]]:
    """Explicit Euler on one half of the flow; returns the end state and the functional history"""
    if not ds > 0:
        raise ValueError("ds must be positive")
    index = 0 if frozen == 'b' else 1
    history = [half_flow_functionals(S, K, mass0, mass1)[index]]
    for _ in range(steps):
        velocity = half_flow_velocity(S, K, mass0, mass1, frozen)
        if frozen == 'b':
            S = replace(S, a=S.a + ds * velocity)
        else:
            S = replace(S, b=S.b + ds * velocity)
        history.append(half_flow_functionals(S, K, mass0, mass1)[index])
    return S, history


def t_eps_operator(K: KernelOperator, f) -> np.ndarray:
    """T_eps(f) = log(exp(-f) K~ exp(f)) with K~ the row-normalized kernel"""
    f = np.asarray(f, dtype=float)
    if K.shape[0] != K.shape[1]:
        raise ValueError("T_eps needs a kernel on a single point set")
    return log_apply_semigroup(K.row_normalized(), f) - f


def grid_entropy(density, cell_volume: float) -> float:
    """E = integral of rho log rho by the midpoint rule"""
    density = np.asarray(density, dtype=float)
    if np.any(density <= 0):
        raise ValueError("density must be strictly positive")
    return float(np.sum(density * np.log(density)) * cell_volume)


def grid_fisher_information(density, grid_spacing: float, periodic: bool = False) -> float:
    """I = 1/2 integral |grad rho|^2 / rho on a uniform 1-D grid"""
    density = np.asarray(density, dtype=float)
    if np.any(density <= 0):
        raise ValueError("density must be strictly positive")
    if periodic:
        grad = (np.roll(density, -1) - np.roll(density, 1)) / (2.0 * grid_spacing)
    else:
        grad = np.gradient(density, grid_spacing)
    return float(0.5 * np.sum(grad ** 2 / density) * grid_spacing)


def periodic_heat_flow(density, grid_spacing: float, t: float, diffusivity: float = 0.5) -> np.ndarray:
    """Exact solution of rho_t = diffusivity * rho_xx on a periodic grid, via FFT"""
    density = np.asarray(density, dtype=float)
    k = 2.0 * np.pi * np.fft.rfftfreq(density.size, d=grid_spacing)
    return np.fft.irfft(np.fft.rfft(density) * np.exp(-diffusivity * k ** 2 * t), n=density.size)


def entropy_dissipation(density, grid_spacing: float, t0: float, dt: float,
                        diffusivity: float = 0.5) -> Tuple[float, float]:
    """(dE/dt, I) at time t0 of the periodic heat flow started from `density`

    dE/dt is a centred difference in time; along rho_t = kappa rho_xx one has
    dE/dt = -2 kappa I, so the default kappa = 1/2 makes the rate equal -I.
    """
    if dt <= 0 or t0 < 0.5 * dt:
        raise ValueError("need dt > 0 and t0 >= dt / 2")
    before = periodic_heat_flow(density, grid_spacing, t0 - 0.5 * dt, diffusivity)
    after = periodic_heat_flow(density, grid_spacing, t0 + 0.5 * dt, diffusivity)
    now = periodic_heat_flow(density, grid_spacing, t0, diffusivity)
    rate = (grid_entropy(after, grid_spacing) - grid_entropy(before, grid_spacing)) / dt
    return rate, grid_fisher_information(now, grid_spacing, periodic=True)
