"""
Heat kernels, kernel matrices and the discrete heat semigroup

Kernels follow the diffusivity convention

    K_eps(x, y) = (4 pi eps)^(-n/2) exp(-|x - y|^2 / (4 eps))

so the Gaussian has variance 2 eps per coordinate. The machine-learning
convention exp(-|x - y|^2 / reg) corresponds to reg = 4 eps (up to the
prefactor, which only rescales the Sinkhorn scalings); see ml_regularization.

On the flat torus the kernel is the periodized Gaussian, truncated to the
lattice shifts k with |k|_inf <= image_count around the nearest image of
y, so points outside the fundamental cell are handled. The image sum over the
sup-norm box factorizes over coordinates, so it is evaluated as a product
of one-dimensional image sums. Dropped images contribute at most about
exp(-(image_count * period - |d|)^2 / (4 eps)) per coordinate.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from config import Config

logger = logging.getLogger(__name__)


class DomainKind(str, Enum):
    EUCLIDEAN = 'Euclidean'
    FLAT_TORUS = 'FlatTorus'

    @classmethod
    def parse(cls, value) -> 'DomainKind':
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace('_', '').replace('-', '').replace(' ', '')
        aliases = {
            'euclidean': cls.EUCLIDEAN,
            'rn': cls.EUCLIDEAN,
            'flattorus': cls.FLAT_TORUS,
            'torus': cls.FLAT_TORUS,
        }
        if key not in aliases:
            raise ValueError(f"unknown domain kind: {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind = DomainKind.EUCLIDEAN
    dim: int = 1
    periods: Tuple[float, ...] = ()
    image_count: int = Config.TORUS_IMAGE_COUNT

    def __post_init__(self):
        object.__setattr__(self, 'kind', DomainKind.parse(self.kind))
        object.__setattr__(self, 'periods', tuple(float(p) for p in self.periods))
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.kind is DomainKind.FLAT_TORUS:
            if len(self.periods) != self.dim:
                raise ValueError("periods must have one entry per dimension")
            if any(p <= 0 for p in self.periods):
                raise ValueError("torus periods must be positive")
            if self.image_count < 1:
                raise ValueError("image_count must be at least 1 on the flat torus")

    @classmethod
    def euclidean(cls, dim: int = 1) -> 'DomainSpec':
        return cls(DomainKind.EUCLIDEAN, dim)

    @classmethod
    def torus(cls, periods: Sequence[float], image_count: int = None) -> 'DomainSpec':
        periods = tuple(periods)
        if image_count is None:
            image_count = Config.TORUS_IMAGE_COUNT
        return cls(DomainKind.FLAT_TORUS, len(periods), periods, image_count)

    @property
    def is_torus(self) -> bool:
        return self.kind is DomainKind.FLAT_TORUS

    def cell_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Unit box, or the fundamental cell of the torus"""
        lower = np.zeros(self.dim)
        upper = np.array(self.periods) if self.is_torus else np.ones(self.dim)
        return lower, upper

    def to_dict(self) -> dict:
        data = {'kind': self.kind.value, 'dim': self.dim}
        if self.is_torus:
            data['periods'] = list(self.periods)
            data['image_count'] = self.image_count
        return data


def as_points(points, dim: int) -> np.ndarray:
    """Coerce a point list to an (N, dim) float array"""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"points must have dimension {dim}, got shape {np.shape(points)}")
    if arr.shape[0] == 0:
        raise ValueError("point list is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


def _check_epsilon(epsilon: float) -> float:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return float(epsilon)


def _log_kernel(domain: DomainSpec, epsilon: float, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """log K_eps(x_i, y_j) for all pairs"""
    diff = xs[:, None, :] - ys[None, :, :]  # (N0, N1, dim)
    log_prefactor = -0.5 * domain.dim * math.log(4.0 * math.pi * epsilon)

    if not domain.is_torus:
        per_axis = -diff ** 2 / (4.0 * epsilon)
    else:
        periods = np.array(domain.periods)
        # reduce to the nearest image, |d| <= period / 2
        dist = np.abs(diff - periods * np.round(diff / periods))
        shifts = np.arange(-domain.image_count, domain.image_count + 1, dtype=float)
        images = dist[..., None] + shifts * periods[:, None]  # (N0, N1, dim, images)
        per_axis = logsumexp(-images ** 2 / (4.0 * epsilon), axis=-1)

    log_k = log_prefactor
    for axis in range(domain.dim):
        log_k = log_k + per_axis[..., axis]
    return log_k


def heat_kernel_eval(domain: DomainSpec, epsilon: float, x, y) -> float:
    """Evaluate K_eps(x, y) on the given domain"""
    epsilon = _check_epsilon(epsilon)
    xs = as_points(x, domain.dim)
    ys = as_points(y, domain.dim)
    if xs.shape[0] != 1 or ys.shape[0] != 1:
        raise ValueError("heat_kernel_eval takes single points")
    return float(np.exp(_log_kernel(domain, epsilon, xs, ys)[0, 0]))


@dataclass(frozen=True, eq=False)
class KernelOperator:
    domain: DomainSpec
    epsilon: float
    xs: np.ndarray
    ys: np.ndarray
    log_entries: np.ndarray
    entries: np.ndarray = field(repr=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def T(self) -> 'KernelOperator':
        return KernelOperator(self.domain, self.epsilon, self.ys, self.xs,
                              self.log_entries.T, self.entries.T)

    def at_time(self, t: float) -> 'KernelOperator':
        """Materialize K_{t eps} on the same point sets"""
        if not 0 < t <= 1:
            raise ValueError("t must lie in (0, 1]")
        return build_kernel_matrix(self.domain, t * self.epsilon, self.xs, self.ys)

    def row_normalized(self) -> 'KernelOperator':
        """Kernel with unit row sums, the point-cloud stand-in for exp(eps Laplacian) 1 = 1"""
        log_entries = self.log_entries - logsumexp(self.log_entries, axis=1)[:, None]
        return KernelOperator(self.domain, self.epsilon, self.xs, self.ys,
                              log_entries, np.exp(log_entries))


def build_kernel_matrix(domain: DomainSpec, epsilon: float, xs, ys) -> KernelOperator:
    """Dense matrix of K_eps(x_i, y_j) with its logarithm"""
    epsilon = _check_epsilon(epsilon)
    xs = as_points(xs, domain.dim)
    ys = as_points(ys, domain.dim)
    log_entries = _log_kernel(domain, epsilon, xs, ys)
    entries = np.exp(log_entries)
    if not np.all(entries > 0):
        logger.warning("kernel entries underflow to zero at eps=%g; use the log-domain solver", epsilon)
    return KernelOperator(domain, epsilon, xs, ys, log_entries, entries)


def _side(K: KernelOperator, transpose: bool):
    return (K.log_entries.T, K.entries.T) if transpose else (K.log_entries, K.entries)


def apply_semigroup(K: KernelOperator, w, transpose: bool = False) -> np.ndarray:
    """K w (or K^T w) for a non-negative weight vector"""
    _, entries = _side(K, transpose)
    w = np.asarray(w, dtype=float)
    if w.shape != (entries.shape[1],):
        raise ValueError(f"length mismatch: kernel side {entries.shape[1]}, vector {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if not np.any(w > 0):
        raise ValueError("measure has zero mass")
    return entries @ w


def log_apply_semigroup(K: KernelOperator, g, transpose: bool = False) -> np.ndarray:
    """log(K exp g) evaluated with shifted exponential sums"""
    log_entries, _ = _side(K, transpose)
    g = np.asarray(g, dtype=float)
    if g.shape != (log_entries.shape[1],):
        raise ValueError(f"length mismatch: kernel side {log_entries.shape[1]}, vector {g.shape}")
    return logsumexp(log_entries + g[None, :], axis=1)


def ml_regularization(epsilon: float) -> float:
    """reg such that exp(-|x-y|^2 / reg) matches the heat kernel shape at diffusivity eps"""
    return 4.0 * _check_epsilon(epsilon)


def diffusivity_from_ml(reg: float) -> float:
    if not reg > 0:
        raise ValueError("regularization must be positive")
    return reg / 4.0

