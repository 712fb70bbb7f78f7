"""
Sinkhorn iteration as a time discretization of the f-g flow

The continuous system on the supports of mu0 and mu1 is

    df/ds = -f - log(K exp g)   + log mass0
    dg/ds = -g - log(K^T exp f) + log mass1

Lie-Trotter splitting with forward Euler sub-steps of length h gives the
sequential update used by splitting_step; h = 1 is classical Sinkhorn and
h > 1 is the over-relaxed variant. In the scalings a = exp f, b = exp g the
same update reads a+ = a^(1-h) (mass0 / K b)^h, b+ = b^(1-h) (mass1 / K^T a+)^h.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

import diagnostics
from config import Config
from kernels import KernelOperator, apply_semigroup, log_apply_semigroup
from problem import ProblemInstance

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ('iter', 'residual_l2', 'coupling_mass', 'F1', 'F2')


class DivergenceError(RuntimeError):
    """Raised when an integration or a required solve blows up"""


class SolveMode(str, Enum):
    LOG_DOMAIN = 'log'
    SCALING_DOMAIN = 'scaling'

    @classmethod
    def parse(cls, value) -> 'SolveMode':
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ('log', 'logdomain', 'log_domain'):
            return cls.LOG_DOMAIN
        if key in ('scaling', 'scalingdomain', 'scaling_domain'):
            return cls.SCALING_DOMAIN
        raise ValueError(f"unknown solver mode: {value!r}")


class SolveStatus(str, Enum):
    CONVERGED = 'Converged'
    MAX_ITER = 'MaxIter'
    DIVERGED = 'Diverged'


@dataclass(frozen=True, eq=False)
class Potentials:
    f: np.ndarray
    g: np.ndarray

    def to_scalings(self) -> 'Scalings':
        return Scalings(np.exp(self.f), np.exp(self.g))

    def shifted(self, sigma: float) -> 'Potentials':
        """Gauge representative (f + sigma, g - sigma)"""
        return Potentials(self.f + sigma, self.g - sigma)

    def gauge_fixed(self) -> 'Potentials':
        return self.shifted(-float(np.mean(self.f)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.f)) and np.all(np.isfinite(self.g)))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.f, self.g])


@dataclass(frozen=True, eq=False)
class Scalings:
    a: np.ndarray
    b: np.ndarray

    def to_potentials(self) -> Potentials:
        with np.errstate(divide='ignore'):
            return Potentials(np.log(self.a), np.log(self.b))

    def rescaled(self, c: float) -> 'Scalings':
        """Gauge representative (c a, b / c)"""
        return Scalings(self.a * c, self.b / c)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))
                    and np.all(self.a > 0) and np.all(self.b > 0))


State = Union[Potentials, Scalings]


@dataclass
class SolveConfig:
    h: float = Config.STEP_SIZE
    tol: float = Config.TOLERANCE
    max_iter: int = Config.MAX_ITER
    mode: SolveMode = SolveMode.parse(Config.SOLVER_MODE)
    record_trace: bool = False

    def __post_init__(self):
        self.mode = SolveMode.parse(self.mode)
        if not self.h > 0:
            raise ValueError("step size h must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    @classmethod
    def from_dict(cls, data: dict, **overrides) -> 'SolveConfig':
        data = dict(data or {})
        data.update(overrides)
        return cls(
            h=float(data.get('h', Config.STEP_SIZE)),
            tol=float(data.get('tol', Config.TOLERANCE)),
            max_iter=int(data.get('max_iter', Config.MAX_ITER)),
            mode=data.get('mode', Config.SOLVER_MODE),
            record_trace=bool(data.get('record_trace', False)),
        )


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    residual_l2: float
    coupling_mass: float
    F1: float
    F2: float

    def as_row(self) -> Tuple:
        return (self.iter, self.residual_l2, self.coupling_mass, self.F1, self.F2)


@dataclass
class SolveTrace:
    records: List[TraceRecord] = field(default_factory=list)
    status: Optional[SolveStatus] = None

    def append(self, record: TraceRecord) -> None:
        if self.records and record.iter <= self.records[-1].iter:
            raise ValueError("trace records must be monotone in iter")
        self.records.append(record)

    def rows(self):
        return [r.as_row() for r in self.records]


@dataclass
class SolveResult:
    scalings: Scalings
    potentials: Potentials
    trace: SolveTrace
    iterations: int
    residual: float

    @property
    def status(self) -> SolveStatus:
        return self.trace.status

    def __iter__(self):
        # unpacks as (scalings, potentials, trace)
        return iter((self.scalings, self.potentials, self.trace))


def _as_potentials(state: State) -> Potentials:
    return state if isinstance(state, Potentials) else state.to_potentials()


def ode_rhs_log(P: Potentials, K: KernelOperator, mass0, mass1) -> Tuple[np.ndarray, np.ndarray]:
    """Right-hand side of the f-g system"""
    df = -P.f - log_apply_semigroup(K, P.g) + np.log(mass0)
    dg = -P.g - log_apply_semigroup(K, P.f, transpose=True) + np.log(mass1)
    return df, dg


def ode_rhs_scaling(S: Scalings, K: KernelOperator, mass0, mass1) -> Tuple[np.ndarray, np.ndarray]:
    """Right-hand side of the a-b system"""
    da = -S.a * np.log(S.a * apply_semigroup(K, S.b) / mass0)
    db = -S.b * np.log(S.b * apply_semigroup(K, S.a, transpose=True) / mass1)
    return da, db


def _check_step(h: float) -> None:
    if not h > 0:
        raise ValueError("step size h must be positive")
    if h >= 2:
        warnings.warn(f"step size h={h} is outside (0, 2); the splitting is linearly unstable",
                      RuntimeWarning, stacklevel=3)


def splitting_step(P: Potentials, K: KernelOperator, mass0, mass1, h: float) -> Potentials:
    """One Trotter-Euler step, f first and then g with the updated f"""
    _check_step(h)
    f = (1.0 - h) * P.f - h * log_apply_semigroup(K, P.g) + h * np.log(mass0)
    g = (1.0 - h) * P.g - h * log_apply_semigroup(K, f, transpose=True) + h * np.log(mass1)
    return Potentials(f, g)


def scaling_step(S: Scalings, K: KernelOperator, mass0, mass1, h: float) -> Scalings:
    """Over-relaxed Sinkhorn update in the scalings"""
    _check_step(h)
    a = S.a ** (1.0 - h) * (mass0 / apply_semigroup(K, S.b)) ** h
    b = S.b ** (1.0 - h) * (mass1 / apply_semigroup(K, a, transpose=True)) ** h
    return Scalings(a, b)


def classical_sinkhorn_step(S: Scalings, K: KernelOperator, mass0, mass1) -> Scalings:
    """Textbook alternating update a = mass0 / K b, b = mass1 / K^T a"""
    a = mass0 / (K.entries @ S.b)
    b = mass1 / (K.entries.T @ a)
    return Scalings(a, b)


def residual(state: State, K: KernelOperator, mass0, mass1) -> float:
    """L2 norm of the right-hand side with the (-1, +1) gauge direction projected out"""
    df, dg = ode_rhs_log(_as_potentials(state), K, mass0, mass1)
    rhs = np.concatenate([df, dg])
    direction = np.concatenate([-np.ones_like(df), np.ones_like(dg)])
    direction /= np.linalg.norm(direction)
    rhs = rhs - (rhs @ direction) * direction
    return float(np.linalg.norm(rhs))


def entropic_plan(S: Scalings, K: KernelOperator) -> np.ndarray:
    """Coupling P_ij = a_i K_ij b_j"""
    return S.a[:, None] * K.entries * S.b[None, :]


def _trace_record(k: int, r: float, state: State, K: KernelOperator, mass0, mass1) -> TraceRecord:
    c, f1, f2 = diagnostics.log_domain_summary(_as_potentials(state), K, mass0, mass1)
    return TraceRecord(k, r, c, f1, f2)


def sinkhorn_iterate(K: KernelOperator, mass0, mass1, config: SolveConfig = None,
                     initial: Optional[Potentials] = None) -> SolveResult:
    """Run the splitting family from `initial` (zero potentials by default) until tol or max_iter"""
    config = config or SolveConfig()
    mass0 = np.asarray(mass0, dtype=float)
    mass1 = np.asarray(mass1, dtype=float)
    if initial is None:
        initial = Potentials(np.zeros(K.shape[0]), np.zeros(K.shape[1]))
    if config.h >= 2:
        logger.warning("step size h=%g is outside (0, 2); expect divergence", config.h)

    log_mode = config.mode is SolveMode.LOG_DOMAIN
    state: State = initial if log_mode else initial.to_scalings()
    step = splitting_step if log_mode else scaling_step

    trace = SolveTrace()
    r0 = residual(state, K, mass0, mass1)
    r = r0
    if config.record_trace:
        trace.append(_trace_record(0, r0, state, K, mass0, mass1))

    status = SolveStatus.MAX_ITER
    iterations = 0
    if r0 <= config.tol:
        status = SolveStatus.CONVERGED
    else:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', RuntimeWarning)
            for k in range(1, config.max_iter + 1):
                iterations = k
                try:
                    state = step(state, K, mass0, mass1, config.h)
                except ValueError as e:
                    # scalings underflowed to zero mass
                    logger.warning("step %d failed: %s", k, e)
                    r = math.nan
                    status = SolveStatus.DIVERGED
                    break
                finite = state.is_finite()
                r = residual(state, K, mass0, mass1) if finite else math.nan
                if config.record_trace and finite and math.isfinite(r):
                    trace.append(_trace_record(k, r, state, K, mass0, mass1))
                if not math.isfinite(r) or r > Config.DIVERGENCE_FACTOR * r0:
                    status = SolveStatus.DIVERGED
                    break
                logger.debug("iter %d residual %.3e", k, r)
                if r <= config.tol:
                    status = SolveStatus.CONVERGED
                    break

    trace.status = status
    potentials = _as_potentials(state)
    if potentials.is_finite():
        potentials = potentials.gauge_fixed()
    scalings = potentials.to_scalings()

    log = logger.warning if status is SolveStatus.DIVERGED else logger.info
    log("sinkhorn h=%g mode=%s: %s after %d iterations, residual %.3e",
        config.h, config.mode.value, status.value, iterations, r)
    return SolveResult(scalings, potentials, trace, iterations, float(r))


def solve(problem: ProblemInstance, config: SolveConfig = None,
          initial: Optional[Potentials] = None) -> SolveResult:
    """Solve the entropic transport problem; unpacks as (scalings, potentials, trace)"""
    return sinkhorn_iterate(problem.kernel, problem.mass0, problem.mass1, config, initial)


def rk4_step(rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, ds: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * ds * k1)
    k3 = rhs(y + 0.5 * ds * k2)
    k4 = rhs(y + ds * k3)
    return y + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_reference(problem: ProblemInstance, s_end: float, ds: float,
                        initial: Optional[Potentials] = None,
                        sample_every: int = 1) -> Tuple[np.ndarray, List[Potentials]]:
    """Integrate the unsplit f-g system with classical RK4; returns (times, trajectory)"""
    if not ds > 0:
        raise ValueError("ds must be positive")
    if s_end < 0:
        raise ValueError("s_end must be non-negative")
    K, mass0, mass1 = problem.kernel, problem.mass0, problem.mass1
    n0 = K.shape[0]
    if initial is None:
        initial = Potentials(np.zeros(n0), np.zeros(K.shape[1]))

    def rhs(y):
        df, dg = ode_rhs_log(Potentials(y[:n0], y[n0:]), K, mass0, mass1)
        return np.concatenate([df, dg])

    steps = int(round(s_end / ds))
    y = initial.stacked()
    times, trajectory = [0.0], [initial]
    for k in range(1, steps + 1):
        y = rk4_step(rhs, y, ds)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"reference integration produced non-finite values at s={k * ds:g}")
        if k % sample_every == 0 or k == steps:
            times.append(k * ds)
            trajectory.append(Potentials(y[:n0].copy(), y[n0:].copy()))
    return np.array(times), trajectory


def splitting_trajectory(problem: ProblemInstance, s_end: float, h: float,
                         initial: Optional[Potentials] = None) -> Tuple[np.ndarray, List[Potentials]]:
    """Iterates of splitting_step viewed as samples of the flow at s = k h"""
    K, mass0, mass1 = problem.kernel, problem.mass0, problem.mass1
    if initial is None:
        initial = Potentials(np.zeros(K.shape[0]), np.zeros(K.shape[1]))
    steps = int(round(s_end / h))
    state = initial
    times, trajectory = [0.0], [initial]
    for k in range(1, steps + 1):
        state = splitting_step(state, K, mass0, mass1, h)
        times.append(k * h)
        trajectory.append(state)
    return np.array(times), trajectory
