"""Time-ordered BdG propagation of the driven chain.

The Dirac operator vector evolves as Psi(t) = V(t) Psi with dV/dt = -2i M(t) V, where
M(t) = BdG(H[lambda]) + lambda_dot * BdG(H_1). Each step multiplies an exact exponential
of a Hermitian generator on the left, so V stays unitary to rounding.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from tqdm import tqdm

from models.chain_models import ModelParams, Schedule
from models.errors import ParameterError
from models.matrix_models import BdGMatrix, HoppingMatrix, build_bdg_hamiltonian, build_hopping_matrix
from cd.generators import CDMatrices, check_cd_mode
from cd.variational import CoefficientTable

logger = logging.getLogger(__name__)

STEPPERS = ("midpoint", "magnus4")

# Gauss nodes and weights of the fourth-order commutator-free Magnus step
_NODE_1 = 0.5 - math.sqrt(3.0) / 6.0
_NODE_2 = 0.5 + math.sqrt(3.0) / 6.0
_WEIGHT_1 = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0
_WEIGHT_2 = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0

Observer = Callable[[int, float, np.ndarray], None]


def default_dt(total_time: float) -> float:
    return min(0.01, total_time / 1000.0)


@dataclass(frozen=True)
class DriveSpec:
    """Model representing one driven run: CD mode, chain, ramp and time step"""
    cd_mode: str
    params: ModelParams
    schedule: Schedule
    dt: Optional[float] = None
    stepper: str = "midpoint"
    coefficient_grid: int = 0

    def __post_init__(self):
        check_cd_mode(self.cd_mode)
        if self.stepper not in STEPPERS:
            raise ParameterError(f"unknown stepper {self.stepper!r}; expected one of {', '.join(STEPPERS)}")
        if self.dt is not None:
            if not self.dt > 0:
                raise ParameterError(f"time step must be positive, got dt={self.dt}")
            if self.dt >= self.schedule.total_time:
                raise ParameterError(f"time step dt={self.dt} must be smaller than T={self.schedule.total_time}")
        if self.coefficient_grid < 0:
            raise ParameterError(f"coefficient_grid must be >= 0, got {self.coefficient_grid}")

    @property
    def total_time(self) -> float:
        return self.schedule.total_time

    @property
    def requested_dt(self) -> float:
        return default_dt(self.total_time) if self.dt is None else self.dt

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.total_time / self.requested_dt - 1e-9))

    @property
    def step(self) -> float:
        return self.total_time / self.n_steps

    def refined(self) -> "DriveSpec":
        """Same drive at twice the time resolution"""
        return replace(self, dt=self.step / 2.0)

    def to_dict(self):
        return {
            'cd_mode': self.cd_mode,
            'T': self.total_time,
            'dt': self.step,
            'n_steps': self.n_steps,
            'stepper': self.stepper,
            **self.params.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class Propagator:
    """Time-ordered unitary acting on (c_1..c_L, c_1^dag..c_L^dag)"""
    matrix: np.ndarray
    final_time: float
    steps: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def unitarity_error(self) -> float:
        v = self.matrix
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim))))

    def particle_hole_error(self) -> float:
        """Deviation from the block pattern [[a, b], [b*, a*]]"""
        v, L = self.matrix, self.dim // 2
        return float(
            max(
                np.max(np.abs(v[L:, L:] - v[:L, :L].conj())),
                np.max(np.abs(v[L:, :L] - v[:L, L:].conj())),
            )
        )


class DriveGenerator:
    """Instantaneous generators H[lambda(t)] + lambda_dot(t) * H_1 for a drive"""

    def __init__(self, spec: DriveSpec):
        self.spec = spec
        table = None
        if spec.coefficient_grid and spec.cd_mode in ("var1", "var2"):
            table = CoefficientTable(spec.params, 1 if spec.cd_mode == "var1" else 2, spec.coefficient_grid)
        self.cd = CDMatrices(spec.params, spec.cd_mode, table)

    def _ramp(self, t: float):
        s = min(max(t / self.spec.total_time, 0.0), 1.0)
        return self.spec.schedule.lam(s), self.spec.schedule.lam_dot(s)

    def bdg(self, t: float) -> BdGMatrix:
        lam, lam_dot = self._ramp(t)
        bare = build_bdg_hamiltonian(self.spec.params, lam)
        if self.spec.cd_mode == "bare":
            return bare
        return bare + self.cd.bdg(lam).scaled(lam_dot)

    def gamma(self, t: float) -> HoppingMatrix:
        lam, lam_dot = self._ramp(t)
        bare = build_hopping_matrix(self.spec.params, lam)
        if self.spec.cd_mode == "bare":
            return bare
        return bare + self.cd.gamma(lam).scaled(lam_dot)


def exponential_step(generator: np.ndarray, dt: float) -> np.ndarray:
    """exp(-2i dt G) for Hermitian G via eigendecomposition"""
    values, vectors = linalg.eigh(generator)
    return (vectors * np.exp(-2j * dt * values)) @ vectors.conj().T


def step_unitary(matrix_at: Callable[[float], np.ndarray], t0: float, dt: float, stepper: str) -> np.ndarray:
    """One step [t0, t0 + dt] of the chosen scheme for any Hermitian generator"""
    if stepper == "midpoint":
        return exponential_step(matrix_at(t0 + 0.5 * dt), dt)
    first = matrix_at(t0 + _NODE_1 * dt)
    second = matrix_at(t0 + _NODE_2 * dt)
    early = exponential_step(_WEIGHT_2 * first + _WEIGHT_1 * second, dt)
    late = exponential_step(_WEIGHT_1 * first + _WEIGHT_2 * second, dt)
    return late @ early


def steps_until(spec: DriveSpec, t_stop: Optional[float]) -> int:
    if t_stop is None:
        return spec.n_steps
    if not 0.0 <= t_stop <= spec.total_time + 1e-12:
        raise ParameterError(f"t_stop must lie in [0, T], got {t_stop}")
    return min(spec.n_steps, int(round(t_stop / spec.step)))


def propagate(
    spec: DriveSpec,
    t_stop: Optional[float] = None,
    observer: Optional[Observer] = None,
    progress: bool = False,
) -> Propagator:
    """Time-ordered BdG propagator, latest step leftmost"""
    generator = DriveGenerator(spec)
    n, dt = steps_until(spec, t_stop), spec.step
    v = np.eye(2 * spec.params.L, dtype=complex)

    def full_at(t: float) -> np.ndarray:
        return generator.bdg(t).full

    for k in tqdm(range(n), disable=not progress, desc=f"{spec.cd_mode} L={spec.params.L}", leave=False):
        v = step_unitary(full_at, k * dt, dt, spec.stepper) @ v
        if observer is not None:
            observer(k + 1, (k + 1) * dt, v)

    logger.debug("propagated %s L=%d T=%g over %d steps", spec.cd_mode, spec.params.L, spec.total_time, n)
    return Propagator(matrix=v, final_time=n * dt, steps=n)
