"""Vacuum contractions of the evolved Dirac operators: kinks and energies."""
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
import pandas as pd

from models.chain_models import CouplingSet, ModelParams, build_couplings
from models.errors import ConvergenceError
from spectrum.eigen import ground_state_energy
from dynamics.propagation import DriveSpec, Propagator, propagate

logger = logging.getLogger(__name__)

CONVERGENCE_TOL = 1e-6

PropagatorLike = Union[Propagator, np.ndarray]


def _matrix(V: PropagatorLike) -> np.ndarray:
    return V.matrix if isinstance(V, Propagator) else np.asarray(V)


def bond_correlators(V: PropagatorLike) -> np.ndarray:
    """<(c_j^dag - c_j)(c_{j+1} + c_{j+1}^dag)> for every bond, c_{L+1} = c_1"""
    v = _matrix(V)
    L = v.shape[0] // 2
    left = v[L:, :L] - v[:L, :L]
    right = v[:L, L:] + v[L:, L:]
    return np.real(np.sum(left * np.roll(right, -1, axis=0), axis=1))


def occupations(V: PropagatorLike) -> np.ndarray:
    """<c_j^dag c_j> for every site"""
    v = _matrix(V)
    L = v.shape[0] // 2
    return np.real(np.sum(v[L:, :L] * v[:L, L:], axis=1))


def kink_number(V: PropagatorLike, couplings: CouplingSet) -> float:
    """Expected number of frustrated bonds"""
    bonds = bond_correlators(V)
    return float(0.5 * couplings.L - 0.5 * np.dot(couplings.kink_weights, bonds))


def energy_expectation(V: PropagatorLike, params: ModelParams, lam: float) -> float:
    """<H[lambda]> in the evolved state"""
    couplings = build_couplings(params)
    bonds = bond_correlators(V)
    n = occupations(V)
    return float(
        -lam * np.dot(couplings.parity_flipped, bonds)
        + 2.0 * (1.0 - lam) * np.sum(n)
        - (1.0 - lam) * params.L
    )


def excess_energy(V: PropagatorLike, params: ModelParams) -> float:
    """Final energy above the lambda=1 ground state"""
    return energy_expectation(V, params, 1.0) - ground_state_energy(params, 1.0)


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Kink number and energy sampled along a drive"""
    times: np.ndarray
    lambdas: np.ndarray
    kinks: np.ndarray
    energies: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {'t': self.times, 'lambda': self.lambdas, 'kinks': self.kinks, 'energy': self.energies}
        )


@dataclass(frozen=True)
class FinalObservables:
    """End-of-drive kink number and excess energy"""
    kinks: float
    excess_energy: float
    steps: int

    def to_dict(self):
        return {'kinks': self.kinks, 'excess_energy': self.excess_energy}


def sample_steps(n_steps: int, n_samples: int) -> np.ndarray:
    """Step indices at which a series is recorded (shared by every integrator)"""
    count = max(1, min(n_samples, n_steps))
    return np.unique(np.rint(np.linspace(0, n_steps, count + 1)[1:]).astype(int))


def evolve_observables(spec: DriveSpec, n_samples: int = 50) -> ObservableSeries:
    """Run a drive and record kinks and energy at evenly spaced steps"""
    couplings = build_couplings(spec.params)
    wanted = set(int(k) for k in sample_steps(spec.n_steps, n_samples))
    times, lambdas, kinks, energies = [], [], [], []

    def record(k: int, t: float, v: np.ndarray):
        if k not in wanted:
            return
        lam = spec.schedule.lam(min(t / spec.total_time, 1.0))
        times.append(t)
        lambdas.append(lam)
        kinks.append(kink_number(v, couplings))
        energies.append(energy_expectation(v, spec.params, lam))

    propagate(spec, observer=record)
    return ObservableSeries(np.array(times), np.array(lambdas), np.array(kinks), np.array(energies))


def final_observables(spec: DriveSpec, check_convergence: bool = False) -> FinalObservables:
    """Final kinks and excess energy, optionally confirmed at doubled time resolution"""
    couplings = build_couplings(spec.params)
    v = propagate(spec)
    result = FinalObservables(kink_number(v, couplings), excess_energy(v, spec.params), v.steps)
    if not check_convergence:
        return result

    fine_spec = spec.refined()
    fine = propagate(fine_spec)
    shift = max(
        abs(kink_number(fine, couplings) - result.kinks),
        abs(excess_energy(fine, spec.params) - result.excess_energy),
    )
    if shift >= CONVERGENCE_TOL:
        raise ConvergenceError(
            f"{spec.cd_mode} L={spec.params.L} T={spec.total_time}: observables moved by {shift:.3e} "
            f"when dt was halved from {spec.step:.3e}"
        )
    logger.debug("dt self-convergence shift %.2e", shift)
    return result
