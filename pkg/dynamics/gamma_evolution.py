"""Number-conserving cross-check: evolve the occupied Gamma orbitals directly."""
import numpy as np
from scipy import linalg

from models.chain_models import build_couplings
from models.matrix_models import build_hopping_matrix
from spectrum.eigen import filling, ground_state_energy
from dynamics.propagation import DriveGenerator, DriveSpec, step_unitary


def initial_orbitals(spec: DriveSpec) -> np.ndarray:
    """Lowest ell+1 eigenvectors of H[0], spanning the initial Slater determinant"""
    _, vectors = linalg.eigh(build_hopping_matrix(spec.params, 0.0).entries)
    return vectors[:, :filling(spec.params)].astype(complex)


def evolve_gamma_orbitals(spec: DriveSpec) -> np.ndarray:
    """Orbitals after the full drive under exp(-2i dt (H + lambda_dot A))"""
    generator = DriveGenerator(spec)
    orbitals = initial_orbitals(spec)
    dt = spec.step

    def gamma_at(t: float) -> np.ndarray:
        return generator.gamma(t).entries

    for k in range(spec.n_steps):
        orbitals = step_unitary(gamma_at, k * dt, dt, spec.stepper) @ orbitals
    return orbitals


def gamma_excess_energy(spec: DriveSpec) -> float:
    """Excess energy at lambda=1 from the evolved Gamma orbitals"""
    orbitals = evolve_gamma_orbitals(spec)
    h_final = build_hopping_matrix(spec.params, 1.0).entries
    J_L = build_couplings(spec.params).plain[-1]
    energy = 2.0 * float(np.real(np.trace(orbitals.conj().T @ h_final @ orbitals))) + J_L
    return energy - ground_state_energy(spec.params, 1.0)
