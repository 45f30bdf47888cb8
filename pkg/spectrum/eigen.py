import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from models.chain_models import ModelParams, build_couplings
from models.matrix_models import HoppingMatrix, build_hopping_matrix

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpectrumData:
    """Ascending single-particle modes m_k with eigenvectors as columns"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def residuals(self, matrix: HoppingMatrix) -> np.ndarray:
        """Per-mode reconstruction residual ||H v_k - m_k v_k||"""
        v = self.eigenvectors
        return np.linalg.norm(matrix.entries @ v - v * self.eigenvalues, axis=0)


def eigendecompose_sorted(m: HoppingMatrix) -> SpectrumData:
    """Hermitian eigendecomposition with ascending eigenvalues"""
    m.require_hermitian()
    values, vectors = linalg.eigh(m.entries)
    spectrum = SpectrumData(eigenvalues=values, eigenvectors=vectors)
    worst = float(np.max(spectrum.residuals(m), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    if worst > RESIDUAL_TOL * scale:
        logger.warning("eigendecomposition residual %.3e above tolerance (dim=%d)", worst, m.dim)
    return spectrum


def filling(params: ModelParams) -> int:
    """Number of occupied Gamma modes: conserved, fixed by the lambda=0 vacuum"""
    return params.ell + 1


def ground_state_energy(params: ModelParams, lam: float) -> float:
    """E_GS = 2 * (sum of the lowest ell+1 modes) + lambda*J_L + (1 - lambda)"""
    modes = linalg.eigvalsh(build_hopping_matrix(params, lam).entries)
    J_L = build_couplings(params).plain[-1]
    return float(2.0 * np.sum(modes[:filling(params)]) + lam * J_L + (1.0 - lam))


def excitation_energy(params: ModelParams, lam: float) -> float:
    """Lowest many-body excitation: promote the top occupied mode across the filling level"""
    modes = linalg.eigvalsh(build_hopping_matrix(params, lam).entries)
    n = filling(params)
    return float(2.0 * (modes[n] - modes[n - 1]))
