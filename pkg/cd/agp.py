import logging

import numpy as np
from scipy import linalg

from models.chain_models import ModelParams
from models.errors import DegeneracyError, ParameterError
from models.matrix_models import HoppingMatrix, build_hopping_derivative, build_hopping_matrix

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12


def exact_agp_single_particle(
    params: ModelParams, lam: float, dlam: float = None, tol: float = DEGENERACY_TOL
) -> HoppingMatrix:
    """Exact single-particle adiabatic gauge potential in the Gamma basis.

    Mode energies are taken as eps_k = 2 m_k, matching the many-body operator
    2 Gamma^+ H Gamma^-, so the result adds to H as ``H + lam_dot * A``.
    ``dlam`` only enables a finite-difference check of the closed-form derivative.
    At the ramp endpoints the exact multiplets of H are allowed; entries inside a
    multiplet are set to zero there.
    """
    if not 0.0 <= lam <= 1.0:
        raise ParameterError(f"lambda must lie in [0, 1], got {lam}")
    h = build_hopping_matrix(params, lam).entries
    dh = build_hopping_derivative(params, lam).entries
    if dlam is not None:
        _check_derivative(params, lam, dlam, dh)

    modes, vectors = linalg.eigh(h)
    energies = 2.0 * modes
    coupling = vectors.conj().T @ dh @ vectors
    spacing = energies[None, :] - energies[:, None]

    off_diagonal = ~np.eye(len(modes), dtype=bool)
    degenerate = off_diagonal & (np.abs(spacing) < tol)
    if np.any(degenerate):
        if lam not in (0.0, 1.0):
            m, n = np.argwhere(degenerate)[0]
            raise DegeneracyError(lam, float(abs(spacing[m, n])))
        logger.debug("exact multiplets at lambda=%g left out of the gauge potential", lam)

    safe = np.where(off_diagonal & ~degenerate, spacing, 1.0)
    agp_eigen = np.where(off_diagonal & ~degenerate, 1j * coupling / safe, 0.0)
    agp = vectors @ agp_eigen @ vectors.conj().T
    return HoppingMatrix(0.5 * (agp + agp.conj().T))


def _check_derivative(params: ModelParams, lam: float, dlam: float, dh: np.ndarray):
    lo, hi = max(0.0, lam - dlam), min(1.0, lam + dlam)
    if hi <= lo:
        raise ParameterError(f"finite-difference step must be positive, got {dlam}")
    numeric = (build_hopping_matrix(params, hi).entries - build_hopping_matrix(params, lo).entries) / (hi - lo)
    error = float(np.max(np.abs(numeric - dh)))
    if error > 1e-8:
        raise ParameterError(f"closed-form derivative disagrees with finite difference by {error:.3e}")
