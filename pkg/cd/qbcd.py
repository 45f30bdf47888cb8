"""Rank-2 counterdiabatic term built from the two edge states at the crossing."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from models.chain_models import ModelParams
from models.errors import ParameterError
from models.matrix_models import HoppingMatrix, build_hopping_derivative, build_hopping_matrix
from spectrum.crossing import EdgeStates, analytic_crossing, build_edge_states

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QBCDTerm:
    """Model representing the edge-state counterdiabatic term, fixed at lambda_c"""
    gamma_matrix: HoppingMatrix
    matrix_element: float
    gap_estimate: float
    lambda_c: float

    @property
    def strength(self) -> float:
        return self.matrix_element / self.gap_estimate


def closed_form_gap(params: ModelParams, lam: float, kappa: float, mu: float) -> float:
    """<psi_R|H[lam]|psi_L> for the unnormalized edge vectors"""
    ell, J, Jp = params.ell, params.J, params.Jp
    ratio = J * (lam - 1.0) / (Jp * lam)
    return (
        Jp * lam * math.exp(-(ell - 1) * kappa - mu)
        + J ** 2 * (lam - 1.0) ** 3 / (lam ** 2 * Jp ** 2) * math.exp(-ell * kappa - mu)
        + (lam - 1.0) * ell * math.exp(-(ell - 1) * kappa) * (1.0 + math.exp(-2.0 * mu))
        + (ell - 1) * lam * (math.exp(-ell * kappa - 2.0 * mu) + math.exp(-(ell - 2) * kappa))
        + J * lam * ratio ** 2 * math.exp(-ell * kappa - mu) * (1.0 + math.exp(kappa))
    )


def closed_form_matrix_element(params: ModelParams, lam: float, kappa: float, mu: float) -> float:
    """<psi_R|dH/dlambda|psi_L> for the unnormalized edge vectors"""
    ell, J, Jp = params.ell, params.J, params.Jp
    ratio = J * (lam - 1.0) / (Jp * lam)
    return (
        Jp * math.exp(-(ell - 1) * kappa - mu)
        + J ** 2 * (lam - 1.0) ** 2 / (lam ** 2 * Jp ** 2) * math.exp(-ell * kappa - mu)
        + ell * math.exp(-(ell - 1) * kappa) * (1.0 + math.exp(-2.0 * mu))
        + (ell - 1) * (math.exp(-ell * kappa - 2.0 * mu) + math.exp(-(ell - 2) * kappa))
        + J * ratio ** 2 * math.exp(-ell * kappa - mu) * (1.0 + math.exp(kappa))
    )


def qbcd_matrix(edges: EdgeStates, strength: float) -> HoppingMatrix:
    """i * strength * (|psi_R><psi_L| - |psi_L><psi_R|)"""
    outer = np.outer(edges.psiR, edges.psiL)
    return HoppingMatrix(1j * strength * (outer - outer.T))


def gap_magnitude(params: ModelParams, sandwich: float) -> float:
    """Positive Delta_min from the signed sandwich <psi_R|H|psi_L>

    The sandwich is negative for short chains (ell <= 20 at J=0.5, J'=0.27).
    A vanishing or non-finite sandwich has no QBCD term.
    """
    if not math.isfinite(sandwich) or sandwich == 0.0:
        raise ParameterError(f"QBCD gap estimate {sandwich!r} at L={params.L} is not a usable gap")
    if sandwich < 0:
        logger.debug("QBCD L=%d: negative gap sandwich %.6e, using its magnitude", params.L, sandwich)
    return abs(sandwich)


def build_qbcd(params: ModelParams) -> QBCDTerm:
    """QBCD term from the closed-form matrix element and gap estimate"""
    crossing = analytic_crossing(params)
    edges = build_edge_states(params)
    lam = crossing.lambda_c
    element = closed_form_matrix_element(params, lam, crossing.kappa_c, crossing.mu)
    gap = gap_magnitude(params, closed_form_gap(params, lam, crossing.kappa_c, crossing.mu))
    logger.debug("QBCD L=%d: matrix element %.6e, gap estimate %.6e", params.L, element, gap)
    return QBCDTerm(
        gamma_matrix=qbcd_matrix(edges, element / gap),
        matrix_element=element,
        gap_estimate=gap,
        lambda_c=lam,
    )


def build_qbcd_numeric(params: ModelParams) -> QBCDTerm:
    """QBCD term with the matrix element and gap evaluated as numeric sandwiches"""
    crossing = analytic_crossing(params)
    edges = build_edge_states(params)
    lam = crossing.lambda_c
    scale = edges.norm_L * edges.norm_R
    element = scale * float(np.real(edges.psiR @ build_hopping_derivative(params, lam).entries @ edges.psiL))
    sandwich = scale * float(np.real(edges.psiR @ build_hopping_matrix(params, lam).entries @ edges.psiL))
    gap = gap_magnitude(params, sandwich)
    return QBCDTerm(
        gamma_matrix=qbcd_matrix(edges, element / gap),
        matrix_element=element,
        gap_estimate=gap,
        lambda_c=lam,
    )
