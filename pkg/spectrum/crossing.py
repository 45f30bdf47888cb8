"""Analytics of the edge-state avoided crossing and numerical minimal-gap scans."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import optimize

from models.chain_models import ModelParams
from models.errors import ParameterError
from models.matrix_models import HoppingMatrix
from spectrum.eigen import SpectrumData, eigendecompose_sorted

logger = logging.getLogger(__name__)

GapGenerator = Callable[[float], HoppingMatrix]

WINDOW_HALF_WIDTH = 0.2
DEFAULT_GRID = 200
GOLDEN_TOL = 1e-8


@dataclass(frozen=True)
class CrossingData:
    """Closed-form location and decay rates of the edge-state crossing"""
    B_c: float
    lambda_c: float
    eps_c: float
    kappa_c: float
    mu: float
    alpha: float

    def to_dict(self):
        """Convert crossing data to dictionary"""
        return {
            'alpha': self.alpha,
            'lambda_c': self.lambda_c,
            'kappa_c': self.kappa_c,
            'mu': self.mu,
            'eps_c': self.eps_c,
            'B_c': self.B_c,
        }


@dataclass(frozen=True, eq=False)
class EdgeStates:
    """Unit-normalized left and right localized modes of the Gamma-basis chain"""
    psiL: np.ndarray
    psiR: np.ndarray
    kappa: float
    mu: float
    B: float
    norm_L: float = 1.0
    norm_R: float = 1.0

    @property
    def overlap(self) -> float:
        return float(np.dot(self.psiL, self.psiR))


@dataclass(frozen=True)
class GapScan:
    """Result of a minimal-gap search"""
    delta_min: float
    lam_star: float
    window: Tuple[float, float]
    n_evaluations: int


def _require_crossing_regime(params: ModelParams):
    if params.J ** 2 >= params.Jp:
        raise ParameterError(f"no localized crossing for J^2 >= J' (J={params.J}, J'={params.Jp})")


def analytic_crossing(params: ModelParams) -> CrossingData:
    """Closed forms for the crossing point, its energy and the edge decay rate"""
    _require_crossing_regime(params)
    J2, Jp = params.J ** 2, params.Jp
    denominator = Jp * (1.0 - 2.0 * J2 + Jp ** 2)
    B_c = (1.0 - J2) * (J2 - Jp ** 2) / denominator
    eps_c = (Jp ** 2 - J2 ** 2) / denominator
    mu = math.log((J2 - Jp ** 2) / (1.0 - J2))
    kappa_c = math.log(Jp * (1.0 - J2) / (J2 - Jp ** 2))
    return CrossingData(
        B_c=B_c,
        lambda_c=1.0 / (1.0 + B_c),
        eps_c=eps_c,
        kappa_c=kappa_c,
        mu=mu,
        alpha=kappa_c / 2.0,
    )


def build_edge_states(params: ModelParams, matched_right_boundary: bool = False) -> EdgeStates:
    """Left/right edge modes at the crossing, built from their closed-form amplitude pattern.

    With ``matched_right_boundary`` the last entry of psiR solves the right-end rows of the
    hopping matrix (c = e^kappa / J) instead of using the closed-form estimate J B e^-mu / J'.
    """
    crossing = analytic_crossing(params)
    ell, L = params.ell, params.L
    kappa, mu, B = crossing.kappa_c, crossing.mu, crossing.B_c

    decay = np.exp(-kappa * np.arange(ell))
    psiL = np.empty(L)
    psiL[0:2 * ell:2] = decay * math.exp(-mu)
    psiL[1:2 * ell:2] = decay
    psiL[L - 1] = params.J * B * math.exp(-ell * kappa) / params.Jp

    growth = decay[::-1]
    psiR = np.empty(L)
    psiR[0:2 * ell:2] = growth
    psiR[1:2 * ell:2] = growth * math.exp(-mu)
    if matched_right_boundary:
        psiR[L - 1] = math.exp(kappa) / params.J
    else:
        psiR[L - 1] = params.J * B * math.exp(-mu) / params.Jp

    norm_L, norm_R = float(np.linalg.norm(psiL)), float(np.linalg.norm(psiR))
    return EdgeStates(
        psiL=psiL / norm_L,
        psiR=psiR / norm_R,
        kappa=kappa,
        mu=mu,
        B=B,
        norm_L=norm_L,
        norm_R=norm_R,
    )


def edge_mode_weights(spectrum: SpectrumData, edges: EdgeStates) -> np.ndarray:
    """Weight of each eigenvector on span{psiL, psiR}"""
    v = spectrum.eigenvectors
    return np.abs(edges.psiL @ v) ** 2 + np.abs(edges.psiR @ v) ** 2


def edge_pair(spectrum: SpectrumData, edges: EdgeStates) -> Tuple[int, int]:
    """Indices (a < b) of the two modes with the largest edge character"""
    weights = edge_mode_weights(spectrum, edges)
    a, b = sorted(int(k) for k in np.argsort(weights)[-2:])
    if b != a + 1:
        logger.debug("edge modes %d and %d are not adjacent", a, b)
    return a, b


def edge_gap(matrix: HoppingMatrix, edges: EdgeStates) -> float:
    """Many-body gap 2 (m_b - m_a) between the edge-character modes"""
    spectrum = eigendecompose_sorted(matrix)
    a, b = edge_pair(spectrum, edges)
    return float(2.0 * abs(spectrum.eigenvalues[b] - spectrum.eigenvalues[a]))


def default_window(params: ModelParams) -> Tuple[float, float]:
    lam_c = analytic_crossing(params).lambda_c
    return max(0.0, lam_c - WINDOW_HALF_WIDTH), min(1.0, lam_c + WINDOW_HALF_WIDTH)


def min_gap_scan(
    params: ModelParams,
    generator: GapGenerator,
    lam_window: Optional[Tuple[float, float]] = None,
    n_grid: int = DEFAULT_GRID,
    tol: float = GOLDEN_TOL,
    edges: Optional[EdgeStates] = None,
) -> GapScan:
    """Locate the minimal edge gap along lambda: coarse grid, then golden-section refinement"""
    window = default_window(params) if lam_window is None else tuple(lam_window)
    lo, hi = window
    if not 0.0 <= lo < hi <= 1.0:
        raise ParameterError(f"lambda window must satisfy 0 <= lo < hi <= 1, got {window}")
    if n_grid < 3:
        raise ParameterError(f"need at least 3 grid points, got {n_grid}")
    edges = build_edge_states(params) if edges is None else edges

    evaluations = 0

    def gap(lam: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return edge_gap(generator(float(lam)), edges)

    grid = np.linspace(lo, hi, n_grid)
    values = np.array([gap(lam) for lam in grid])
    i = int(np.argmin(values))
    best_lam, best_gap = float(grid[i]), float(values[i])

    if 0 < i < n_grid - 1 and values[i] < values[i - 1] and values[i] < values[i + 1]:
        try:
            result = optimize.minimize_scalar(
                gap, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=tol
            )
        except ValueError:
            logger.debug("golden bracket rejected at lambda=%.6f, using bounded search", grid[i])
            result = _bounded(gap, grid[i - 1], grid[i + 1], tol)
    else:
        left = grid[max(i - 1, 0)]
        right = grid[min(i + 1, n_grid - 1)]
        result = _bounded(gap, left, right, tol)

    if result.fun < best_gap:
        best_lam, best_gap = float(result.x), float(result.fun)

    logger.debug("min gap %.6e at lambda=%.8f (L=%d, %d evaluations)", best_gap, best_lam, params.L, evaluations)
    return GapScan(delta_min=best_gap, lam_star=best_lam, window=(float(lo), float(hi)), n_evaluations=evaluations)


def _bounded(func, left: float, right: float, tol: float):
    return optimize.minimize_scalar(
        func, bounds=(float(left), float(right)), method="bounded", options={"xatol": tol * max(abs(right), 1e-3)}
    )
