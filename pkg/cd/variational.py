"""Variational counterdiabatic coefficients and their matrix forms.

First order uses the two-body ansatz ``sum_j alpha_j (Y_j Z_{j+1} + Z_j Y_{j+1})``; second
order adds ``sum_j beta_j (Y_j X_{j+1} Z_{j+2} + Z_j X_{j+1} Y_{j+2})``. The coefficients
minimize the action of the nested-commutator expansion, which reduces to small cyclic
linear systems in the plain (spin-language) couplings.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg

from models.chain_models import ModelParams, build_couplings
from models.errors import ParameterError, SingularSystemError
from models.matrix_models import BdGMatrix, HoppingMatrix

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CDCoefficients:
    """Per-bond variational coefficients; beta is zero at first order"""
    order: int
    alpha: np.ndarray
    beta: np.ndarray
    lam: float

    @property
    def L(self) -> int:
        return len(self.alpha)

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ParameterError(f"variational order must be 1 or 2, got {self.order}")
        if len(self.alpha) != len(self.beta):
            raise ParameterError("alpha and beta must have the same length")


def _check_lambda(lam: float):
    if not 0.0 <= lam <= 1.0:
        raise ParameterError(f"lambda must lie in [0, 1], got {lam}")


def first_order_system(J: np.ndarray, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """Matrix and right-hand side of the first-order coefficient equations"""
    L = len(J)
    prev, nxt = np.roll(J, 1), np.roll(J, -1)
    diag = 8.0 * (1.0 - lam) ** 2 + lam ** 2 * (prev ** 2 + 2.0 * J ** 2 + nxt ** 2)
    a = np.diag(diag)
    j = np.arange(L)
    a[j, (j - 1) % L] += 2.0 * lam ** 2 * J * prev
    a[j, (j + 1) % L] += 2.0 * lam ** 2 * J * nxt
    return a, -np.asarray(J, dtype=float)


def second_order_system(J: np.ndarray, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """Coupled 2L x 2L system for (alpha, beta)"""
    L = len(J)
    j = np.arange(L)
    prev, nxt, nxt2 = np.roll(J, 1), np.roll(J, -1), np.roll(J, -2)
    a_alpha, rhs_alpha = first_order_system(J, lam)
    cross = 4.0 * lam * (lam - 1.0)

    alpha_beta = np.zeros((L, L))
    alpha_beta[j, (j - 1) % L] += cross * prev
    alpha_beta[j, j] += cross * nxt

    beta_diag = 8.0 * (1.0 - lam) ** 2 + lam ** 2 * (prev ** 2 + J ** 2 + nxt ** 2 + nxt2 ** 2)
    beta_beta = np.diag(beta_diag)
    beta_beta[j, (j - 1) % L] += 2.0 * lam ** 2 * prev * nxt
    beta_beta[j, (j + 1) % L] += 2.0 * lam ** 2 * J * nxt2

    beta_alpha = np.zeros((L, L))
    beta_alpha[j, (j + 1) % L] += cross * J
    beta_alpha[j, j] += cross * nxt

    a = np.block([[a_alpha, alpha_beta], [beta_alpha, beta_beta]])
    rhs = np.concatenate([rhs_alpha, np.zeros(L)])
    return a, rhs


def _solve(a: np.ndarray, rhs: np.ndarray, lam: float, order: int) -> np.ndarray:
    try:
        x = linalg.solve(a, rhs, assume_a="sym")
    except linalg.LinAlgError as exc:
        raise SingularSystemError(lam, order, str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError(lam, order, "non-finite solution")
    residual = float(np.max(np.abs(a @ x - rhs)))
    if residual > RESIDUAL_TOL * max(1.0, float(np.max(np.abs(rhs)))):
        raise SingularSystemError(lam, order, f"residual {residual:.3e}")
    logger.debug("order-%d coefficients at lambda=%.6f, residual %.2e", order, lam, residual)
    return x


def solve_first_order_system(J: np.ndarray, lam: float) -> CDCoefficients:
    """First-order coefficients for an arbitrary cyclic coupling array"""
    _check_lambda(lam)
    J = np.asarray(J, dtype=float)
    alpha = _solve(*first_order_system(J, lam), lam, 1)
    return CDCoefficients(order=1, alpha=alpha, beta=np.zeros_like(alpha), lam=lam)


def solve_second_order_system(J: np.ndarray, lam: float) -> CDCoefficients:
    """Second-order (alpha, beta) for an arbitrary cyclic coupling array"""
    _check_lambda(lam)
    J = np.asarray(J, dtype=float)
    x = _solve(*second_order_system(J, lam), lam, 2)
    L = len(J)
    return CDCoefficients(order=2, alpha=x[:L], beta=x[L:], lam=lam)


def solve_variational_first(params: ModelParams, lam: float) -> CDCoefficients:
    return solve_first_order_system(build_couplings(params).plain, lam)


def solve_variational_second(params: ModelParams, lam: float) -> CDCoefficients:
    return solve_second_order_system(build_couplings(params).plain, lam)


def variational_residual(coeffs: CDCoefficients, J: np.ndarray) -> float:
    """Max-norm residual of the coefficient equations"""
    J = np.asarray(J, dtype=float)
    if coeffs.order == 1:
        a, rhs = first_order_system(J, coeffs.lam)
        x = coeffs.alpha
    else:
        a, rhs = second_order_system(J, coeffs.lam)
        x = np.concatenate([coeffs.alpha, coeffs.beta])
    return float(np.max(np.abs(a @ x - rhs)))


def build_variational_gamma(coeffs: CDCoefficients) -> HoppingMatrix:
    """Gamma-basis matrix M of the variational term H_1 = 2 Gamma^+ M Gamma^-"""
    L = coeffs.L
    ell = (L - 1) // 2
    alpha, beta = coeffs.alpha, coeffs.beta
    upper = np.zeros((L, L), dtype=complex)

    for j in range(1, ell + 1):
        upper[2 * j - 2, 2 * j] += -1j * alpha[j - 1]
    for j in range(1, ell):
        upper[2 * j - 1, 2 * j + 1] += 1j * alpha[j - 1]
    upper[2 * ell - 1, 2 * ell] += 1j * alpha[ell - 1]
    # closing bond enters with its parity flip
    upper[0, 1] += -1j * alpha[L - 1]

    if coeffs.order == 2:
        for j in range(1, ell):
            upper[2 * j - 2, 2 * j + 2] += -1j * beta[j - 1]
        for j in range(1, ell - 1):
            upper[2 * j - 1, 2 * j + 3] += 1j * beta[j - 1]
        upper[2 * ell - 3, 2 * ell] += 1j * beta[ell - 2]
        upper[2 * ell - 2, 2 * ell - 1] += -1j * beta[ell - 1]
        upper[0, 3] += -1j * beta[L - 2]
        upper[1, 2] += 1j * beta[L - 1]

    return HoppingMatrix(upper + upper.conj().T)


def build_variational_bdg(coeffs: CDCoefficients) -> BdGMatrix:
    """Dirac-basis blocks: no particle-hole part, imaginary antisymmetric pairing"""
    L = coeffs.L
    alpha, beta = coeffs.alpha, coeffs.beta
    pairing = np.zeros((L, L), dtype=complex)

    bonds = np.arange(L - 1)
    pairing[bonds, bonds + 1] = -1j * alpha[bonds]
    pairing[0, L - 1] = -1j * alpha[L - 1]

    if coeffs.order == 2:
        reach = np.arange(L - 2)
        pairing[reach, reach + 2] = -1j * beta[reach]
        pairing[0, L - 2] = -1j * beta[L - 2]
        pairing[1, L - 1] = -1j * beta[L - 1]

    pairing = pairing - pairing.T
    return BdGMatrix(np.zeros((L, L), dtype=complex), pairing)


class CoefficientTable:
    """Variational coefficients tabulated on a uniform lambda grid, linearly interpolated"""

    def __init__(self, params: ModelParams, order: int, n_intervals: int = 1000, validate: bool = True):
        if order not in (1, 2):
            raise ParameterError(f"variational order must be 1 or 2, got {order}")
        if n_intervals < 10:
            raise ParameterError(f"coefficient grid needs at least 10 intervals, got {n_intervals}")
        self.params = params
        self.order = order
        self.grid = np.linspace(0.0, 1.0, n_intervals + 1)
        solve = solve_variational_first if order == 1 else solve_variational_second
        solved = [solve(params, float(lam)) for lam in self.grid]
        self._alpha = np.array([c.alpha for c in solved])
        self._beta = np.array([c.beta for c in solved])
        self.max_error = self.validate() if validate else None

    def __call__(self, lam: float) -> CDCoefficients:
        _check_lambda(lam)
        alpha = np.array([np.interp(lam, self.grid, column) for column in self._alpha.T])
        beta = np.array([np.interp(lam, self.grid, column) for column in self._beta.T])
        return CDCoefficients(order=self.order, alpha=alpha, beta=beta, lam=lam)

    def validate(self, tol: float = 1e-6) -> float:
        """Largest interpolation error at the grid midpoints"""
        solve = solve_variational_first if self.order == 1 else solve_variational_second
        midpoints = 0.5 * (self.grid[1:] + self.grid[:-1])
        worst = 0.0
        for lam in midpoints:
            exact = solve(self.params, float(lam))
            approx = self(float(lam))
            worst = max(
                worst,
                float(np.max(np.abs(exact.alpha - approx.alpha))),
                float(np.max(np.abs(exact.beta - approx.beta))),
            )
        if worst > tol:
            logger.warning("coefficient table interpolation error %.2e exceeds %.0e", worst, tol)
        return worst
