"""Single-particle matrices of the bottleneck chain.

Two representations are used throughout:

* ``HoppingMatrix``: L x L Hermitian matrix in the reflection-symmetrized Gamma basis,
  where the many-body operator is ``2 Gamma^+ M Gamma^-`` (plus a constant).
* ``BdGMatrix``: 2L x 2L quadratic form ``Psi^dagger H Psi`` in the Dirac basis with
  ``Psi = (c_1 .. c_L, c_1^dagger .. c_L^dagger)``.

Indices are 0-based in code; bond ``j`` couples sites ``j`` and ``j + 1 (mod L)``.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from models.chain_models import ModelParams, build_couplings
from models.errors import ParameterError

HERMITIAN_TOL = 1e-10


def _check_lambda(lam: float):
    if not 0.0 <= lam <= 1.0:
        raise ParameterError(f"lambda must lie in [0, 1], got {lam}")


@dataclass(frozen=True, eq=False)
class HoppingMatrix:
    """Model representing a Gamma-basis quadratic generator"""
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        m = self.entries
        return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, atol=tol, rtol=0.0)

    def require_hermitian(self, tol: float = HERMITIAN_TOL) -> "HoppingMatrix":
        if not self.is_hermitian(tol):
            raise ParameterError("Gamma-basis matrix must be square and Hermitian")
        return self

    def __add__(self, other: "HoppingMatrix") -> "HoppingMatrix":
        return HoppingMatrix(self.entries + other.entries)

    def scaled(self, factor: float) -> "HoppingMatrix":
        return HoppingMatrix(factor * self.entries)

    @classmethod
    def zeros(cls, L: int) -> "HoppingMatrix":
        return cls(np.zeros((L, L), dtype=complex))


@dataclass(frozen=True, eq=False)
class BdGMatrix:
    """Model representing a Dirac-basis quadratic form in (annihilator, creator) layout.

    ``constant`` holds the additive c-number dropped when the form was brought to
    canonical order; it never enters the dynamics.
    """
    particle_hole: np.ndarray
    pairing: np.ndarray
    constant: float = 0.0

    @property
    def L(self) -> int:
        return self.particle_hole.shape[0]

    @property
    def dim(self) -> int:
        return 2 * self.L

    @property
    def full(self) -> np.ndarray:
        a, b = self.particle_hole, self.pairing
        return np.block([[a, b], [-b.conj(), -a.conj()]])

    @classmethod
    def from_full(cls, full: np.ndarray, constant: float = 0.0) -> "BdGMatrix":
        L = full.shape[0] // 2
        return cls(np.array(full[:L, :L], dtype=complex), np.array(full[:L, L:], dtype=complex), constant)

    @classmethod
    def zeros(cls, L: int) -> "BdGMatrix":
        return cls(np.zeros((L, L), dtype=complex), np.zeros((L, L), dtype=complex))

    def symmetry_violation(self) -> float:
        """Largest deviation from a Hermitian particle-hole block and an antisymmetric pairing block"""
        a, b = self.particle_hole, self.pairing
        return float(max(np.max(np.abs(a - a.conj().T), initial=0.0), np.max(np.abs(b + b.T), initial=0.0)))

    def __add__(self, other: "BdGMatrix") -> "BdGMatrix":
        return BdGMatrix(
            self.particle_hole + other.particle_hole,
            self.pairing + other.pairing,
            self.constant + other.constant,
        )

    def scaled(self, factor: float) -> "BdGMatrix":
        return BdGMatrix(factor * self.particle_hole, factor * self.pairing, factor * self.constant)


def build_hopping_matrix(params: ModelParams, lam: float) -> HoppingMatrix:
    """Effective single-particle Hamiltonian in the Gamma basis"""
    _check_lambda(lam)
    couplings = build_couplings(params)
    L, ell = params.L, params.ell
    m = np.zeros((L, L), dtype=complex)
    m[0, 0] = -lam * couplings.plain[L - 1]
    m[L - 1, L - 1] = lam - 1.0

    pairs = np.arange(ell)
    # (Gamma_{2j-1}, Gamma_{2j}) dimers carry the transverse field
    m[2 * pairs, 2 * pairs + 1] = lam - 1.0
    # (Gamma_{2j}, Gamma_{2j+1}) links carry the bond couplings J_1 .. J_ell
    m[2 * pairs + 1, 2 * pairs + 2] = lam * couplings.plain[pairs]
    upper = np.triu(m, k=1)
    return HoppingMatrix(m + upper.T)


def build_hopping_derivative(params: ModelParams, lam: float = 0.0) -> HoppingMatrix:
    """Closed-form d/dlambda of the Gamma-basis Hamiltonian (independent of lambda)"""
    _check_lambda(lam)
    couplings = build_couplings(params)
    L, ell = params.L, params.ell
    m = np.zeros((L, L), dtype=complex)
    m[0, 0] = -couplings.plain[L - 1]
    m[L - 1, L - 1] = 1.0
    pairs = np.arange(ell)
    m[2 * pairs, 2 * pairs + 1] = 1.0
    m[2 * pairs + 1, 2 * pairs + 2] = couplings.plain[pairs]
    upper = np.triu(m, k=1)
    return HoppingMatrix(m + upper.T)


def build_bdg_hamiltonian(params: ModelParams, lam: float) -> BdGMatrix:
    """Dirac-basis blocks of H[lambda] in the even-parity sector"""
    _check_lambda(lam)
    couplings = build_couplings(params)
    L = params.L
    J = couplings.plain
    a = (1.0 - lam) * np.eye(L, dtype=complex)
    b = np.zeros((L, L), dtype=complex)

    bonds = np.arange(L - 1)
    a[bonds, bonds + 1] = -lam * J[bonds] / 2.0
    a[bonds + 1, bonds] = -lam * J[bonds] / 2.0
    b[bonds, bonds + 1] = -lam * J[bonds] / 2.0
    b[bonds + 1, bonds] = lam * J[bonds] / 2.0

    # closing bond uses the parity-flipped coupling -J_L
    a[0, L - 1] = a[L - 1, 0] = lam * J[L - 1] / 2.0
    b[0, L - 1] = -lam * J[L - 1] / 2.0
    b[L - 1, 0] = lam * J[L - 1] / 2.0
    return BdGMatrix(a, b)


@lru_cache(maxsize=64)
def _gamma_transform_cached(L: int) -> np.ndarray:
    ell = (L - 1) // 2
    w = np.zeros((L, 2 * L), dtype=complex)
    half = 0.5j

    def add(row, site, coeff_c, coeff_cdag):
        w[row, site] += coeff_c
        w[row, L + site] += coeff_cdag

    for j in range(ell + 1):
        mirror = L - 1 - j
        # Gamma^+_{2j-1} = i (c_j + c_j^dag + c_m - c_m^dag) / 2
        add(2 * j, j, half, half)
        add(2 * j, mirror, half, -half)
    for j in range(ell):
        mirror = L - 1 - j
        # Gamma^+_{2j} = i (c_j - c_j^dag + c_m + c_m^dag) / 2
        add(2 * j + 1, j, half, -half)
        add(2 * j + 1, mirror, half, half)
    w.setflags(write=False)
    return w


def gamma_transform(L: int) -> np.ndarray:
    """Rows express Gamma^+_k as linear combinations of Psi; unitary rows (W W^dag = 1)"""
    if L < 5 or L % 2 != 1:
        raise ParameterError(f"Gamma basis needs odd L >= 5, got {L}")
    return _gamma_transform_cached(L)


def _swap_halves(matrix: np.ndarray, L: int) -> np.ndarray:
    perm = np.concatenate([np.arange(L, 2 * L), np.arange(L)])
    return matrix[np.ix_(perm, perm)]


def gamma_to_bdg(gamma_matrix: HoppingMatrix) -> BdGMatrix:
    """Dirac-basis blocks of the operator 2 Gamma^+ M Gamma^-.

    The quadratic form is brought to canonical BdG order (Hermitian particle-hole block,
    antisymmetric pairing block); the c-number generated on the way is kept in ``constant``.
    """
    gamma_matrix.require_hermitian()
    m = gamma_matrix.entries
    L = m.shape[0]
    w = gamma_transform(L)
    # Gamma^-_k = sum_b w_minus[k, b] Psi_b
    w_minus = np.hstack([w[:, L:].conj(), w[:, :L].conj()])
    raw = 2.0 * w_minus.conj().T @ m @ w_minus
    canonical = 0.5 * (raw - _swap_halves(raw.T, L))
    return BdGMatrix(
        particle_hole=canonical[:L, :L].copy(),
        pairing=canonical[:L, L:].copy(),
        constant=float(0.5 * np.trace(raw).real),
    )
