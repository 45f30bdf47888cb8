import math
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np

from models.errors import ParameterError

# J' this close to J^2 leaves the localized-crossing regime
DEGENERACY_MARGIN = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Model representing the bottleneck chain: half-length ell and couplings J, J'"""
    ell: int
    J: float = 0.5
    Jp: float = 0.27

    def __post_init__(self):
        if not isinstance(self.ell, (int, np.integer)) or isinstance(self.ell, bool):
            raise ParameterError(f"ell must be an integer, got {self.ell!r}")
        if self.ell < 2:
            raise ParameterError(f"ell must be >= 2 (L >= 5), got {self.ell}")
        if not 0.0 < self.Jp < self.J < 1.0:
            raise ParameterError(f"couplings must satisfy 0 < J' < J < 1, got J={self.J}, J'={self.Jp}")
        if self.J ** 2 >= self.Jp:
            raise ParameterError(
                f"J^2 < J' is required for a localized crossing, got J^2={self.J ** 2:.6g}, J'={self.Jp}"
            )
        if abs(self.Jp - self.J ** 2) < DEGENERACY_MARGIN:
            raise ParameterError(f"J' within {DEGENERACY_MARGIN} of J^2 is outside the crossing regime")

    @property
    def L(self) -> int:
        """Number of sites"""
        return 2 * self.ell + 1

    @classmethod
    def from_length(cls, L: int, J: float = 0.5, Jp: float = 0.27) -> "ModelParams":
        if L % 2 != 1:
            raise ParameterError(f"chain length must be odd, got L={L}")
        return cls(ell=(L - 1) // 2, J=J, Jp=Jp)

    def with_ell(self, ell: int) -> "ModelParams":
        return replace(self, ell=ell)

    def to_dict(self):
        """Convert parameters to dictionary"""
        return {'ell': int(self.ell), 'L': int(self.L), 'J': float(self.J), 'Jp': float(self.Jp)}


@dataclass(frozen=True, eq=False)
class CouplingSet:
    """Signed bond couplings of the chain, 0-indexed by bond j = (j, j+1 mod L)"""
    plain: np.ndarray
    parity_flipped: np.ndarray
    kink_signs: np.ndarray

    @property
    def L(self) -> int:
        return len(self.plain)

    @property
    def kink_weights(self) -> np.ndarray:
        """Kink signs with the last bond parity-flipped.

        In the even sector sigma^z_L sigma^z_1 equals minus the periodic fermion bond,
        so these are the weights that multiply the fermionic bond correlators.
        """
        weights = self.kink_signs.astype(float)
        weights[-1] = -weights[-1]
        return weights


def build_couplings(params: ModelParams) -> CouplingSet:
    """Build plain, parity-flipped and kink-sign coupling arrays"""
    L, ell = params.L, params.ell
    plain = np.ones(L)
    # bonds ell and ell+1 (1-indexed) are the weak ones
    plain[ell - 1] = params.J
    plain[ell] = params.J
    plain[L - 1] = -params.Jp

    parity_flipped = plain.copy()
    parity_flipped[L - 1] = -plain[L - 1]

    kink_signs = np.sign(plain).astype(int)

    for array in (plain, parity_flipped, kink_signs):
        array.setflags(write=False)
    return CouplingSet(plain=plain, parity_flipped=parity_flipped, kink_signs=kink_signs)


@dataclass(frozen=True)
class Schedule:
    """Cubic ramp lambda(s) = 3s^2 - 2s^3 over total time T"""
    total_time: float
    kind: str = field(default="cubic")

    def __post_init__(self):
        if not self.total_time > 0:
            raise ParameterError(f"total time must be positive, got T={self.total_time}")
        if self.kind != "cubic":
            raise ParameterError(f"unsupported schedule kind {self.kind!r}")

    def lam(self, s: float) -> float:
        return s * s * (3.0 - 2.0 * s)

    def lam_dot(self, s: float) -> float:
        return 6.0 * s * (1.0 - s) / self.total_time

    def at_time(self, t: float) -> Tuple[float, float]:
        return schedule_eval(self, t / self.total_time)

    @staticmethod
    def s_of_lambda(lam: float) -> float:
        """Inverse of the cubic ramp on [0, 1]"""
        if not 0.0 <= lam <= 1.0:
            raise ParameterError(f"lambda must lie in [0, 1], got {lam}")
        return 0.5 - math.sin(math.asin(1.0 - 2.0 * lam) / 3.0)

    def lam_dot_at(self, lam: float) -> float:
        """Ramp velocity expressed as a function of lambda"""
        return self.lam_dot(self.s_of_lambda(lam))


def schedule_eval(sched: Schedule, s: float) -> Tuple[float, float]:
    """Return (lambda, dlambda/dt) at dimensionless time s = t/T"""
    if not 0.0 <= s <= 1.0:
        raise ParameterError(f"s must lie in [0, 1], got {s}")
    return sched.lam(s), sched.lam_dot(s)
