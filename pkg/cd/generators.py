"""Dispatch from a cd_mode name to the matching counterdiabatic matrices."""
from typing import Callable, Optional

from models.chain_models import ModelParams, Schedule
from models.errors import ParameterError
from models.matrix_models import BdGMatrix, HoppingMatrix, build_hopping_matrix, gamma_to_bdg
from cd.agp import exact_agp_single_particle
from cd.qbcd import QBCDTerm, build_qbcd
from cd.variational import (
    CoefficientTable,
    build_variational_bdg,
    build_variational_gamma,
    solve_variational_first,
    solve_variational_second,
)

CD_MODES = ("bare", "var1", "var2", "qbcd", "exact_agp")


def check_cd_mode(cd_mode: str) -> str:
    if cd_mode not in CD_MODES:
        raise ParameterError(f"unknown cd_mode {cd_mode!r}; expected one of {', '.join(CD_MODES)}")
    return cd_mode


class CDMatrices:
    """Counterdiabatic matrices for one (params, cd_mode), in both bases.

    The QBCD term is built once and reused; variational coefficients are solved per call
    unless a coefficient table is supplied.
    """

    def __init__(self, params: ModelParams, cd_mode: str, table: Optional[CoefficientTable] = None):
        self.params = params
        self.cd_mode = check_cd_mode(cd_mode)
        self.table = table
        self._qbcd: Optional[QBCDTerm] = None
        self._qbcd_bdg: Optional[BdGMatrix] = None

    @property
    def qbcd(self) -> QBCDTerm:
        if self._qbcd is None:
            self._qbcd = build_qbcd(self.params)
        return self._qbcd

    def coefficients(self, lam: float):
        if self.table is not None:
            return self.table(lam)
        if self.cd_mode == "var1":
            return solve_variational_first(self.params, lam)
        return solve_variational_second(self.params, lam)

    def gamma(self, lam: float) -> HoppingMatrix:
        if self.cd_mode == "bare":
            return HoppingMatrix.zeros(self.params.L)
        if self.cd_mode in ("var1", "var2"):
            return build_variational_gamma(self.coefficients(lam))
        if self.cd_mode == "qbcd":
            return self.qbcd.gamma_matrix
        return exact_agp_single_particle(self.params, lam)

    def bdg(self, lam: float) -> BdGMatrix:
        if self.cd_mode == "bare":
            return BdGMatrix.zeros(self.params.L)
        if self.cd_mode in ("var1", "var2"):
            return build_variational_bdg(self.coefficients(lam))
        if self.cd_mode == "qbcd":
            if self._qbcd_bdg is None:
                self._qbcd_bdg = gamma_to_bdg(self.qbcd.gamma_matrix)
            return self._qbcd_bdg
        return gamma_to_bdg(exact_agp_single_particle(self.params, lam))


def cd_gap_generator(params: ModelParams, cd_mode: str, total_time: float) -> Callable[[float], HoppingMatrix]:
    """lambda -> H[lambda] + lambda_dot(lambda; T) * A[lambda] for CD-assisted gap scans"""
    matrices = CDMatrices(params, cd_mode)
    schedule = Schedule(total_time)

    def generator(lam: float) -> HoppingMatrix:
        bare = build_hopping_matrix(params, lam)
        if cd_mode == "bare":
            return bare
        return bare + matrices.gamma(lam).scaled(schedule.lam_dot_at(lam))

    return generator


def bare_gap_generator(params: ModelParams) -> Callable[[float], HoppingMatrix]:
    return lambda lam: build_hopping_matrix(params, lam)
