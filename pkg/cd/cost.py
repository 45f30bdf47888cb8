from typing import Callable, Union

import numpy as np

from models.chain_models import Schedule
from models.errors import ParameterError
from models.matrix_models import BdGMatrix, HoppingMatrix

Matrix = Union[HoppingMatrix, BdGMatrix]
CostGenerator = Callable[[float, float], Matrix]


def hs_cost(matrix: Matrix) -> float:
    """Hilbert-Schmidt norm squared, sum of |M_nm|^2"""
    entries = matrix.full if isinstance(matrix, BdGMatrix) else matrix.entries
    return float(np.sum(np.abs(entries) ** 2))


def time_averaged_cost(generator: CostGenerator, schedule: Schedule, n_steps: int = 1000) -> float:
    """(1/T) integral of ||generator(lambda, lambda_dot)||^2 dt, midpoint rule in s = t/T.

    Pass a generator that ignores lambda_dot to average ||H_1||^2 itself.
    """
    if n_steps < 100:
        raise ParameterError(f"time average needs at least 100 steps, got {n_steps}")
    midpoints = (np.arange(n_steps) + 0.5) / n_steps
    total = 0.0
    for s in midpoints:
        total += hs_cost(generator(schedule.lam(s), schedule.lam_dot(s)))
    return total / n_steps
