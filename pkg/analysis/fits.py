"""Least-squares fits and derived timescales.

All fits are closed-form ordinary least squares through ``scipy.stats.linregress`` on
log-transformed data, so repeated calls return identical results.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from models.errors import ParameterError

logger = logging.getLogger(__name__)

MIN_POINTS = 4
KZ_PLATEAU_LEVEL = 1.5
KZ_SATURATION_FRACTION = 0.3

Window = Tuple[int, int]


@dataclass(frozen=True)
class FitResult:
    """Model representing a straight-line fit y = slope * x + intercept"""
    slope: float
    intercept: float
    stderr: float
    window: Window
    n_points: int

    @property
    def rate(self) -> float:
        """Decay rate of an exponential fit, -slope"""
        return -self.slope

    @property
    def amplitude(self) -> float:
        """Prefactor exp(intercept) of an exponential or power-law fit"""
        return math.exp(self.intercept)

    def to_dict(self):
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'stderr': self.stderr,
            'window_start': self.window[0],
            'window_stop': self.window[1],
            'n_points': self.n_points,
        }


def _as_columns(data: Iterable[Sequence[float]], what: str) -> Tuple[np.ndarray, np.ndarray]:
    pairs = np.asarray(list(data), dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ParameterError(f"{what} expects a list of (x, y) pairs")
    if pairs.shape[0] < MIN_POINTS:
        raise ParameterError(f"{what} needs at least {MIN_POINTS} points, got {pairs.shape[0]}")
    order = np.argsort(pairs[:, 0], kind="stable")
    return pairs[order, 0], pairs[order, 1]


def _line(x: np.ndarray, y: np.ndarray, window: Window) -> FitResult:
    if np.unique(x).size < 2:
        raise ParameterError("fit needs at least two distinct abscissae")
    result = stats.linregress(x, y)
    stderr = float(result.stderr) if np.isfinite(result.stderr) else 0.0
    return FitResult(float(result.slope), float(result.intercept), stderr, window, int(x.size))


def fit_exponential(data: Iterable[Sequence[float]]) -> FitResult:
    """Fit ln(Delta) = intercept + slope * L over (L, Delta) pairs; rate() is the decay exponent"""
    sizes, gaps = _as_columns(data, "fit_exponential")
    if np.any(gaps <= 0) or not np.all(np.isfinite(gaps)):
        raise ParameterError("fit_exponential needs strictly positive, finite gaps")
    if gaps.max() / gaps.min() < 10.0:
        logger.warning(
            "gap data spans %.2f decades (< 1); the fitted rate is poorly constrained",
            math.log10(gaps.max() / gaps.min()),
        )
    return _line(sizes, np.log(gaps), (0, sizes.size))


def fit_power_law_approach(data: Iterable[Sequence[float]], alpha: float) -> FitResult:
    """Fit ln(alpha - alpha_cd) = ln(delta) + exponent * ln(T) over (T, alpha_cd) pairs.

    The slope is the exponent and amplitude() is delta.
    """
    times, alpha_cd = _as_columns(data, "fit_power_law_approach")
    if np.any(times <= 0):
        raise ParameterError("driving times must be positive")
    shortfall = alpha - alpha_cd
    if np.any(shortfall <= 0):
        raise ParameterError(f"every alpha_cd must stay below alpha={alpha}")
    return _line(np.log(times), np.log(shortfall), (0, times.size))


def adiabatic_time(alpha: float, L: int, delta0: float) -> float:
    """T_ad = Delta_min^-2 with Delta_min = delta0 * exp(-alpha L), unit prefactor"""
    if alpha <= 0 or L <= 0 or delta0 <= 0:
        raise ParameterError("adiabatic_time needs positive alpha, L and delta0")
    return (delta0 * math.exp(-alpha * L)) ** -2


def estimate_adiabatic_time(alpha: float, delta: float, L: int, delta0: float) -> float:
    """Linearized CD-corrected adiabatic time T_ad * (1 - 2 delta L / T_ad^2)"""
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    t_ad = adiabatic_time(alpha, L, delta0)
    correction = 2.0 * delta * L / t_ad ** 2
    if correction >= 1.0:
        raise ParameterError(
            f"correction 2*delta*L/T_ad^2 = {correction:.3g} >= 1: outside the linearized regime"
        )
    if correction > 0.5:
        logger.warning("correction %.3g is large; linearized estimate is unreliable", correction)
    return t_ad * (1.0 - correction)


def select_kz_window(data: Iterable[Sequence[float]], L: Optional[int] = None) -> Window:
    """Widest contiguous log-T run with 1.5 <= <K> <= 0.3 L/2, indices into the T-sorted data"""
    times, kinks = _as_columns(data, "select_kz_window")
    upper = np.inf if L is None else KZ_SATURATION_FRACTION * L / 2.0
    inside = (kinks >= KZ_PLATEAU_LEVEL) & (kinks <= upper)

    best: Optional[Window] = None
    best_span = -1.0
    start = None
    for i, flag in enumerate(list(inside) + [False]):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start >= MIN_POINTS:
                span = math.log(times[i - 1] / times[start])
                if span > best_span:
                    best, best_span = (start, i), span
            start = None
    if best is None:
        raise ParameterError(
            f"no contiguous run of {MIN_POINTS} points with {KZ_PLATEAU_LEVEL} <= <K> <= {upper:g}"
        )
    logger.debug("KZ window %s spans %.2f e-folds of T", best, best_span)
    return best


def kz_slope(
    data: Iterable[Sequence[float]],
    window: Optional[Window] = None,
    L: Optional[int] = None,
) -> FitResult:
    """Log-log slope of <K> against T inside the pre-plateau window"""
    pairs = list(data)
    times, kinks = _as_columns(pairs, "kz_slope")
    if window is None:
        window = select_kz_window(pairs, L)
    start, stop = window
    if not 0 <= start < stop <= times.size or stop - start < MIN_POINTS:
        raise ParameterError(f"window {window} must select at least {MIN_POINTS} of {times.size} points")
    if np.any(times[start:stop] <= 0):
        raise ParameterError("driving times must be positive")
    if np.any(kinks[start:stop] < KZ_PLATEAU_LEVEL):
        raise ParameterError(f"window {window} reaches the plateau (<K> < {KZ_PLATEAU_LEVEL})")
    return _line(np.log(times[start:stop]), np.log(kinks[start:stop]), (start, stop))


def alpha_cd_table(rows: Iterable[dict]) -> pd.DataFrame:
    """Fit alpha_cd(T) for every (cd_mode, T) group of CD gap-scan rows"""
    frame = pd.DataFrame(list(rows))
    columns = ['cd_mode', 'T', 'alpha_cd', 'stderr', 'n_points']
    if frame.empty:
        return pd.DataFrame(columns=columns)

    records = []
    for (cd_mode, T), group in frame.groupby(['cd_mode', 'T'], sort=True):
        if len(group) < MIN_POINTS:
            logger.warning("skipping %s T=%g: only %d sizes", cd_mode, T, len(group))
            continue
        fit = fit_exponential(zip(group['L'], group['delta_min']))
        records.append(
            {'cd_mode': cd_mode, 'T': T, 'alpha_cd': fit.rate, 'stderr': fit.stderr, 'n_points': fit.n_points}
        )
    return pd.DataFrame(records, columns=columns)
