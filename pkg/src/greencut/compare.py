"""Side-by-side evaluation of p(t) by several methods on one time grid."""

from __future__ import annotations

import itertools
import logging

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .models import BandModel, DiscretizationScheme, QuadratureConfig, SeriesMethod, SurvivalSeries
from .oracle import build_discrete_model, evolve_survival
from .survival import fgr_series, resonance_expansion, survival_amplitude

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Comparison:
    times: np.ndarray
    series: Dict[SeriesMethod, SurvivalSeries]
    deviations: Dict[Tuple[SeriesMethod, SeriesMethod], float]

    @property
    def warnings(self) -> Tuple[str, ...]:
        return tuple(w for s in self.series.values() for w in s.warnings)

    def header(self) -> Tuple[str, ...]:
        return ('t',) + tuple(f'p_{m.value}' for m in self.series)

    def columns(self) -> Tuple[np.ndarray, ...]:
        return (self.times,) + tuple(s.p for s in self.series.values())


def compute_series(
    method: SeriesMethod,
    model: BandModel,
    eps: float,
    times: Sequence[float],
    cfg: Optional[QuadratureConfig] = None,
    *,
    oracle_size: int = 2000,
    scheme: DiscretizationScheme = DiscretizationScheme.UNIFORM_LEVELS,
    workers: int = 1,
) -> SurvivalSeries:
    """Dispatch one method onto the survival or oracle module."""
    if method is SeriesMethod.CUT_INTEGRAL:
        return survival_amplitude(model, eps, times, cfg, workers=workers)
    if method is SeriesMethod.RESONANCE_EXPANSION:
        return resonance_expansion(model, eps, times, cfg)
    if method is SeriesMethod.FGR:
        return fgr_series(model, eps, times)
    dm = build_discrete_model(model, eps, oracle_size, scheme)
    return evolve_survival(dm, times, workers=workers)


def max_deviation(a: SurvivalSeries, b: SurvivalSeries, window: Optional[Tuple[float, float]] = None) -> float:
    """max |p_a - p_b| over the shared grid, optionally restricted to a time window."""
    mask = np.ones(a.times.shape, dtype=bool)
    if window is not None:
        mask = (a.times >= window[0]) & (a.times <= window[1])
    if not np.any(mask):
        return float('nan')
    return float(np.max(np.abs(a.p[mask] - b.p[mask])))


def compare_methods(
    model: BandModel,
    eps: float,
    methods: Sequence[SeriesMethod],
    times: Sequence[float],
    cfg: Optional[QuadratureConfig] = None,
    *,
    oracle_size: int = 2000,
    scheme: DiscretizationScheme = DiscretizationScheme.UNIFORM_LEVELS,
    workers: int = 1,
    window: Optional[Tuple[float, float]] = None,
) -> Comparison:
    """
    p(t) by each method on one grid, with the pairwise maximum deviations.

    Args:
        methods: Methods to run; duplicates are dropped, order is kept.
        window: Optional (t_lo, t_hi) restricting the deviations; the series
            still cover the whole grid.
    """
    t = np.asarray(times, dtype=float)
    ordered = list(dict.fromkeys(methods))
    series = {
        m: compute_series(m, model, eps, t, cfg, oracle_size=oracle_size, scheme=scheme, workers=workers) for m in ordered
    }
    deviations = {(a, b): max_deviation(series[a], series[b], window) for a, b in itertools.combinations(ordered, 2)}
    for (a, b), dev in deviations.items():
        logger.info('max |p_%s - p_%s| = %.3g', a.value, b.value, dev)
    return Comparison(times=t, series=series, deviations=deviations)
