from __future__ import annotations

import numpy as np
import pytest

from greencut.band import flat_band, semicircle
from greencut.compare import compare_methods, compute_series, max_deviation
from greencut.models import DiscretizationScheme, SeriesMethod, SurvivalSeries

CUT = SeriesMethod.CUT_INTEGRAL
ORACLE = SeriesMethod.ORACLE
FGR = SeriesMethod.FGR


def test_compute_series_dispatch() -> None:
    times = [0.5, 1.0]
    for method in SeriesMethod:
        series = compute_series(method, semicircle(0.2), 0.1, times, oracle_size=200)
        assert series.method is method
        assert series.times.tolist() == times


def test_max_deviation_window() -> None:
    times = np.array([0.0, 1.0, 2.0])
    a = SurvivalSeries(times=times, g=np.array([1.0, 0.5, 0.5], dtype=complex), method=CUT)
    b = SurvivalSeries(times=times, g=np.array([1.0, 0.5, 0.0], dtype=complex), method=FGR)

    assert max_deviation(a, b) == pytest.approx(0.25)
    assert max_deviation(a, b, (0.0, 1.5)) == 0.0
    assert np.isnan(max_deviation(a, b, (5.0, 6.0)))


def test_comparison_columns_follow_method_order() -> None:
    times = np.linspace(0.0, 10.0, 21)
    comparison = compare_methods(flat_band(0.05), -0.4, [CUT, FGR, CUT], times)

    assert comparison.header() == ('t', 'p_cut', 'p_fgr')
    assert len(comparison.columns()) == 3
    assert list(comparison.deviations) == [(CUT, FGR)]


def test_cut_and_chain_oracle_agree() -> None:
    times = np.linspace(0.0, 30.0, 61)
    comparison = compare_methods(
        semicircle(0.2),
        0.3,
        [CUT, ORACLE],
        times,
        oracle_size=2000,
        scheme=DiscretizationScheme.CHAIN_OF_SITES,
    )

    assert comparison.deviations[(CUT, ORACLE)] < 1e-6
    assert comparison.warnings == ()


def test_compare_methods_restricts_deviations_to_window() -> None:
    times = np.linspace(0.0, 40.0, 81)
    full = compare_methods(flat_band(0.05), -0.4, [CUT, FGR], times)
    early = compare_methods(flat_band(0.05), -0.4, [CUT, FGR], times, window=(0.0, 5.0))

    assert len(early.series[CUT].p) == len(times)
    assert early.deviations[(CUT, FGR)] == max_deviation(full.series[CUT], full.series[FGR], (0.0, 5.0))
    assert early.deviations[(CUT, FGR)] <= full.deviations[(CUT, FGR)]
