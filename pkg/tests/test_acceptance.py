"""End-to-end checks of the decay laws against each other and against exact diagonalization."""

from __future__ import annotations

import numpy as np
import pytest

from scipy.integrate import quad

from greencut.band import flat_band, power_edge, semicircle
from greencut.models import DiscretizationScheme, PoleKind, QuadratureConfig
from greencut.oracle import build_discrete_model, discrete_bound_states, evolve_survival
from greencut.poles import real_poles_standard_sheet, threshold_audit
from greencut.self_energy import sigma_standard
from greencut.survival import (
    bound_state_beat,
    dominant_frequency,
    fgr_deviation,
    fgr_time,
    fgr_valid_window,
    resonance_expansion,
    survival_amplitude,
    tail_exponent,
    time_grid,
)

pytestmark = pytest.mark.slow

CHAIN = DiscretizationScheme.CHAIN_OF_SITES

SUM_RULE_CASES = [
    *((semicircle(d), eps) for d in (0.02, 0.1, 0.2, 0.6, 1.2) for eps in (-0.4,)),
    *((flat_band(d), eps) for d in (0.02, 0.1, 0.2, 0.6, 1.2) for eps in (0.3,)),
    (power_edge(0.2, 2.0, 2.0), 0.0),
    (power_edge(0.6, 0.5, 1.5), -0.2),
]


@pytest.mark.parametrize(('model', 'eps'), SUM_RULE_CASES)
def test_sum_rule_at_time_zero(model, eps) -> None:
    series = survival_amplitude(model, eps, [0.0])

    assert abs(series.g[0] - 1.0) <= 1e-6


def test_semicircle_closed_form_matches_quadrature() -> None:
    rng = np.random.default_rng(7)
    model = semicircle(0.7)

    def transform(w: complex) -> complex:
        def part(x: float, take) -> float:
            return take(0.7 / np.pi / (w - x))

        opts = dict(weight='alg', wvar=(0.5, 0.5), epsabs=1e-13, epsrel=1e-12, limit=500)
        re, _ = quad(part, -1.0, 1.0, args=(np.real,), **opts)
        im, _ = quad(part, -1.0, 1.0, args=(np.imag,), **opts)
        return complex(re, im)

    for _ in range(100):
        imag = 10.0 ** rng.uniform(-3.0, 0.5) * rng.choice([-1.0, 1.0])
        w = complex(rng.uniform(-2.0, 2.0), imag)
        assert abs(sigma_standard(model, w) - transform(w)) <= 1e-8


def test_golden_rule_regime_at_weak_coupling() -> None:
    model, eps = flat_band(0.02), -0.4
    tau = fgr_time(model, eps)
    series = survival_amplitude(model, eps, time_grid(20.0 * tau, 800))
    deviation = fgr_deviation(series, tau)
    early = series.times <= 5.0 * tau
    late = (series.times >= 9.0 * tau) & (series.times <= 20.0 * tau)

    assert np.max(deviation[early]) <= 0.3
    assert np.max(deviation[late]) >= 0.2
    assert fgr_valid_window(series, tau) >= 1.0 * tau


def test_golden_rule_regime_absent_at_strong_coupling() -> None:
    model, eps = flat_band(0.2), -0.4
    tau = fgr_time(model, eps)
    series = survival_amplitude(model, eps, time_grid(20.0 * tau, 400))

    assert np.max(fgr_deviation(series, tau)[series.times < tau]) > 0.1
    assert fgr_valid_window(series, tau) < tau


def test_bound_state_beat_sets_late_oscillation() -> None:
    model, eps = flat_band(0.2), -0.4
    tau = fgr_time(model, eps)
    series = survival_amplitude(model, eps, time_grid(100.0 * tau, 4000))
    beat = bound_state_beat(series.poles)

    assert beat == pytest.approx(2.074, abs=5e-3)
    assert dominant_frequency(series, 0.5) == pytest.approx(beat, rel=0.02)


@pytest.mark.parametrize(
    ('model', 'eps', 'scheme'),
    [
        (flat_band(0.02), -0.4, DiscretizationScheme.UNIFORM_LEVELS),
        (flat_band(0.2), -0.4, DiscretizationScheme.UNIFORM_LEVELS),
        (semicircle(0.02), 0.0, CHAIN),
        (semicircle(0.2), 0.3, CHAIN),
    ],
)
def test_continuum_matches_oracle(model, eps, scheme) -> None:
    times = np.linspace(0.0, 100.0, 401)
    oracle = evolve_survival(build_discrete_model(model, eps, 2000, scheme), times)
    continuum = survival_amplitude(model, eps, times)

    assert np.max(np.abs(continuum.p - oracle.p)) <= 5e-3


@pytest.mark.parametrize(
    ('model', 'eps', 'window', 'alpha', 'tol'),
    [
        (semicircle(0.1), 0.0, (200.0, 800.0), 1.5, 0.1),
        (power_edge(0.2, 2.0, 2.0), 0.0, (40.0, 200.0), 3.0, 0.15),
        (flat_band(0.02), -0.4, (400.0, 1200.0), 1.0, 0.1),
    ],
)
def test_tail_exponents(model, eps, window, alpha, tol) -> None:
    t_lo, t_hi = window
    times = np.linspace(0.95 * t_lo, t_hi, int(8 * (t_hi - 0.95 * t_lo)))
    series = survival_amplitude(model, eps, times, QuadratureConfig(abs_tol=1e-13))

    assert tail_exponent(series, window) == pytest.approx(alpha, abs=tol)


def test_cut_and_resonance_expansion_agree() -> None:
    model, eps = semicircle(0.05), 0.0
    tau = fgr_time(model, eps)
    times = np.linspace(5.0 * tau, 20.0 * tau, 301)

    cut = survival_amplitude(model, eps, times)
    expansion = resonance_expansion(model, eps, times)

    assert np.max(np.abs(cut.g - expansion.g)) <= 1e-6


@pytest.mark.parametrize(
    ('model', 'eps', 'scheme'),
    [
        (semicircle(1.2), 0.0, CHAIN),
        (semicircle(1.8), 0.3, CHAIN),
        (flat_band(0.2), 0.0, DiscretizationScheme.UNIFORM_LEVELS),
    ],
)
def test_bound_states_match_oracle_outliers(model, eps, scheme) -> None:
    poles = [p for p in real_poles_standard_sheet(model, eps) if p.kind is PoleKind.BOUND_STATE]
    outliers = discrete_bound_states(build_discrete_model(model, eps, 2000, scheme))

    assert len(outliers) == len(poles)
    for pole, (energy, overlap) in zip(poles, outliers):
        assert energy == pytest.approx(pole.energy.real, abs=5e-4)
        assert overlap == pytest.approx(pole.weight.real, abs=2e-3)


def test_threshold_audit_report() -> None:
    rows = threshold_audit([0.0, 0.4, -0.4, 0.6, -0.6])

    assert [row['eps'] for row in rows] == [0.0, 0.4, -0.4, 0.6, -0.6]
    assert all(row['confirmed'] for row in rows)
