from __future__ import annotations

import numpy as np
import pytest

from greencut.errors import AccuracyError
from greencut.quadrature import chebyshev_panels, oscillatory_nodes, oscillatory_sum, tanh_sinh_nodes


def test_tanh_sinh_weights_sum_to_interval_length() -> None:
    _, _, weights = tanh_sinh_nodes(5)

    assert np.sum(weights) == pytest.approx(2.0, abs=1e-12)


def test_tanh_sinh_integrates_edge_singularity() -> None:
    one_plus, one_minus, weights = tanh_sinh_nodes(6)

    value = np.sum(weights * np.sqrt(one_plus * one_minus))

    assert value == pytest.approx(np.pi / 2.0, abs=1e-12)


def test_tanh_sinh_offsets_stay_positive() -> None:
    one_plus, one_minus, _ = tanh_sinh_nodes(7)

    assert np.all(one_plus > 0.0)
    assert np.all(one_minus > 0.0)
    assert np.allclose(one_plus + one_minus, 2.0)


def test_chebyshev_panels_integrate_smooth_function() -> None:
    panels = chebyshev_panels(np.exp, 0.0, 1.0, abs_tol=1e-13, max_panels=64)

    assert panels.integral() == pytest.approx(np.e - 1.0, abs=1e-12)
    assert np.all(np.diff(panels.edges) > 0.0)


def test_chebyshev_panels_refine_near_kink() -> None:
    panels = chebyshev_panels(lambda x: np.abs(x - 0.3), 0.0, 1.0, abs_tol=1e-10, max_panels=4000)

    assert panels.count > 4
    assert panels.integral() == pytest.approx(0.5 * (0.3**2 + 0.7**2), abs=1e-9)


def test_chebyshev_panels_terminate_at_log_endpoint() -> None:
    panels = chebyshev_panels(lambda x: x * np.log(x), 0.0, 1.0, abs_tol=1e-10, max_panels=4000)

    assert panels.integral() == pytest.approx(-0.25, abs=1e-9)


def test_chebyshev_panels_accept_tolerance_below_roundoff() -> None:
    panels = chebyshev_panels(np.cos, 0.0, 40.0, abs_tol=1e-17, max_panels=4000)

    assert panels.integral() == pytest.approx(np.sin(40.0), abs=1e-12)


def test_chebyshev_panels_raise_when_budget_exceeded() -> None:
    with pytest.raises(AccuracyError, match='panels'):
        chebyshev_panels(lambda x: np.abs(x - 0.3) ** 0.5, 0.0, 1.0, abs_tol=1e-14, max_panels=4)


def _exact_sine_transform(t: float) -> complex:
    # integral of sin(x) exp(-i x t) over [0, pi]
    return (1.0 + np.exp(-1j * np.pi * t)) / (1.0 - t * t)


def test_oscillatory_sum_matches_closed_form() -> None:
    panels = chebyshev_panels(np.sin, 0.0, np.pi, abs_tol=1e-13, max_panels=64)
    times = np.array([0.0, 0.5, 3.0, 20.5])

    energies, coefficients = oscillatory_nodes(panels, lambda x: x, float(times[-1]), 4)
    values = oscillatory_sum(energies, coefficients, times)

    for t, v in zip(times, values):
        assert v == pytest.approx(_exact_sine_transform(t), abs=1e-11)


def test_oscillatory_sum_threads_match_serial() -> None:
    energies = np.linspace(-1.0, 1.0, 50)
    coefficients = np.cos(energies) + 0j
    times = np.linspace(0.0, 100.0, 700)

    serial = oscillatory_sum(energies, coefficients, times)
    threaded = oscillatory_sum(energies, coefficients, times, workers=3)

    assert np.allclose(serial, threaded, rtol=1e-14, atol=1e-14)
