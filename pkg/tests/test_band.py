from __future__ import annotations

import numpy as np
import pytest

from greencut.band import (
    build_model,
    continue_delta,
    delta_from_offsets,
    describe_model,
    evaluate_delta,
    first_moment,
    flat_band,
    load_tabulated,
    power_edge,
    semicircle,
    tabulated,
)
from greencut.errors import ContinuationUnavailableError, InvalidModelError
from greencut.models import ModelKind


def test_semicircle_density_at_band_centre() -> None:
    assert evaluate_delta(semicircle(1.0), 0.0) == pytest.approx(1.0 / np.pi)


def test_density_vanishes_outside_band() -> None:
    for model in (semicircle(0.3), flat_band(0.3), power_edge(0.3, 2.0, 2.0)):
        assert evaluate_delta(model, 1.5) == 0.0
        assert evaluate_delta(model, -1.5) == 0.0


def test_power_edge_is_normalized_to_strength() -> None:
    model = power_edge(0.7, 2.0, 2.0)

    assert evaluate_delta(model, 0.0) == pytest.approx(0.7)
    assert evaluate_delta(model, 0.5) == pytest.approx(0.7 * 0.75**2)


def test_power_edge_asymmetric_peak_equals_strength() -> None:
    model = power_edge(1.0, 1.0, 3.0)
    grid = np.linspace(-1.0, 1.0, 20001)

    assert np.max(evaluate_delta(model, grid)) == pytest.approx(1.0, rel=1e-6)


def test_delta_from_offsets_keeps_edge_precision() -> None:
    model = power_edge(1.0, 2.0, 2.0)

    value = delta_from_offsets(model, 1e-12, 2.0 - 1e-12)

    assert float(value) == pytest.approx(1e-24 * (2.0 - 1e-12) ** 2, rel=1e-12)


def test_first_moment_matches_numeric_integral() -> None:
    grid = np.linspace(-1.0, 1.0, 200001)
    for model in (semicircle(0.4), flat_band(0.4), power_edge(0.4, 2.0, 1.0)):
        numeric = np.trapezoid(evaluate_delta(model, grid), grid)
        assert first_moment(model) == pytest.approx(numeric, rel=1e-6)


def test_semicircle_equals_half_exponent_power_edge() -> None:
    grid = np.linspace(-0.99, 0.99, 17)

    assert evaluate_delta(semicircle(1.0), grid) == pytest.approx(evaluate_delta(power_edge(1.0 / np.pi, 0.5, 0.5), grid))


def test_continuation_matches_density_on_band() -> None:
    for model in (semicircle(0.5), flat_band(0.5), power_edge(0.5, 1.5, 0.5)):
        assert continue_delta(model, 0.3) == pytest.approx(evaluate_delta(model, 0.3))


def test_semicircle_continuation_on_imaginary_axis() -> None:
    assert continue_delta(semicircle(np.pi), -0.5j) == pytest.approx(1.118034, abs=1e-6)


@pytest.mark.parametrize('model', [semicircle(0.7), power_edge(0.4, 1.5, 0.5)])
def test_continuation_satisfies_schwarz_reflection(model) -> None:
    rng = np.random.default_rng(11)
    w = rng.uniform(-3.0, 3.0, 200) + 1j * rng.uniform(-2.0, 2.0, 200)
    w = w[np.abs(w.imag) > 1e-6]

    assert len(w) >= 100
    np.testing.assert_allclose(continue_delta(model, w.conj()), np.conj(continue_delta(model, w)), rtol=1e-12, atol=1e-14)


def test_tabulated_has_no_continuation() -> None:
    model = tabulated([(-1.0, 0.0), (-0.5, 0.5), (0.5, 0.5), (1.0, 0.0)])

    with pytest.raises(ContinuationUnavailableError):
        continue_delta(model, 0.1j)


def test_tabulated_interpolates_and_defaults_edges() -> None:
    model = tabulated([(-0.8, 0.0), (-0.4, 0.3), (0.4, 0.3), (0.8, 0.0)])

    assert (model.band_bottom, model.band_top) == (-0.8, 0.8)
    assert model.strength == pytest.approx(0.3)
    assert evaluate_delta(model, 0.0) == pytest.approx(0.3)
    assert evaluate_delta(model, 0.9) == 0.0


def test_tabulated_needs_four_samples() -> None:
    with pytest.raises(InvalidModelError):
        tabulated([(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)])


def test_load_tabulated_reads_csv(tmp_path) -> None:
    p = tmp_path / 'delta.csv'
    p.write_text('E,delta\n-1,0\n-0.5,0.1\n0,0.2\n0.5,0.1\n1,0\n', encoding='utf-8')

    model = load_tabulated(p)

    assert model.kind is ModelKind.TABULATED
    assert len(model.samples) == 5
    assert first_moment(model) > 0.0


def test_build_model_maps_kind_names() -> None:
    assert build_model('semicircle', 0.2).kind is ModelKind.SEMICIRCLE
    assert build_model('power', 0.2, beta_bottom=2.0, beta_top=2.0).edge_exp_top == 2.0


def test_build_model_rejects_unknown_kind() -> None:
    with pytest.raises(InvalidModelError, match='unknown model kind'):
        build_model('lorentzian', 0.2)


def test_build_model_table_needs_path() -> None:
    with pytest.raises(InvalidModelError):
        build_model('table', 0.2)


def test_describe_model_is_json_friendly() -> None:
    out = describe_model(power_edge(0.2, 2.0, 1.0))

    assert out == {
        'kind': 'power',
        'delta0': 0.2,
        'band_bottom': -1.0,
        'band_top': 1.0,
        'beta_bottom': 2.0,
        'beta_top': 1.0,
    }
