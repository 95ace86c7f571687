from __future__ import annotations

import numpy as np
import pytest

from scipy.integrate import quad
from scipy.linalg import eigh

from greencut.band import evaluate_delta, flat_band, power_edge, semicircle
from greencut.errors import DomainError, HorizonWarning, SchemeMismatchError
from greencut.models import DiscretizationScheme, SeriesMethod
from greencut.oracle import (
    arrowhead_hamiltonian,
    build_discrete_model,
    chain_hamiltonian,
    discrete_bound_states,
    discrete_self_energy,
    evolve_state,
    evolve_survival,
    recurrence_horizon,
    spectrum,
)
from greencut.self_energy import sigma_standard

CHAIN = DiscretizationScheme.CHAIN_OF_SITES


def test_too_few_levels_is_rejected() -> None:
    with pytest.raises(DomainError):
        build_discrete_model(flat_band(0.1), 0.0, 15)


def test_chain_scheme_needs_semicircle() -> None:
    with pytest.raises(SchemeMismatchError):
        build_discrete_model(flat_band(0.1), 0.0, 64, CHAIN)


def test_uniform_levels_fill_band() -> None:
    dm_model = power_edge(0.3, 1.0, 1.0)
    dm = build_discrete_model(dm_model, 0.1, 100)

    assert dm.size == 100
    assert dm.band_levels[0] == pytest.approx(-0.99)
    assert dm.band_levels[-1] == pytest.approx(0.99)
    total, _ = quad(lambda x: float(evaluate_delta(dm_model, x)), -1.0, 1.0)
    assert np.sum(dm.couplings**2) == pytest.approx(total, rel=1e-4)


def test_chain_couplings_carry_full_weight() -> None:
    dm = build_discrete_model(semicircle(0.4), 0.0, 200, CHAIN)

    # sum_k V_k^2 = V^2 = delta0 / 2
    assert np.sum(dm.couplings**2) == pytest.approx(0.2, rel=1e-12)


def test_chain_and_arrowhead_forms_share_spectrum() -> None:
    dm = build_discrete_model(semicircle(0.4), 0.2, 64, CHAIN)
    energies, overlaps = spectrum(dm)
    dense, vectors = eigh(arrowhead_hamiltonian(dm))

    np.testing.assert_allclose(energies, dense, atol=1e-12)
    np.testing.assert_allclose(overlaps, vectors[0] ** 2, atol=1e-12)


def test_chain_hamiltonian_requires_chain_model() -> None:
    with pytest.raises(SchemeMismatchError):
        chain_hamiltonian(build_discrete_model(flat_band(0.1), 0.0, 32))


def test_survival_starts_at_one() -> None:
    dm = build_discrete_model(flat_band(0.05), -0.4, 400)
    series = evolve_survival(dm, [0.0, 1.0, 2.0])

    assert series.method is SeriesMethod.ORACLE
    assert series.g[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(series.p <= 1.0 + 1e-12)


def test_state_norm_is_conserved() -> None:
    dm = build_discrete_model(semicircle(0.3), 0.1, 300)
    for t in (0.0, 3.0, 50.0):
        state = evolve_state(dm, t)
        assert state.norm == pytest.approx(1.0, abs=1e-12)


def test_state_amplitude_matches_survival() -> None:
    dm = build_discrete_model(flat_band(0.1), 0.0, 200)
    series = evolve_survival(dm, [7.5])

    assert evolve_state(dm, 7.5).g == pytest.approx(complex(series.g[0]), abs=1e-12)


def test_horizon_warning() -> None:
    dm = build_discrete_model(flat_band(0.1), 0.0, 16)
    assert recurrence_horizon(dm) == pytest.approx(8.0)

    with pytest.warns(HorizonWarning):
        series = evolve_survival(dm, np.linspace(0.0, 20.0, 11))
    assert series.warnings


def test_no_warning_inside_horizon(recwarn) -> None:
    dm = build_discrete_model(flat_band(0.1), 0.0, 400)
    series = evolve_survival(dm, np.linspace(0.0, 100.0, 11))

    assert series.warnings == ()
    assert not [w for w in recwarn if issubclass(w.category, HorizonWarning)]


def test_discrete_self_energy_converges() -> None:
    model = semicircle(0.5)
    w = complex(0.3, 0.2)
    exact = sigma_standard(model, w)

    errors = [abs(discrete_self_energy(build_discrete_model(model, 0.0, n), w)[0] - exact) for n in (500, 2000)]

    assert errors[1] < errors[0]
    assert errors[1] < 1e-4


def test_discrete_bound_states_match_continuum() -> None:
    dm = build_discrete_model(flat_band(0.2), 0.0, 2000)
    states = discrete_bound_states(dm)

    assert len(states) == 2
    assert states[1][0] == pytest.approx(1.0127, abs=1e-3)
    assert states[0][0] == pytest.approx(-states[1][0], abs=1e-9)
    assert states[1][1] == pytest.approx(0.060, abs=5e-3)


def test_flat_band_couplings_are_uniform() -> None:
    dm = build_discrete_model(flat_band(0.2), 0.0, 1000)

    np.testing.assert_allclose(dm.couplings**2, 4e-4, rtol=1e-12)


def test_chain_hopping_from_coupling() -> None:
    dm = build_discrete_model(semicircle(0.02), 0.0, 64, CHAIN)

    assert dm.hopping_strength == pytest.approx(0.1)


def test_riemann_sum_error_halves_with_doubled_size() -> None:
    model = semicircle(0.5)
    w = complex(1.0, 1.0)
    exact = sigma_standard(model, w)
    errors = [abs(discrete_self_energy(build_discrete_model(model, 0.0, n), w)[0] - exact) for n in (500, 1000)]

    assert errors[0] / errors[1] >= 2.0
