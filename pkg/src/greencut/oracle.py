"""
Finite Fano-Anderson Hamiltonians evolved exactly.

A discrete level eps couples to N band levels w_k with couplings V_k. The
(N+1)x(N+1) Hamiltonian is diagonalized once; the survival amplitude is then
g(t) = sum_m |<d|m>|^2 exp(-i E_m t), free of any time-stepping error.
"""

from __future__ import annotations

import functools
import logging
import warnings

from typing import List, Sequence, Tuple

import numpy as np

from scipy.linalg import eigh, eigh_tridiagonal

from .band import evaluate_delta
from .errors import DomainError, HorizonWarning, SchemeMismatchError
from .models import BandModel, DiscreteModel, DiscretizationScheme, ModelKind, OracleState, SeriesMethod, SurvivalSeries
from .quadrature import oscillatory_sum

logger = logging.getLogger(__name__)

MIN_LEVELS = 16
BOUND_STATE_MARGIN = 3.0


def build_discrete_model(
    model: BandModel,
    eps: float,
    size: int,
    scheme: DiscretizationScheme = DiscretizationScheme.UNIFORM_LEVELS,
) -> DiscreteModel:
    """
    Discretize the band into ``size`` levels.

    CHAIN_OF_SITES is the semi-infinite chain cut at ``size`` sites, written
    in its eigenbasis: w_k = -cos(k pi/(N+1)), V_k = -sqrt(2/(N+1)) V sin(k pi/(N+1))
    with delta0 = 2 V^2. UNIFORM_LEVELS puts levels at the midpoints of N
    equal cells with V_k^2 = Delta(w_k) h.

    Args:
        model: Continuum to discretize.
        eps: Bare level energy, copied onto the result.
        size: Number of band levels N.
        scheme: How levels and couplings are chosen.

    Returns:
        Level energies and couplings ready for :func:`evolve_survival`.

    Raises:
        DomainError: If ``size`` < 16.
        SchemeMismatchError: For the chain scheme on a non-semicircle model.
    """
    if size < MIN_LEVELS:
        raise DomainError(f'need at least {MIN_LEVELS} band levels, got {size}')

    if scheme is DiscretizationScheme.CHAIN_OF_SITES:
        if model.kind is not ModelKind.SEMICIRCLE:
            raise SchemeMismatchError(f'chain of sites realizes the semicircle model only, not {model.kind.value}')
        hopping = float(np.sqrt(0.5 * model.strength))
        phase = np.arange(1, size + 1) * np.pi / (size + 1)
        levels = -np.cos(phase)
        couplings = -np.sqrt(2.0 / (size + 1)) * hopping * np.sin(phase)
        return DiscreteModel(
            level_energy=eps,
            band_levels=levels,
            couplings=couplings,
            scheme=scheme,
            band_bottom=model.band_bottom,
            band_top=model.band_top,
            hopping_strength=hopping,
        )

    h = model.width / size
    levels = model.band_bottom + (np.arange(size) + 0.5) * h
    couplings = np.sqrt(np.asarray(evaluate_delta(model, levels)) * h)
    return DiscreteModel(
        level_energy=eps,
        band_levels=levels,
        couplings=couplings,
        scheme=scheme,
        band_bottom=model.band_bottom,
        band_top=model.band_top,
    )


def chain_hamiltonian(dm: DiscreteModel) -> Tuple[np.ndarray, np.ndarray]:
    """
    Site-basis tridiagonal form of a chain model: the level, then the chain
    sites with hopping -1/2 and -V between the level and the first site.

    Returns ``(diagonal, off_diagonal)``.
    """
    if dm.scheme is not DiscretizationScheme.CHAIN_OF_SITES or dm.hopping_strength is None:
        raise SchemeMismatchError('tridiagonal form exists for chain-of-sites models only')
    diagonal = np.zeros(dm.size + 1)
    diagonal[0] = dm.level_energy
    off = np.full(dm.size, -0.5)
    off[0] = -dm.hopping_strength
    return diagonal, off


def arrowhead_hamiltonian(dm: DiscreteModel) -> np.ndarray:
    """Dense (N+1)x(N+1) Hamiltonian in the band-level basis."""
    h = np.diag(np.concatenate([[dm.level_energy], dm.band_levels]))
    h[0, 1:] = dm.couplings
    h[1:, 0] = dm.couplings
    return h


@functools.lru_cache(maxsize=4)
def _spectrum(dm: DiscreteModel) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and squared overlaps |<d|m>|^2."""
    if dm.scheme is DiscretizationScheme.CHAIN_OF_SITES:
        diagonal, off = chain_hamiltonian(dm)
        energies, vectors = eigh_tridiagonal(diagonal, off)
    else:
        energies, vectors = eigh(arrowhead_hamiltonian(dm))
    overlaps = vectors[0] ** 2
    logger.debug('diagonalized %s model with N=%d, overlap sum %.15f', dm.scheme.value, dm.size, overlaps.sum())
    return energies, overlaps


def spectrum(dm: DiscreteModel) -> Tuple[np.ndarray, np.ndarray]:
    energies, overlaps = _spectrum(dm)
    return energies.copy(), overlaps.copy()


def recurrence_horizon(dm: DiscreteModel) -> float:
    """t_rec = N (Et - Eb) / 4; beyond it the finite system starts to revive."""
    return dm.size * (dm.band_top - dm.band_bottom) / 4.0


def evolve_survival(dm: DiscreteModel, times: Sequence[float], *, workers: int = 1) -> SurvivalSeries:
    """
    g(t) = sum_m |<d|m>|^2 exp(-i E_m t).

    Times past the recurrence horizon are allowed; the series then carries a
    warning and a HorizonWarning is emitted.
    """
    t = np.asarray(times, dtype=float).ravel()
    energies, overlaps = _spectrum(dm)
    g = oscillatory_sum(energies, overlaps.astype(complex), t, workers=workers)

    notes: Tuple[str, ...] = ()
    horizon = recurrence_horizon(dm)
    if t.size and t[-1] > horizon:
        message = f'times up to {t[-1]:g} exceed the recurrence horizon {horizon:g} of the N={dm.size} discretization'
        warnings.warn(message, HorizonWarning, stacklevel=2)
        logger.warning(message)
        notes = (message,)
    return SurvivalSeries(times=t, g=g, method=SeriesMethod.ORACLE, warnings=notes)


def evolve_state(dm: DiscreteModel, t: float) -> OracleState:
    """Full state at time t starting from the discrete level, in the band-level basis."""
    energies, vectors = eigh(arrowhead_hamiltonian(dm))
    psi = vectors @ (np.exp(-1j * energies * t) * vectors[0])
    return OracleState(t=float(t), g=complex(psi[0]), b=psi[1:])


def discrete_bound_states(dm: DiscreteModel) -> List[Tuple[float, float]]:
    """Eigenvalues farther than 3 mean level spacings outside the band, with their overlaps."""
    energies, overlaps = _spectrum(dm)
    margin = BOUND_STATE_MARGIN * (dm.band_top - dm.band_bottom) / dm.size
    outside = (energies < dm.band_bottom - margin) | (energies > dm.band_top + margin)
    return [(float(e), float(o)) for e, o in zip(energies[outside], overlaps[outside])]


def discrete_self_energy(dm: DiscreteModel, w) -> np.ndarray:
    """Sigma_N(w) = sum_k V_k^2 / (w - w_k)."""
    z = np.atleast_1d(np.asarray(w, dtype=complex))
    return np.sum(dm.couplings**2 / (z[:, None] - dm.band_levels[None, :]), axis=1)
