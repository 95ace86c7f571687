from __future__ import annotations

import enum

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidModelError


class ModelKind(str, enum.Enum):
    SEMICIRCLE = 'semicircle'
    FLAT_BAND = 'flat'
    POWER_EDGE = 'power'
    TABULATED = 'table'


class Side(str, enum.Enum):
    """Which lip of the band cut a real frequency refers to."""

    ABOVE = 'above'
    BELOW = 'below'
    NONE = 'none'


@dataclass(frozen=True)
class BandModel:
    """Coupling spectral density Delta(E) of a single band [band_bottom, band_top]."""

    kind: ModelKind
    strength: float
    band_bottom: float = -1.0
    band_top: float = 1.0
    edge_exp_bottom: float = 0.0
    edge_exp_top: float = 0.0
    samples: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self) -> None:
        if not self.strength > 0.0:
            raise InvalidModelError(f'strength must be positive, got {self.strength}')
        if not self.band_bottom < self.band_top:
            raise InvalidModelError(f'band_bottom must be < band_top, got [{self.band_bottom}, {self.band_top}]')
        if self.edge_exp_bottom < 0.0 or self.edge_exp_top < 0.0:
            raise InvalidModelError('edge exponents must be nonnegative')

        if self.kind in (ModelKind.SEMICIRCLE, ModelKind.FLAT_BAND):
            if (self.band_bottom, self.band_top) != (-1.0, 1.0):
                raise InvalidModelError(f'{self.kind.value} model lives on [-1, 1]')

        if self.kind is ModelKind.TABULATED:
            self._validate_samples()
        elif self.samples is not None:
            raise InvalidModelError('samples are only allowed for tabulated models')

    def _validate_samples(self) -> None:
        if self.samples is None or len(self.samples) < 4:
            raise InvalidModelError('tabulated model needs at least 4 samples')
        energies = [e for e, _ in self.samples]
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise InvalidModelError('tabulated energies must be strictly increasing')
        if energies[0] < self.band_bottom or energies[-1] > self.band_top:
            raise InvalidModelError('tabulated energies must lie inside the band')
        if any(d < 0.0 for _, d in self.samples):
            raise InvalidModelError('tabulated delta values must be nonnegative')

    @property
    def width(self) -> float:
        return self.band_top - self.band_bottom


@dataclass(frozen=True)
class SheetPoint:
    """A complex frequency together with the Riemann sheet it lives on."""

    w: complex
    sheet: int = 0


@dataclass(frozen=True)
class SelfEnergySample:
    value: complex
    derivative: complex
    point: SheetPoint


class PoleKind(str, enum.Enum):
    BOUND_STATE = 'bound_state'
    RESONANCE = 'resonance'
    ANTI_RESONANCE = 'anti_resonance'
    VIRTUAL_STATE = 'virtual_state'


@dataclass(frozen=True)
class Pole:
    """Pole of g(w) = 1 / (w - eps - Sigma_sheet(w)).

    ``weight`` is the residue 1 / (1 - dSigma/dw); it is ``None`` for
    second-order poles.
    """

    energy: complex
    sheet: int
    order: int = 1
    weight: Optional[complex] = None
    kind: PoleKind = PoleKind.BOUND_STATE

    def as_dict(self) -> dict:
        return {
            'sheet': self.sheet,
            're_energy': float(np.real(self.energy)),
            'im_energy': float(np.imag(self.energy)),
            'order': self.order,
            're_weight': None if self.weight is None else float(np.real(self.weight)),
            'im_weight': None if self.weight is None else float(np.imag(self.weight)),
            'kind': self.kind.value,
        }


class SeriesMethod(str, enum.Enum):
    CUT_INTEGRAL = 'cut'
    RESONANCE_EXPANSION = 'resonance'
    ORACLE = 'oracle'
    FGR = 'fgr'


@dataclass(frozen=True, eq=False)
class SurvivalSeries:
    """Survival amplitude g(t) on a time grid.

    ``poles`` lists the pole terms already summed into ``g`` so that
    consumers (e.g. tail fits) can remove them again.
    """

    times: np.ndarray
    g: np.ndarray
    method: SeriesMethod
    poles: Tuple[Pole, ...] = ()
    warnings: Tuple[str, ...] = ()

    @property
    def p(self) -> np.ndarray:
        return np.abs(self.g) ** 2


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 4000
    oscillation_splitting: int = 4

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise ValueError('quadrature tolerances must be positive')
        if self.oscillation_splitting < 4:
            raise ValueError('oscillation_splitting must be >= 4 panels per period')
        if self.max_subdivisions < 1:
            raise ValueError('max_subdivisions must be >= 1')


class DiscretizationScheme(str, enum.Enum):
    CHAIN_OF_SITES = 'chain'
    UNIFORM_LEVELS = 'uniform'


@dataclass(frozen=True, eq=False)
class DiscreteModel:
    """Finite Fano-Anderson Hamiltonian: one level coupled to N band levels."""

    level_energy: float
    band_levels: np.ndarray
    couplings: np.ndarray
    scheme: DiscretizationScheme
    band_bottom: float
    band_top: float
    hopping_strength: Optional[float] = None

    @property
    def size(self) -> int:
        return int(self.band_levels.shape[0])


@dataclass(frozen=True, eq=False)
class OracleState:
    """Amplitude on the discrete level and on every band level at time t."""

    t: float
    g: complex
    b: np.ndarray

    @property
    def norm(self) -> float:
        return float(abs(self.g) ** 2 + np.sum(np.abs(self.b) ** 2))


@dataclass(frozen=True)
class SpectralDensity:
    """Continuous part A(w) plus the discrete (energy, weight) deltas."""

    continuous: float
    deltas: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)
