"""
Coupling spectral densities Delta(E) and their analytic continuation.

Four families are supported:

- semicircle: Delta(E) = (delta0/pi) sqrt(1 - E^2) on [-1, 1] (the
  semi-infinite tight-binding chain),
- flat band: Delta(E) = delta0 on [-1, 1],
- power edge: Delta(E) = delta0 c (E - Eb)^beta_b (Et - E)^beta_t with c
  chosen so the maximum over the band equals delta0,
- tabulated: shape-preserving cubic (PCHIP) through (E, Delta) samples.
"""

from __future__ import annotations

import functools

from typing import TYPE_CHECKING, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from scipy.interpolate import PchipInterpolator
from scipy.special import beta as beta_fn

from .errors import ContinuationUnavailableError, InvalidModelError
from .io_utils import read_table_csv
from .models import BandModel, ModelKind

if TYPE_CHECKING:
    from pathlib import Path

ArrayLike = Union[float, complex, np.ndarray]

CONTINUABLE_KINDS: tuple[ModelKind, ...] = (ModelKind.SEMICIRCLE, ModelKind.FLAT_BAND, ModelKind.POWER_EDGE)


def semicircle(delta0: float) -> BandModel:
    return BandModel(kind=ModelKind.SEMICIRCLE, strength=delta0, edge_exp_bottom=0.5, edge_exp_top=0.5)


def flat_band(delta0: float) -> BandModel:
    return BandModel(kind=ModelKind.FLAT_BAND, strength=delta0)


def power_edge(
    delta0: float,
    beta_bottom: float,
    beta_top: float,
    *,
    band_bottom: float = -1.0,
    band_top: float = 1.0,
) -> BandModel:
    return BandModel(
        kind=ModelKind.POWER_EDGE,
        strength=delta0,
        band_bottom=band_bottom,
        band_top=band_top,
        edge_exp_bottom=beta_bottom,
        edge_exp_top=beta_top,
    )


def tabulated(
    samples: Iterable[Tuple[float, float]],
    *,
    band_bottom: Optional[float] = None,
    band_top: Optional[float] = None,
) -> BandModel:
    """
    Build a tabulated model. Band edges default to the first and last sample.

    ``strength`` is set to the largest sampled value so that Delta0-relative
    tolerances stay meaningful.
    """
    pairs = tuple((float(e), float(d)) for e, d in samples)
    if len(pairs) < 4:
        raise InvalidModelError('tabulated model needs at least 4 samples')
    peak = max(d for _, d in pairs)
    if peak <= 0.0:
        raise InvalidModelError('tabulated delta must be positive somewhere')
    return BandModel(
        kind=ModelKind.TABULATED,
        strength=peak,
        band_bottom=pairs[0][0] if band_bottom is None else band_bottom,
        band_top=pairs[-1][0] if band_top is None else band_top,
        samples=pairs,
    )


def load_tabulated(path: Path) -> BandModel:
    """Load a tabulated model from a two-column CSV with header ``E,delta``."""
    return tabulated(read_table_csv(path, columns=('E', 'delta')))


def power_edge_scale(model: BandModel) -> float:
    """Normalization c such that max over the band of c (E-Eb)^bb (Et-E)^bt is 1."""
    bb, bt = model.edge_exp_bottom, model.edge_exp_top
    total = bb + bt
    if total == 0.0:
        return 1.0
    lo = model.width * bb / total
    hi = model.width * bt / total
    peak = (lo**bb if bb > 0.0 else 1.0) * (hi**bt if bt > 0.0 else 1.0)
    return 1.0 / peak


@functools.lru_cache(maxsize=32)
def _interpolant(samples: Tuple[Tuple[float, float], ...]) -> PchipInterpolator:
    energies = np.array([e for e, _ in samples])
    values = np.array([d for _, d in samples])
    return PchipInterpolator(energies, values, extrapolate=False)


def delta_from_offsets(model: BandModel, lo: ArrayLike, hi: ArrayLike) -> np.ndarray:
    """
    Evaluate Delta at E = Eb + lo = Et - hi.

    Passing both offsets keeps (E - Eb)^beta accurate for points very close
    to an edge. Points with a negative offset are outside the band and get 0.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    inside = (lo >= 0.0) & (hi >= 0.0)
    lo_c = np.where(inside, lo, 0.0)
    hi_c = np.where(inside, hi, 0.0)
    d0 = model.strength

    if model.kind is ModelKind.FLAT_BAND:
        values = np.full(np.broadcast(lo_c, hi_c).shape, d0)
    elif model.kind is ModelKind.SEMICIRCLE:
        values = (d0 / np.pi) * np.sqrt(lo_c * hi_c)
    elif model.kind is ModelKind.POWER_EDGE:
        values = d0 * power_edge_scale(model) * lo_c**model.edge_exp_bottom * hi_c**model.edge_exp_top
    else:
        interp = _interpolant(model.samples)
        values = np.nan_to_num(interp(model.band_bottom + lo_c), nan=0.0)
        values = np.maximum(values, 0.0)

    return np.where(inside, values, 0.0)


def evaluate_delta(model: BandModel, energy: ArrayLike) -> ArrayLike:
    """Delta(E); exactly zero outside [Eb, Et]."""
    e = np.asarray(energy, dtype=float)
    values = delta_from_offsets(model, e - model.band_bottom, model.band_top - e)
    return float(values) if values.ndim == 0 else values


def continue_delta(model: BandModel, w: ArrayLike) -> ArrayLike:
    """
    Analytic continuation of Delta off the real band segment.

    The continuation has its cuts on the real axis outside [Eb, Et] and
    coincides with Delta on (Eb, Et).
    """
    if model.kind not in CONTINUABLE_KINDS:
        raise ContinuationUnavailableError(f'no analytic continuation for {model.kind.value} models')

    z = np.asarray(w, dtype=complex)
    if model.kind is ModelKind.FLAT_BAND:
        values = np.full(z.shape, model.strength, dtype=complex)
    elif model.kind is ModelKind.SEMICIRCLE:
        values = (model.strength / np.pi) * np.sqrt(1.0 - z) * np.sqrt(1.0 + z)
    else:
        scale = model.strength * power_edge_scale(model)
        values = (
            scale
            * np.power(z - model.band_bottom, model.edge_exp_bottom)
            * np.power(model.band_top - z, model.edge_exp_top)
        )

    return complex(values) if values.ndim == 0 else values


def first_moment(model: BandModel) -> float:
    """Integral of Delta over the band."""
    if model.kind is ModelKind.SEMICIRCLE:
        return 0.5 * model.strength
    if model.kind is ModelKind.FLAT_BAND:
        return model.width * model.strength
    if model.kind is ModelKind.POWER_EDGE:
        bb, bt = model.edge_exp_bottom, model.edge_exp_top
        return float(
            model.strength * power_edge_scale(model) * model.width ** (bb + bt + 1.0) * beta_fn(bb + 1.0, bt + 1.0)
        )
    samples = model.samples
    return float(_interpolant(samples).integrate(samples[0][0], samples[-1][0]))


def describe_model(model: BandModel) -> dict:
    """JSON-friendly descriptor of a model."""
    out = {
        'kind': model.kind.value,
        'delta0': model.strength,
        'band_bottom': model.band_bottom,
        'band_top': model.band_top,
        'beta_bottom': model.edge_exp_bottom,
        'beta_top': model.edge_exp_top,
    }
    if model.samples is not None:
        out['samples'] = len(model.samples)
    return out


def build_model(
    kind: str,
    delta0: float,
    *,
    beta_bottom: float = 0.5,
    beta_top: float = 0.5,
    table: Optional[Path] = None,
    samples: Optional[Sequence[Tuple[float, float]]] = None,
) -> BandModel:
    """Factory used by the CLI: map a kind name onto the model constructors."""
    try:
        model_kind = ModelKind(kind)
    except ValueError as exc:
        raise InvalidModelError(f'unknown model kind: {kind!r}') from exc

    if model_kind is ModelKind.SEMICIRCLE:
        return semicircle(delta0)
    if model_kind is ModelKind.FLAT_BAND:
        return flat_band(delta0)
    if model_kind is ModelKind.POWER_EDGE:
        return power_edge(delta0, beta_bottom, beta_top)
    if samples is not None:
        return tabulated(samples)
    if table is None:
        raise InvalidModelError('tabulated model needs a table path')
    return load_tabulated(table)
