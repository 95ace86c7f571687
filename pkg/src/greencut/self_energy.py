"""
Self-energy Sigma(w) = integral of Delta(E) / (w - E) over the band, on the
standard sheet, on the lips of the cut, and on the other Riemann sheets.

Branch conventions on the standard sheet (sheet 0):

- semicircle: Sigma = delta0 (w - s(w)), s(w) = sqrt(w-1) sqrt(w+1), which
  has phase pi/2 just above the cut;
- flat band: Sigma = delta0 log((w+1)/(w-1)), phase -pi just above the cut.

Sheet n is the determination reached by crossing the cut downward n times,
so in the lower half plane Sigma_1 = Sigma_0 - 2 pi i Delta~ (Delta~ being the
continuation of Delta). The semicircle surface has a single second sheet
(index 1, with -1 accepted as an alias); the flat band has one sheet per
integer with Sigma_n = Sigma_0 - 2 pi i n delta0; power-edge models expose
sheet 1 in the closed lower half plane and its mirror, sheet -1, in the
closed upper half plane; tabulated models only have sheet 0.
"""

from __future__ import annotations

import logging

from typing import Tuple

import numpy as np

from scipy.integrate import quad

from .band import continue_delta, delta_from_offsets, evaluate_delta, power_edge_scale
from .errors import AccuracyError, BranchPointError, ContinuationUnavailableError, DomainError
from .models import BandModel, ModelKind, SelfEnergySample, SheetPoint, Side
from .quadrature import tanh_sinh_nodes

logger = logging.getLogger(__name__)

GUARD_RADIUS = 1e-9

_QUAD_ABS_TOL = 1e-13
_QUAD_REL_TOL = 1e-12
_QUAD_LIMIT = 500
_QUAD_MAX_ERROR = 1e-7
_PV_LEVELS = (4, 5, 6, 7, 8)
_PV_TOL = 1e-13


def normalize_sheet(model: BandModel, sheet: int) -> int:
    """Validate a sheet index for the model family and return its canonical form."""
    if sheet == 0:
        return 0
    if model.kind is ModelKind.SEMICIRCLE:
        if sheet in (1, -1):
            return 1
        raise ContinuationUnavailableError(f'semicircle surface has sheets 0 and 1 only, got {sheet}')
    if model.kind is ModelKind.FLAT_BAND:
        return int(sheet)
    if model.kind is ModelKind.POWER_EDGE and sheet in (1, -1):
        return int(sheet)
    raise ContinuationUnavailableError(f'sheet {sheet} is not available for {model.kind.value} models')


def supported_sheets(model: BandModel, span: int = 2) -> Tuple[int, ...]:
    """Sheets the model can be evaluated on; the flat band has every integer, truncated to |n| <= span."""
    if model.kind is ModelKind.SEMICIRCLE:
        return (0, 1)
    if model.kind is ModelKind.FLAT_BAND:
        return tuple(range(-span, span + 1))
    if model.kind is ModelKind.POWER_EDGE:
        return (-1, 0, 1)
    return (0,)


def mirror_sheet(model: BandModel, sheet: int) -> int:
    """Sheet holding conj(w) when w is on ``sheet`` (Schwarz reflection)."""
    sheet = normalize_sheet(model, sheet)
    if model.kind is ModelKind.SEMICIRCLE:
        return sheet
    return -sheet


def _guard_branch_points(model: BandModel, z: np.ndarray) -> None:
    near = (np.abs(z - model.band_bottom) < GUARD_RADIUS) | (np.abs(z - model.band_top) < GUARD_RADIUS)
    if np.any(near):
        raise BranchPointError(f'evaluation within {GUARD_RADIUS:g} of a band edge: {z[near][0]}')


def _on_cut(model: BandModel, z: np.ndarray) -> np.ndarray:
    return (z.imag == 0.0) & (z.real > model.band_bottom) & (z.real < model.band_top)


def _side_sign(side: Side) -> float:
    """+1 above the cut, -1 below."""
    return 1.0 if side is Side.ABOVE else -1.0


def semicircle_root(z: np.ndarray, on_cut: np.ndarray, side: Side) -> np.ndarray:
    """s(w) = sqrt(w^2 - 1) on the standard branch, with one-sided values on the cut."""
    # a -0.0 imaginary part would select the lower branch of each sqrt
    z = z.real + 1j * (z.imag + 0.0)
    s = np.sqrt(z - 1.0) * np.sqrt(z + 1.0)
    if np.any(on_cut):
        x = z.real[on_cut]
        s[on_cut] = _side_sign(side) * 1j * np.sqrt((1.0 - x) * (1.0 + x))
    return s


def _flat_log(z: np.ndarray, on_cut: np.ndarray, side: Side) -> np.ndarray:
    with np.errstate(divide='ignore', invalid='ignore'):
        out = np.log((z + 1.0) / (z - 1.0))
    if np.any(on_cut):
        x = z.real[on_cut]
        out[on_cut] = np.log((1.0 + x) / (1.0 - x)) - _side_sign(side) * 1j * np.pi
    return out


def _quad_complex(real_fn, imag_fn, a: float, b: float, **kwargs) -> complex:
    re, re_err = quad(real_fn, a, b, epsabs=_QUAD_ABS_TOL, epsrel=_QUAD_REL_TOL, limit=_QUAD_LIMIT, **kwargs)
    im, im_err = quad(imag_fn, a, b, epsabs=_QUAD_ABS_TOL, epsrel=_QUAD_REL_TOL, limit=_QUAD_LIMIT, **kwargs)
    value = complex(re, im)
    if max(re_err, im_err) > _QUAD_MAX_ERROR:
        raise AccuracyError('self-energy quadrature did not converge', estimate=value, error_bound=max(re_err, im_err))
    return value


def _cauchy_transform(model: BandModel, w: complex, power: int) -> complex:
    """Integral of Delta(E) / (w - E)**power over the band, for w off the cut."""
    eb, et = model.band_bottom, model.band_top

    if model.kind is ModelKind.POWER_EDGE:
        scale = model.strength * power_edge_scale(model)

        def kernel(e: float) -> complex:
            return scale / (w - e) ** power

        return _quad_complex(
            lambda e: kernel(e).real,
            lambda e: kernel(e).imag,
            eb,
            et,
            weight='alg',
            wvar=(model.edge_exp_bottom, model.edge_exp_top),
        )

    def kernel(e: float) -> complex:
        return evaluate_delta(model, e) / (w - e) ** power

    points = [e for e, _ in model.samples if eb < e < et] if model.samples else []
    if eb < w.real < et:
        points.append(w.real)
    return _quad_complex(
        lambda e: kernel(e).real,
        lambda e: kernel(e).imag,
        eb,
        et,
        points=sorted(set(points)) or None,
    )


def principal_value(model: BandModel, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """
    Sigma'(E) = PV integral of Delta(x) / (E - x) dx for E = Eb + lo = Et - hi.

    Uses the subtraction
        PV int Delta(x)/(E-x) dx = int (Delta(x) - Delta(E))/(E-x) dx + Delta(E) log(lo/hi)
    and tanh-sinh quadrature on [Eb, E] and [E, Et], which absorbs the
    (x - Eb)^beta edge behavior.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    d_here = delta_from_offsets(model, lo, hi)

    previous = None
    for level in _PV_LEVELS:
        one_plus, one_minus, weights = tanh_sinh_nodes(level)
        lo_c, hi_c = lo[:, None], hi[:, None]

        # left piece: x in [Eb, E]
        d_left = delta_from_offsets(model, 0.5 * lo_c * one_plus, hi_c + 0.5 * lo_c * one_minus)
        left = np.sum(weights * (d_left - d_here[:, None]) / one_minus, axis=1)
        # right piece: x in [E, Et]
        d_right = delta_from_offsets(model, lo_c + 0.5 * hi_c * one_plus, 0.5 * hi_c * one_minus)
        right = -np.sum(weights * (d_right - d_here[:, None]) / one_plus, axis=1)

        current = left + right
        if previous is not None and np.max(np.abs(current - previous)) <= _PV_TOL * max(1.0, np.max(np.abs(current))):
            break
        previous = current
    else:
        logger.debug('principal value reached finest tanh-sinh level without full convergence')

    return current + d_here * np.log(lo / hi)


def cut_parts(model: BandModel, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    (Sigma'(E), Delta(E)) at E = Eb + lo = Et - hi for points strictly inside the band.

    The imaginary parts on the two lips are -pi Delta (above) and +pi Delta (below).
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    delta = delta_from_offsets(model, lo, hi)

    if model.kind is ModelKind.SEMICIRCLE:
        energy = np.where(lo <= hi, model.band_bottom + lo, model.band_top - hi)
        return model.strength * energy, delta
    if model.kind is ModelKind.FLAT_BAND:
        return model.strength * np.log(lo / hi), delta
    return principal_value(model, lo, hi), delta


def sigma_cut_values(model: BandModel, energy: float) -> Tuple[float, float, float]:
    """(Sigma', Sigma''_above, Sigma''_below) at a real energy strictly inside the band."""
    if not model.band_bottom < energy < model.band_top:
        raise DomainError(f'energy {energy} is not inside the band ({model.band_bottom}, {model.band_top})')
    _guard_branch_points(model, np.array([complex(energy)]))
    sigma_p, delta = cut_parts(model, energy - model.band_bottom, model.band_top - energy)
    return float(sigma_p[0]), float(-np.pi * delta[0]), float(np.pi * delta[0])


def sigma_values(model: BandModel, w, sheet: int = 0, side: Side = Side.NONE) -> np.ndarray:
    """
    Vectorized Sigma on ``sheet``.

    Real points strictly inside the band need ``side`` (ABOVE or BELOW) and
    return the one-sided boundary value.

    Raises:
        BranchPointError: For points within GUARD_RADIUS of a band edge.
        DomainError: For on-cut points without a side, or points outside the
            half plane where a power-edge sheet is defined.
        ContinuationUnavailableError: For sheets the model does not have.
    """
    z = np.atleast_1d(np.asarray(w, dtype=complex)).copy()
    sheet = normalize_sheet(model, sheet)
    _guard_branch_points(model, z)
    on_cut = _on_cut(model, z)
    if np.any(on_cut) and side is Side.NONE:
        raise DomainError('real frequency inside the band needs side=ABOVE or BELOW')

    d0 = model.strength
    if model.kind is ModelKind.SEMICIRCLE:
        s = semicircle_root(z, on_cut, side)
        return d0 * (z + s) if sheet else d0 * (z - s)

    if model.kind is ModelKind.FLAT_BAND:
        return d0 * (_flat_log(z, on_cut, side) - 2j * np.pi * sheet)

    if sheet != 0:
        allowed = (z.imag * sheet < 0.0) | (on_cut & (side is (Side.BELOW if sheet > 0 else Side.ABOVE)))
        if not np.all(allowed):
            raise DomainError(f'sheet {sheet} of a power-edge model is defined in the {"lower" if sheet > 0 else "upper"} half plane')
        base = sigma_values(model, z, 0, side)
        return base - 2j * np.pi * sheet * np.asarray(continue_delta(model, z))

    out = np.empty(z.shape, dtype=complex)
    if np.any(on_cut):
        x = z.real[on_cut]
        sigma_p, delta = cut_parts(model, x - model.band_bottom, model.band_top - x)
        out[on_cut] = sigma_p - _side_sign(side) * 1j * np.pi * delta
    for idx in np.flatnonzero(~on_cut):
        out[idx] = _cauchy_transform(model, complex(z[idx]), 1)
    return out


def sigma_derivative_values(model: BandModel, w, sheet: int = 0, side: Side = Side.NONE) -> np.ndarray:
    """Vectorized dSigma/dw on ``sheet``; same domain rules as :func:`sigma_values`."""
    z = np.atleast_1d(np.asarray(w, dtype=complex)).copy()
    sheet = normalize_sheet(model, sheet)
    _guard_branch_points(model, z)
    on_cut = _on_cut(model, z)
    if np.any(on_cut) and side is Side.NONE:
        raise DomainError('real frequency inside the band needs side=ABOVE or BELOW')

    d0 = model.strength
    if model.kind is ModelKind.SEMICIRCLE:
        ratio = z / semicircle_root(z, on_cut, side)
        return d0 * (1.0 + ratio) if sheet else d0 * (1.0 - ratio)

    if model.kind is ModelKind.FLAT_BAND:
        return -2.0 * d0 / (z * z - 1.0)

    if np.any(on_cut):
        raise DomainError('derivative on the cut is only available for closed-form models')

    base = np.array([-_cauchy_transform(model, complex(v), 2) for v in z])
    if sheet == 0:
        return base
    # sheet +-1 of a power-edge model: Sigma_0 -/+ 2 pi i Delta~
    sigma_values(model, z, sheet, side)  # domain check
    dtilde = np.asarray(continue_delta(model, z))
    log_deriv = model.edge_exp_bottom / (z - model.band_bottom) - model.edge_exp_top / (model.band_top - z)
    return base - 2j * np.pi * sheet * dtilde * log_deriv


def sigma_standard(model: BandModel, w: complex, side: Side = Side.NONE) -> complex:
    """Sigma on the standard sheet; closed form where available, else adaptive Cauchy quadrature."""
    return complex(sigma_values(model, w, 0, side)[0])


def sigma_on_sheet(model: BandModel, point: SheetPoint, side: Side = Side.NONE) -> complex:
    return complex(sigma_values(model, point.w, point.sheet, side)[0])


def sigma_derivative(model: BandModel, point: SheetPoint, side: Side = Side.NONE) -> complex:
    return complex(sigma_derivative_values(model, point.w, point.sheet, side)[0])


def sample_self_energy(model: BandModel, point: SheetPoint, side: Side = Side.NONE) -> SelfEnergySample:
    return SelfEnergySample(
        value=sigma_on_sheet(model, point, side),
        derivative=sigma_derivative(model, point, side),
        point=SheetPoint(point.w, normalize_sheet(model, point.sheet)),
    )
