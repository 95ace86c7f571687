"""
Poles of g(w) = 1 / (w - eps - Sigma_sheet(w)).

Bound states are real roots on the standard sheet outside the band, found by
bracketing: w - eps - Sigma_0(w) is strictly increasing on each side of the
band. Resonances are found by Newton iteration on a non-standard sheet.
"""

from __future__ import annotations

import cmath
import logging

from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from scipy.optimize import brentq

from .band import delta_from_offsets, semicircle
from .errors import (
    AccuracyError,
    BranchPointError,
    ContinuationUnavailableError,
    DegenerateQuadraticError,
    DomainError,
    UnsupportedPoleOrderError,
)
from .models import BandModel, DiscretizationScheme, ModelKind, Pole, PoleKind, SheetPoint, Side
from .self_energy import (
    GUARD_RADIUS,
    normalize_sheet,
    sigma_cut_values,
    sigma_derivative,
    sigma_on_sheet,
    sigma_values,
    supported_sheets,
)

logger = logging.getLogger(__name__)

CLASSIFY_TOL = 1e-9
DEDUP_TOL = 1e-9
NEWTON_MAX_ITER = 100

_EDGE_OFFSET = 2.0 * GUARD_RADIUS
_SMALLEST_OFFSET = 1e-300
_MAX_BRACKET_DOUBLINGS = 60
_DIVERGED = 1e6


def _residual(model: BandModel, eps: float, w: complex, sheet: int, side: Side = Side.NONE) -> complex:
    return w - eps - sigma_on_sheet(model, SheetPoint(w, sheet), side)


def pole_kind(energy: complex, sheet: int) -> PoleKind:
    if abs(energy.imag) <= 1e-12 * max(1.0, abs(energy.real)):
        return PoleKind.BOUND_STATE if sheet == 0 else PoleKind.VIRTUAL_STATE
    return PoleKind.RESONANCE if energy.imag < 0.0 else PoleKind.ANTI_RESONANCE


def pole_weight(model: BandModel, pole: Pole) -> complex:
    """
    Residue 1 / (1 - dSigma/dw) at a first-order pole.

    Raises:
        UnsupportedPoleOrderError: For second-order poles.
    """
    if pole.order != 1:
        raise UnsupportedPoleOrderError(f'residue of an order-{pole.order} pole is not supported')
    return 1.0 / (1.0 - sigma_derivative(model, SheetPoint(pole.energy, pole.sheet)))


def _make_pole(model: BandModel, energy: complex, sheet: int) -> Pole:
    kind = pole_kind(energy, sheet)
    weight = pole_weight(model, Pole(energy=energy, sheet=sheet))
    if kind is PoleKind.BOUND_STATE or kind is PoleKind.VIRTUAL_STATE:
        energy = complex(energy.real, 0.0)
    if kind is PoleKind.BOUND_STATE:
        weight = complex(weight.real, 0.0)
    return Pole(energy=energy, sheet=sheet, order=1, weight=weight, kind=kind)


def _edge_has_weight(model: BandModel, top: bool) -> bool:
    """True when Delta does not vanish at the edge, so Sigma' diverges there."""
    lo, hi = (model.width, 0.0) if top else (0.0, model.width)
    return bool(delta_from_offsets(model, lo, hi) > 0.0)


def _bound_state_on_side(model: BandModel, eps: float, top: bool) -> Optional[float]:
    sign = 1.0 if top else -1.0
    edge = model.band_top if top else model.band_bottom

    def f(x: float) -> float:
        return sign * (x - eps - sigma_values(model, x)[0].real)

    near = edge + sign * _EDGE_OFFSET
    if f(near) >= 0.0:
        if _edge_has_weight(model, top):
            logger.warning(
                'bound state %s the band lies within %g of the edge and is dropped (negligible weight)',
                'above' if top else 'below',
                _EDGE_OFFSET,
            )
        return None

    reach = 10.0 * (abs(eps) + model.strength + 1.0)
    far = edge + sign * reach
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if f(far) > 0.0:
            break
        reach *= 2.0
        far = edge + sign * reach
    else:
        raise AccuracyError(f'could not bracket the bound state {"above" if top else "below"} the band')

    a, b = sorted((near, far))
    return float(brentq(f, a, b, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500))


def _flat_bound_state(model: BandModel, eps: float, top: bool) -> Optional[Pole]:
    """
    Flat-band bound state solved in the offset d from the edge, where
    Sigma_0 = +-delta0 * log1p(W / d). The root can sit far closer to the
    edge than the branch-point guard, so the weight is also taken in offset
    form, d (W + d) / (d (W + d) + delta0 W).
    """
    width = model.width
    edge = model.band_top if top else model.band_bottom
    gap = edge - eps if top else eps - edge

    def f(log_offset: float) -> float:
        d = np.exp(log_offset)
        return gap + d - model.strength * np.log1p(width / d)

    lo = np.log(_SMALLEST_OFFSET)
    if f(lo) >= 0.0:
        logger.warning(
            'bound state %s the band lies closer than %g to the edge and is dropped (negligible weight)',
            'above' if top else 'below',
            _SMALLEST_OFFSET,
        )
        return None
    hi = np.log(10.0 * (abs(gap) + model.strength + width))
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if f(hi) > 0.0:
            break
        hi += np.log(2.0)
    else:
        raise AccuracyError(f'could not bracket the bound state {"above" if top else "below"} the band')

    d = float(np.exp(brentq(f, lo, hi, xtol=1e-14, rtol=4.0 * np.finfo(float).eps, maxiter=500)))
    energy = edge + d if top else edge - d
    spread = d * (width + d)
    weight = spread / (spread + model.strength * width)
    return Pole(energy=complex(energy, 0.0), sheet=0, order=1, weight=complex(weight, 0.0), kind=PoleKind.BOUND_STATE)


def real_poles_standard_sheet(model: BandModel, eps: float) -> List[Pole]:
    """Bound states: real roots of w = eps + Sigma_0(w) below and above the band, sorted by energy."""
    poles = []
    for top in (False, True):
        if model.kind is ModelKind.FLAT_BAND:
            pole = _flat_bound_state(model, eps, top)
            if pole is not None:
                poles.append(pole)
            continue
        root = _bound_state_on_side(model, eps, top)
        if root is not None:
            poles.append(_make_pole(model, complex(root), 0))
    logger.debug('bound states for eps=%g: %s', eps, [p.energy.real for p in poles])
    return poles


def semicircle_pole_closed_form(delta0: float, eps: float) -> Tuple[complex, complex]:
    """
    Roots of (1 - 2 delta0) w^2 - 2 eps (1 - delta0) w + eps^2 + delta0^2 = 0,
    the squared pole equation of the semicircle model. Sheet membership is
    not asserted; see :func:`classify_root`.

    Raises:
        DegenerateQuadraticError: At delta0 = 1/2; ``linear_root`` carries the
            single remaining root, or None when eps = 0 as well.
    """
    denom = 1.0 - 2.0 * delta0
    if denom == 0.0:
        linear = None if eps == 0.0 else (eps * eps + 0.25) / eps
        raise DegenerateQuadraticError('quadratic pole equation degenerates at delta0 = 1/2', linear_root=linear)
    root = delta0 * cmath.sqrt(eps * eps - 1.0 + 2.0 * delta0)
    centre = eps * (1.0 - delta0)
    return (centre + root) / denom, (centre - root) / denom


def _sides_for(model: BandModel, w: complex) -> Tuple[Side, ...]:
    if w.imag == 0.0 and model.band_bottom < w.real < model.band_top:
        return (Side.ABOVE, Side.BELOW)
    return (Side.NONE,)


def classify_root(model: BandModel, eps: float, root: complex) -> Optional[int]:
    """Sheet on which ``root`` solves the pole equation, by direct substitution; None if on none."""
    tol = CLASSIFY_TOL * max(1.0, abs(eps), abs(root))
    for sheet in supported_sheets(model):
        for side in _sides_for(model, root):
            try:
                if abs(_residual(model, eps, root, sheet, side)) <= tol:
                    return sheet
            except (DomainError, BranchPointError):
                continue
    return None


def closed_form_poles(delta0: float, eps: float) -> List[Pole]:
    """Semicircle poles from the quadratic, each placed on the sheet it actually solves."""
    model = semicircle(delta0)
    try:
        roots = semicircle_pole_closed_form(delta0, eps)
    except DegenerateQuadraticError as exc:
        if exc.linear_root is None:
            return []
        roots = (complex(exc.linear_root),)

    disc = eps * eps - 1.0 + 2.0 * delta0
    if len(roots) == 2 and abs(disc) <= 1e-14:
        energy = complex(roots[0].real, 0.0)
        sheet = classify_root(model, eps, energy)
        if sheet is None:
            return []
        return [Pole(energy=energy, sheet=sheet, order=2, weight=None, kind=pole_kind(energy, sheet))]

    poles = []
    for root in roots:
        sheet = classify_root(model, eps, root)
        if sheet is None:
            logger.debug('quadratic root %s solves no sheet (spurious)', root)
            continue
        poles.append(_make_pole(model, root, sheet))
    return sorted(poles, key=_sort_key)


def refine_pole(
    model: BandModel,
    eps: float,
    guess: complex,
    sheet: int,
    *,
    max_iter: int = NEWTON_MAX_ITER,
) -> Pole:
    """
    Newton iteration on w - eps - Sigma_sheet(w) starting at ``guess``.

    Args:
        guess: Starting point, usually a closed-form root or a seed on the
            sheet.
        sheet: Sheet index; aliases are normalized first.

    Returns:
        The converged pole with its kind and residue weight.

    Raises:
        AccuracyError: If the iteration does not converge within ``max_iter`` steps.
    """
    sheet = normalize_sheet(model, sheet)
    w = complex(guess)
    for it in range(max_iter):
        point = SheetPoint(w, sheet)
        f = w - eps - sigma_on_sheet(model, point)
        step = f / (1.0 - sigma_derivative(model, point))
        w -= step
        if abs(w) > _DIVERGED or not cmath.isfinite(w):
            break
        if abs(step) <= 1e-14 * max(1.0, abs(w)):
            residual = abs(_residual(model, eps, w, sheet))
            if residual > 1e-10 * max(1.0, abs(eps)):
                break
            logger.debug('Newton converged on sheet %d after %d steps: %s', sheet, it + 1, w)
            return _make_pole(model, w, sheet)
    raise AccuracyError(f'Newton iteration from {guess} did not converge on sheet {sheet}', estimate=w)


def _seeds(model: BandModel, eps: float, sheet: int) -> List[complex]:
    seeds = []
    if model.band_bottom < eps < model.band_top:
        sigma_p, sigma_above, _ = sigma_cut_values(model, eps)
        seeds.append(complex(eps + sigma_p, sigma_above))
    heights = np.array([0.05, 0.25, 0.75]) * model.width
    for re in np.linspace(model.band_bottom, model.band_top, 9)[1:-1]:
        seeds.extend(complex(re, -h) for h in heights)
    if sheet < 0:
        seeds = [s.conjugate() for s in seeds]
    return seeds


def _sort_key(pole: Pole) -> Tuple[int, float, float]:
    return (pole.sheet, pole.energy.real, pole.energy.imag)


def dedupe_poles(poles: Iterable[Pole], tol: float = DEDUP_TOL) -> List[Pole]:
    kept: List[Pole] = []
    for pole in sorted(poles, key=_sort_key):
        if not any(p.sheet == pole.sheet and abs(p.energy - pole.energy) <= tol for p in kept):
            kept.append(pole)
    return kept


def resonance_poles(model: BandModel, eps: float, sheet: int = 1, *, workers: int = 1) -> List[Pole]:
    """
    Poles on a non-standard sheet, by Newton iteration from the Golden Rule
    estimate and a grid of seeds in the lower half strip (upper for sheet < 0).
    Seeds that fail to converge are skipped.

    Raises:
        ContinuationUnavailableError: For tabulated models or sheet 0.
    """
    if sheet == 0:
        raise ContinuationUnavailableError('resonances live on a non-standard sheet')
    sheet = normalize_sheet(model, sheet)

    def attempt(seed: complex) -> Optional[Pole]:
        try:
            return refine_pole(model, eps, seed, sheet)
        except (AccuracyError, BranchPointError, DomainError) as exc:
            logger.debug('seed %s skipped: %s', seed, exc)
            return None

    seeds = _seeds(model, eps, sheet)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(attempt, seeds))
    else:
        found = [attempt(s) for s in seeds]
    return dedupe_poles(p for p in found if p is not None)


def fgr_pole_estimate(model: BandModel, eps: float) -> complex:
    """First-order resonance position eps + Sigma'(eps) - i pi Delta(eps)."""
    sigma_p, sigma_above, _ = sigma_cut_values(model, eps)
    return complex(eps + sigma_p, sigma_above)


def all_poles(model: BandModel, eps: float, *, workers: int = 1) -> List[Pole]:
    """Bound states plus resonances on every continuable sheet next to the standard one."""
    poles = list(real_poles_standard_sheet(model, eps))
    if model.kind is not ModelKind.TABULATED:
        for sheet in sorted({normalize_sheet(model, s) for s in (1, -1)}):
            poles.extend(resonance_poles(model, eps, sheet, workers=workers))
    return dedupe_poles(poles)


def bound_state_onset(eps: float, *, upper: float = 4.0, tol: float = 1e-6) -> Optional[float]:
    """Smallest semicircle delta0 with at least one bound state, by bisection on the bound-state count."""

    def count(delta0: float) -> int:
        return len(real_poles_standard_sheet(semicircle(delta0), eps))

    lo, hi = 1e-6, upper
    if count(hi) == 0:
        return None
    if count(lo) > 0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if count(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def threshold_audit(eps_values: Sequence[float], *, oracle_size: int = 2000) -> List[Dict[str, object]]:
    """
    Compare bound-state onsets of the semicircle model for each eps.

    Each row carries the printed threshold (eps^2 + 1)/2, the band-edge
    onset 1 - |eps|, the onset measured by bisection, the double-root
    strength (1 - eps^2)/2, and oracle bound-state counts at 1.2x and 0.8x
    the measured onset.
    """
    from .oracle import build_discrete_model, discrete_bound_states

    rows = []
    for eps in eps_values:
        measured = bound_state_onset(eps)
        row: Dict[str, object] = {
            'eps': eps,
            'printed_threshold': 0.5 * (eps * eps + 1.0),
            'band_edge_onset': 1.0 - abs(eps),
            'measured_onset': measured,
            'double_root_delta0': 0.5 * (1.0 - eps * eps),
        }
        if measured is not None:
            above = discrete_bound_states(
                build_discrete_model(semicircle(1.2 * measured), eps, oracle_size, DiscretizationScheme.CHAIN_OF_SITES)
            )
            below = discrete_bound_states(
                build_discrete_model(semicircle(0.8 * measured), eps, oracle_size, DiscretizationScheme.CHAIN_OF_SITES)
            )
            row['oracle_count_above'] = len(above)
            row['oracle_count_below'] = len(below)
            row['confirmed'] = len(above) >= 1 and len(below) == 0
        else:
            row['confirmed'] = False
        logger.debug('threshold audit row: %s', row)
        rows.append(row)
    return rows


def bound_state_weight_sum(poles: Iterable[Pole]) -> float:
    """Total bound-state weight; the continuum carries the rest of the sum rule, so it never exceeds 1."""
    return float(sum(p.weight.real for p in poles if p.kind is PoleKind.BOUND_STATE and p.weight is not None))
