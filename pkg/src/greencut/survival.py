"""
Survival amplitude g(t) of the discrete level and quantities derived from it.

The continuum part is the branch-cut integral

    I_cut(t) = int_{Eb}^{Et} A(E) exp(-i E t) dE,
    A(E) = Delta(E) / ((E - eps - Sigma'(E))^2 + pi^2 Delta(E)^2),

evaluated after the substitution E = Eb + W sin^2(theta/2), which turns the
(E - Eb)^beta edge behavior into a smooth function of theta. Bound states add
w_j exp(-i E_j t).
"""

from __future__ import annotations

import logging

from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from scipy.integrate import quad_vec
from scipy.stats import linregress

from .band import evaluate_delta
from .errors import ContinuationUnavailableError, DomainError, InsufficientDataError, UnsupportedPoleOrderError
from .models import BandModel, ModelKind, Pole, PoleKind, QuadratureConfig, SeriesMethod, SpectralDensity, SurvivalSeries
from .poles import closed_form_poles, real_poles_standard_sheet, resonance_poles
from .quadrature import chebyshev_panels, oscillatory_nodes, oscillatory_sum
from .self_energy import GUARD_RADIUS, cut_parts, sigma_cut_values, sigma_values

logger = logging.getLogger(__name__)

DEFAULT_POINTS = 600
DEFAULT_TMAX_TAU = 20.0
FGR_TOLERANCE = 0.2
MIN_TAIL_MAXIMA = 5

_RAY_DEPTH_FACTOR = 40.0
_MAX_RAY_DOUBLINGS = 20


def fgr_time(model: BandModel, eps: float) -> float:
    """tau = 1 / (2 pi Delta(eps)).

    Raises:
        DomainError: If eps is not inside the band or Delta(eps) = 0.
    """
    delta = evaluate_delta(model, eps) if model.band_bottom < eps < model.band_top else 0.0
    if delta <= 0.0:
        raise DomainError(f'Golden Rule needs Delta(eps) > 0; eps={eps} gives {delta}')
    return 1.0 / (2.0 * np.pi * delta)


def time_grid(t_max: float, points: int = DEFAULT_POINTS, *, include_zero: bool = True) -> np.ndarray:
    """Uniform grid on [0, t_max]; without zero it starts at t_max / points."""
    if not t_max > 0.0 or points < 2:
        raise DomainError(f'time grid needs t_max > 0 and at least 2 points, got {t_max}, {points}')
    if include_zero:
        return np.linspace(0.0, t_max, points)
    return np.linspace(t_max / points, t_max, points)


def _check_times(times: Iterable[float], *, positive: bool = False) -> np.ndarray:
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0:
        raise DomainError('empty time grid')
    if np.any(np.diff(t) < 0.0):
        raise DomainError('times must be sorted')
    if positive and t[0] <= 0.0:
        raise DomainError('this method needs t > 0')
    if t[0] < 0.0:
        raise DomainError('times must be nonnegative')
    return t


def _theta_map(model: BandModel, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    half = 0.5 * theta
    return model.width * np.sin(half) ** 2, model.width * np.cos(half) ** 2


def _energy_of_theta(model: BandModel):
    def energy(theta: np.ndarray) -> np.ndarray:
        lo, hi = _theta_map(model, np.asarray(theta, dtype=float))
        return np.where(lo <= hi, model.band_bottom + lo, model.band_top - hi)

    return energy


def spectral_continuum(model: BandModel, eps: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """A(E) at E = Eb + lo = Et - hi."""
    sigma_p, delta = cut_parts(model, lo, hi)
    energy = np.where(lo <= hi, model.band_bottom + lo, model.band_top - hi)
    detuning = energy - eps - sigma_p
    with np.errstate(divide='ignore', invalid='ignore'):
        out = delta / (detuning**2 + (np.pi * delta) ** 2)
    return np.nan_to_num(out, nan=0.0, posinf=0.0)


def cut_series(
    model: BandModel,
    eps: float,
    times: Sequence[float],
    cfg: Optional[QuadratureConfig] = None,
    *,
    workers: int = 1,
) -> np.ndarray:
    """
    I_cut(t) for every t in ``times``.

    The smooth factor A(E) dE/dtheta is interpolated once on adaptive
    Chebyshev panels; panels are then split so each spans at most
    1/oscillation_splitting of a period of exp(-i E t_max).

    Args:
        model: Band model; tabulated models are fine here.
        eps: Bare level energy.
        times: Non-negative, non-decreasing times.
        cfg: Quadrature settings; defaults to ``QuadratureConfig()``.
        workers: Threads used to sum over time chunks.

    Returns:
        Complex array of the cut contribution, one entry per time.

    Raises:
        AccuracyError: If the paneling exceeds ``cfg.max_subdivisions``.
    """
    cfg = cfg or QuadratureConfig()
    t = _check_times(times)
    _guard_level(model, eps)

    def smooth(theta: np.ndarray) -> np.ndarray:
        lo, hi = _theta_map(model, theta)
        return spectral_continuum(model, eps, lo, hi) * 0.5 * model.width * np.sin(theta)

    panels = chebyshev_panels(smooth, 0.0, np.pi, abs_tol=cfg.abs_tol, max_panels=cfg.max_subdivisions)
    energies, coefficients = oscillatory_nodes(panels, _energy_of_theta(model), float(t[-1]), cfg.oscillation_splitting)
    logger.debug('cut integral: %d panels, %d nodes, %d times', panels.count, energies.size, t.size)
    return oscillatory_sum(energies, coefficients, t, workers=workers)


def _guard_level(model: BandModel, eps: float) -> None:
    if abs(eps - model.band_bottom) < GUARD_RADIUS or abs(eps - model.band_top) < GUARD_RADIUS:
        logger.warning('level energy %g sits on a band edge; the cut integrand is sharply peaked there', eps)


def cut_integral(model: BandModel, eps: float, t: float, cfg: Optional[QuadratureConfig] = None) -> complex:
    return complex(cut_series(model, eps, [t], cfg)[0])


def _pole_terms(poles: Sequence[Pole], t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape, dtype=complex)
    for pole in poles:
        if pole.order != 1 or pole.weight is None:
            raise UnsupportedPoleOrderError('time dependence of second-order poles is not supported')
        out += pole.weight * np.exp(-1j * pole.energy * t)
    return out


def survival_amplitude(
    model: BandModel,
    eps: float,
    times: Sequence[float],
    cfg: Optional[QuadratureConfig] = None,
    *,
    workers: int = 1,
) -> SurvivalSeries:
    """g(t) = I_cut(t) + sum over bound states of w_j exp(-i E_j t)."""
    t = _check_times(times)
    poles = tuple(real_poles_standard_sheet(model, eps))
    g = cut_series(model, eps, t, cfg, workers=workers) + _pole_terms(poles, t)
    return SurvivalSeries(times=t, g=g, method=SeriesMethod.CUT_INTEGRAL, poles=poles)


def fgr_series(model: BandModel, eps: float, times: Sequence[float]) -> SurvivalSeries:
    """Golden Rule propagator g(t) = exp(-i (eps + Sigma'(eps)) t - t / (2 tau))."""
    t = _check_times(times)
    tau = fgr_time(model, eps)
    sigma_p, _, _ = sigma_cut_values(model, eps)
    g = np.exp(-1j * (eps + sigma_p) * t - 0.5 * t / tau)
    return SurvivalSeries(times=t, g=g, method=SeriesMethod.FGR)


def _enclosed_resonances(model: BandModel, eps: float) -> List[Pole]:
    if model.kind is ModelKind.SEMICIRCLE:
        candidates = [p for p in closed_form_poles(model.strength, eps) if p.sheet == 1]
    else:
        candidates = resonance_poles(model, eps, 1)
    return [
        p
        for p in candidates
        if p.energy.imag < 0.0 and model.band_bottom < p.energy.real < model.band_top
    ]


def resonance_exponential(model: BandModel, eps: float, times: Sequence[float]) -> SurvivalSeries:
    """Pole-only decay law: sum over enclosed second-sheet resonances of w exp(-i w t)."""
    t = _check_times(times)
    poles = tuple(_enclosed_resonances(model, eps))
    return SurvivalSeries(
        times=t,
        g=_pole_terms(poles, t),
        method=SeriesMethod.RESONANCE_EXPANSION,
        poles=poles,
        warnings=('pole terms only; cut contributions omitted',),
    )


def _ray_factor(model: BandModel, eps: float, w: complex) -> complex:
    """Delta~ G_I G_II at a point of the lower half plane."""
    sigma_1 = complex(sigma_values(model, w, 0)[0])
    sigma_2 = complex(sigma_values(model, w, 1)[0])
    # Sigma_I - Sigma_II = 2 pi i Delta~
    jump = sigma_1 - sigma_2
    return jump / (2j * np.pi) / ((w - eps - sigma_1) * (w - eps - sigma_2))


def resonance_expansion(
    model: BandModel,
    eps: float,
    times: Sequence[float],
    cfg: Optional[QuadratureConfig] = None,
) -> SurvivalSeries:
    """
    g(t) with the cut folded into two vertical rays down from the band edges.

    g(t) = sum of bound states + sum of sheet-1 resonances inside the strip
           + i exp(-i Et t) int_0^inf (Delta~ G_I G_II)(Et - i y) exp(-y t) dy
           - i exp(-i Eb t) int_0^inf (Delta~ G_I G_II)(Eb - i y) exp(-y t) dy

    Raises:
        ContinuationUnavailableError: For models without a second sheet in
            the lower half plane.
        DomainError: If any t <= 0.
    """
    if model.kind is ModelKind.TABULATED:
        raise ContinuationUnavailableError('resonance expansion needs an analytic continuation of Delta')
    cfg = cfg or QuadratureConfig()
    t = _check_times(times, positive=True)

    bound = real_poles_standard_sheet(model, eps)
    resonances = _enclosed_resonances(model, eps)
    poles = tuple(bound) + tuple(resonances)

    eb, et = model.band_bottom, model.band_top
    top_phase = 1j * np.exp(-1j * et * t)
    bottom_phase = -1j * np.exp(-1j * eb * t)

    def integrand(v: float) -> np.ndarray:
        y = v * v
        damp = 2.0 * v * np.exp(-y * t)
        value = damp * (top_phase * _ray_factor(model, eps, complex(et, -y)) + bottom_phase * _ray_factor(model, eps, complex(eb, -y)))
        return np.concatenate([value.real, value.imag])

    depth = max(_RAY_DEPTH_FACTOR / t[0], *(_RAY_DEPTH_FACTOR * abs(p.energy.imag) for p in resonances), 1.0)
    for _ in range(_MAX_RAY_DOUBLINGS):
        edge = max(abs(_ray_factor(model, eps, complex(et, -depth))), abs(_ray_factor(model, eps, complex(eb, -depth))))
        tail = edge * np.exp(-depth * t[0]) / t[0]
        if tail <= cfg.abs_tol:
            break
        depth *= 2.0
    logger.debug('resonance expansion: ray depth %g, %d resonances', depth, len(resonances))

    start = np.sqrt(2.0 * GUARD_RADIUS)
    stacked, _ = quad_vec(
        integrand,
        start,
        np.sqrt(depth),
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        norm='max',
        limit=cfg.max_subdivisions,
    )
    rays = stacked[: t.size] + 1j * stacked[t.size :]
    g = rays + _pole_terms(poles, t)
    return SurvivalSeries(times=t, g=g, method=SeriesMethod.RESONANCE_EXPANSION, poles=poles)


def spectral_density(model: BandModel, eps: float, w: float) -> SpectralDensity:
    """Continuous part A(w) (0 outside the band) plus the bound-state delta weights."""
    if model.band_bottom < w < model.band_top and min(w - model.band_bottom, model.band_top - w) >= GUARD_RADIUS:
        continuous = float(spectral_continuum(model, eps, np.array([w - model.band_bottom]), np.array([model.band_top - w]))[0])
    else:
        continuous = 0.0
    deltas = tuple((p.energy.real, p.weight.real) for p in real_poles_standard_sheet(model, eps))
    return SpectralDensity(continuous=continuous, deltas=deltas)


def fgr_deviation(series: SurvivalSeries, tau: float) -> np.ndarray:
    """Relative deviation |p - exp(-t/tau)| / exp(-t/tau)."""
    decay = np.exp(-series.times / tau)
    return np.abs(series.p - decay) / decay


def fgr_valid_window(series: SurvivalSeries, tau: float, tolerance: float = FGR_TOLERANCE) -> float:
    """Largest t such that the relative Golden Rule deviation stays within ``tolerance`` on [0, t]."""
    bad = np.flatnonzero(fgr_deviation(series, tau) > tolerance)
    if bad.size == 0:
        return float(series.times[-1])
    if bad[0] == 0:
        return 0.0
    return float(series.times[bad[0] - 1])


def _subtract_poles(series: SurvivalSeries) -> np.ndarray:
    return series.g - _pole_terms(series.poles, series.times)


def _local_maxima(times: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Interior maxima, refined by a parabola through log|value| at three neighbors."""
    mid = np.flatnonzero((values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])) + 1
    if mid.size == 0:
        return mid.astype(float), mid.astype(float)
    logs = np.log(values)
    left, centre, right = logs[mid - 1], logs[mid], logs[mid + 1]
    curvature = left - 2.0 * centre + right
    with np.errstate(divide='ignore', invalid='ignore'):
        shift = np.where(curvature < 0.0, 0.5 * (left - right) / curvature, 0.0)
    shift = np.clip(shift, -0.5, 0.5)
    step = 0.5 * (times[mid + 1] - times[mid - 1])
    return times[mid] + shift * step, np.exp(centre - 0.25 * (left - right) * shift)


def tail_exponent(series: SurvivalSeries, window: Tuple[float, float]) -> float:
    """
    Exponent alpha of the long-time envelope |I_cut| ~ t^-alpha.

    Pole terms recorded on the series are subtracted first; the envelope is
    the set of local maxima of |I_cut| inside ``window``.

    Returns:
        Minus the least-squares slope of log envelope against log t.

    Raises:
        DomainError: If the window is empty or outside the series.
        InsufficientDataError: If fewer than 5 maxima fall inside the window.
    """
    t_lo, t_hi = window
    if not (t_lo < t_hi and t_lo >= series.times[0] and t_hi <= series.times[-1] and t_lo > 0.0):
        raise DomainError(f'window {window} is not inside the series range')
    residual = np.abs(_subtract_poles(series))
    inside = np.flatnonzero((series.times >= t_lo) & (series.times <= t_hi))
    lo_idx = max(inside[0] - 1, 0) if inside.size else 0
    hi_idx = min(inside[-1] + 2, series.times.size) if inside.size else 0
    peak_t, peak_v = _local_maxima(series.times[lo_idx:hi_idx], residual[lo_idx:hi_idx])
    keep = (peak_t >= t_lo) & (peak_t <= t_hi) & (peak_v > 0.0)
    if int(np.count_nonzero(keep)) < MIN_TAIL_MAXIMA:
        raise InsufficientDataError(f'{int(np.count_nonzero(keep))} local maxima in {window}, need {MIN_TAIL_MAXIMA}')
    fit = linregress(np.log(peak_t[keep]), np.log(peak_v[keep]))
    logger.debug('tail fit: slope %.4f, r=%.4f over %d maxima', fit.slope, fit.rvalue, np.count_nonzero(keep))
    return float(-fit.slope)


def dominant_frequency(series: SurvivalSeries, fraction: float = 0.5, *, pad: int = 16) -> float:
    """
    Angular frequency of the strongest oscillation of p(t) over the last
    ``fraction`` of a uniform series.

    The segment is linearly detrended and Hann-windowed; frequencies below
    two cycles per segment are ignored and the peak is refined by a parabola.

    Raises:
        InsufficientDataError: If the segment is too short to resolve a peak.
    """
    start = int(series.times.size * (1.0 - fraction))
    t = series.times[start:]
    p = series.p[start:]
    if t.size < 16:
        raise InsufficientDataError('need at least 16 samples for a frequency estimate')
    dt = float(np.mean(np.diff(t)))
    span = float(t[-1] - t[0])

    trend = np.polyval(np.polyfit(t, p, 1), t)
    signal = (p - trend) * np.hanning(t.size)
    n = 1 << int(np.ceil(np.log2(t.size * pad)))
    spectrum = np.abs(np.fft.rfft(signal, n))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n, dt)

    allowed = np.flatnonzero(freqs >= 2.0 * 2.0 * np.pi / span)
    if allowed.size < 3:
        raise InsufficientDataError('segment too short to resolve any oscillation')
    k = allowed[int(np.argmax(spectrum[allowed]))]
    if 0 < k < spectrum.size - 1:
        left, centre, right = spectrum[k - 1], spectrum[k], spectrum[k + 1]
        denom = left - 2.0 * centre + right
        shift = 0.5 * (left - right) / denom if denom < 0.0 else 0.0
        return float(freqs[k] + shift * (freqs[1] - freqs[0]))
    return float(freqs[k])


def bound_state_beat(poles: Sequence[Pole]) -> Optional[float]:
    """|E1 - E2| for the two outermost bound states, if there are at least two."""
    energies = sorted(p.energy.real for p in poles if p.kind is PoleKind.BOUND_STATE)
    if len(energies) < 2:
        return None
    return float(energies[-1] - energies[0])
