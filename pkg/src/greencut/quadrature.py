"""
Quadrature building blocks.

- tanh-sinh (double exponential) nodes with endpoint-accurate offsets, used
  for integrands with algebraic edge singularities,
- adaptive piecewise Chebyshev interpolation of a smooth factor,
- Filon-type evaluation of sum_j W_j f(x_j) exp(-i E(x_j) t) for many t,
  where the smooth factor is interpolated once and the oscillation is
  resolved by sub-panels that are short compared to one period.
"""

from __future__ import annotations

import functools
import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import legendre

from .errors import AccuracyError

logger = logging.getLogger(__name__)

_TANH_SINH_SPAN = 3.5
_CHEBYSHEV_DEGREE = 24
_SINGULAR_SHARE = 256.0
_ROUNDOFF_FACTOR = 64.0
_GAUSS_ORDER = 24
_TIME_CHUNK = 256


@functools.lru_cache(maxsize=16)
def tanh_sinh_nodes(level: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    tanh-sinh rule on [-1, 1] with step h = 2**-level.

    Returns ``(one_plus, one_minus, weights)`` where ``one_plus = 1 + u`` and
    ``one_minus = 1 - u`` are computed without cancellation, so a node's
    distance to either endpoint stays accurate down to ~1e-300.
    """
    h = 2.0**-level
    k = np.arange(-math.ceil(_TANH_SINH_SPAN / h), math.ceil(_TANH_SINH_SPAN / h) + 1)
    s = k * h
    q = 0.5 * np.pi * np.sinh(s)
    aq = np.abs(q)
    # 1 - tanh(|q|) = exp(-|q|) / cosh(|q|)
    small = np.exp(-aq) / np.cosh(aq)
    large = 2.0 - small
    one_minus = np.where(q >= 0.0, small, large)
    one_plus = np.where(q >= 0.0, large, small)
    weights = h * 0.5 * np.pi * np.cosh(s) / np.cosh(q) ** 2
    return one_plus, one_minus, weights


@dataclass(frozen=True, eq=False)
class ChebyshevPanels:
    """Piecewise Chebyshev interpolant on sorted, contiguous panels."""

    edges: np.ndarray
    coefficients: np.ndarray
    error_bound: float

    @property
    def count(self) -> int:
        return int(self.coefficients.shape[0])

    def integral(self) -> float:
        """Integral of the interpolant over all panels."""
        deg = self.coefficients.shape[1] - 1
        j = np.arange(deg + 1)
        # integral of T_j over [-1, 1]: 2/(1-j^2) for even j, 0 for odd j
        moments = np.where(j % 2 == 0, 2.0 / (1.0 - j.astype(float) ** 2), 0.0)
        half = 0.5 * np.diff(self.edges)
        return float(np.sum(half * (self.coefficients @ moments)))


@functools.lru_cache(maxsize=4)
def _chebyshev_transform(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    n = degree + 1
    nodes = cheb.chebpts1(n)
    matrix = (2.0 / n) * cheb.chebvander(nodes, degree).T
    matrix[0] *= 0.5
    return nodes, matrix


def chebyshev_panels(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    abs_tol: float,
    max_panels: int,
    degree: int = _CHEBYSHEV_DEGREE,
    min_width: float = 1e-10,
) -> ChebyshevPanels:
    """
    Adaptively bisect [a, b] until ``func`` is resolved by a degree-``degree``
    Chebyshev interpolant on every panel.

    The three trailing coefficients give the panel tail. A panel is accepted
    when its tail falls below ``abs_tol * width / (b - a)``, when its own error
    contribution ``width * tail`` is below ``abs_tol / 256``, when the tail is
    at the roundoff level of its largest coefficient, or when it is narrower
    than ``min_width * (b - a)``. The second rule lets kinks and integrable
    log edges terminate; the third keeps tolerances near machine precision
    reachable. ``func`` must be vectorized.

    Raises:
        AccuracyError: If more than ``max_panels`` panels would be needed.
    """
    nodes, transform = _chebyshev_transform(degree)
    total = b - a
    pending = np.array([[a, b]])
    accepted_edges: list[np.ndarray] = []
    accepted_coeffs: list[np.ndarray] = []
    bound = 0.0

    while pending.size:
        mid = 0.5 * (pending[:, 0] + pending[:, 1])
        half = 0.5 * (pending[:, 1] - pending[:, 0])
        x = mid[:, None] + half[:, None] * nodes[None, :]
        values = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
        coeffs = values @ transform.T

        tail = np.max(np.abs(coeffs[:, -3:]), axis=1)
        width = 2.0 * half
        floor = _ROUNDOFF_FACTOR * np.finfo(float).eps * np.max(np.abs(coeffs), axis=1)
        ok = (
            (tail <= abs_tol * width / total)
            | (width * tail <= abs_tol / _SINGULAR_SHARE)
            | (tail <= floor)
            | (width <= min_width * total)
        )

        accepted_edges.append(pending[ok])
        accepted_coeffs.append(coeffs[ok])
        bound += float(np.sum(width[ok] * tail[ok]))

        refine = pending[~ok]
        n_accepted = sum(len(e) for e in accepted_edges)
        if n_accepted + 2 * len(refine) > max_panels:
            raise AccuracyError(
                f'chebyshev paneling needs more than {max_panels} panels',
                estimate=None,
                error_bound=bound + float(np.sum(width[~ok] * tail[~ok])),
            )
        centers = 0.5 * (refine[:, 0] + refine[:, 1])
        pending = np.concatenate(
            [np.column_stack([refine[:, 0], centers]), np.column_stack([centers, refine[:, 1]])]
        )

    edges_pairs = np.concatenate(accepted_edges)
    coeffs_all = np.concatenate(accepted_coeffs)
    order = np.argsort(edges_pairs[:, 0], kind='stable')
    edges_pairs = edges_pairs[order]
    coeffs_all = coeffs_all[order]
    edges = np.append(edges_pairs[:, 0], edges_pairs[-1, 1])

    logger.debug('Chebyshev paneling on [%g, %g]: %d panels, error bound %.3g', a, b, len(order), bound)
    return ChebyshevPanels(edges=edges, coefficients=coeffs_all, error_bound=bound)


def oscillatory_nodes(
    panels: ChebyshevPanels,
    energy_of: Callable[[np.ndarray], np.ndarray],
    t_max: float,
    panels_per_period: int,
    order: int = _GAUSS_ORDER,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes for sum_j c_j exp(-i E_j t) approximating the integral of
    f(x) exp(-i E(x) t) dx for every 0 <= t <= t_max.

    Each panel is split so a sub-panel spans at most 1/panels_per_period of
    an oscillation period at t_max; Gauss-Legendre on each sub-panel then
    integrates interpolant times exponential to machine precision.

    Returns ``(energies, coefficients)``.
    """
    gl_x, gl_w = legendre.leggauss(order)
    e_edges = energy_of(panels.edges)
    energies: list[np.ndarray] = []
    coeffs: list[np.ndarray] = []

    for i in range(panels.count):
        a, b = panels.edges[i], panels.edges[i + 1]
        phase = t_max * abs(e_edges[i + 1] - e_edges[i])
        m = max(1, math.ceil(phase * panels_per_period / (2.0 * np.pi)))
        sub = np.linspace(a, b, m + 1)
        mid = 0.5 * (sub[:-1] + sub[1:])
        half = 0.5 * np.diff(sub)
        x = (mid[:, None] + half[:, None] * gl_x[None, :]).ravel()
        w = (half[:, None] * gl_w[None, :]).ravel()
        local = (2.0 * x - (a + b)) / (b - a)
        values = cheb.chebval(local, panels.coefficients[i])
        energies.append(energy_of(x))
        coeffs.append(w * values)

    return np.concatenate(energies), np.concatenate(coeffs)


def oscillatory_sum(
    energies: np.ndarray,
    coefficients: np.ndarray,
    times: np.ndarray,
    *,
    workers: int = 1,
) -> np.ndarray:
    """Evaluate sum_j c_j exp(-i E_j t) for every t, in chunks of times."""
    times = np.asarray(times, dtype=float)
    out = np.empty(times.shape, dtype=complex)
    chunks = [slice(i, min(i + _TIME_CHUNK, times.size)) for i in range(0, times.size, _TIME_CHUNK)]

    def run(chunk: slice) -> None:
        phase = np.exp(-1j * np.outer(times[chunk], energies))
        out[chunk] = phase @ coefficients

    if workers <= 1 or len(chunks) <= 1:
        for chunk in chunks:
            run(chunk)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))
    return out
