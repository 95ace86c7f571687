from __future__ import annotations

import argparse
import logging
import math
import sys

from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .band import describe_model
from .compare import compare_methods, compute_series
from .config import RunConfig, parse_floats, parse_methods, resolve_out_dir, resolve_threads
from .errors import DegenerateQuadraticError, DomainError, GreencutError
from .models import BandModel, DiscretizationScheme, ModelKind, SeriesMethod, SheetPoint, Side
from .oracle import build_discrete_model, discrete_bound_states, evolve_survival, recurrence_horizon
from .poles import all_poles, bound_state_weight_sum, closed_form_poles, semicircle_pole_closed_form, threshold_audit
from .self_energy import GUARD_RADIUS, sample_self_energy
from .survival import (
    bound_state_beat,
    fgr_deviation,
    fgr_time,
    fgr_valid_window,
    spectral_continuum,
    spectral_density,
    tail_exponent,
    time_grid,
)
from .writers import series_to_dict, write_columns_csv, write_json, write_series_csv

LOGGER_NAME = 'greencut'

AUDIT_EPS = (0.0, 0.4, -0.4, 0.6, -0.6)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help='Flat key=value file; flags override its values.')
    common.add_argument('--model', default=None, choices=[k.value for k in ModelKind], help='Band model (default: flat).')
    common.add_argument('--delta0', type=float, default=None, help='Coupling strength delta0 (default: 0.02).')
    common.add_argument('--eps', type=float, default=None, help='Discrete level energy (default: -0.4).')
    common.add_argument('--table', default=None, help='CSV with header E,delta for --model table.')
    common.add_argument('--beta-bottom', type=float, default=None, help='Lower edge exponent for --model power.')
    common.add_argument('--beta-top', type=float, default=None, help='Upper edge exponent for --model power.')
    common.add_argument('--tmax-tau', type=float, default=None, help='Time span in Golden Rule units tau (default: 20).')
    common.add_argument('--tmax-abs', type=float, default=None, help='Time span in absolute units (overrides --tmax-tau).')
    common.add_argument('--points', type=int, default=None, help='Number of grid points (default: 600).')
    common.add_argument('--abs-tol', type=float, default=None, help='Absolute quadrature tolerance (default: 1e-10).')
    common.add_argument('--rel-tol', type=float, default=None, help='Relative quadrature tolerance (default: 1e-8).')
    common.add_argument('--max-subdivisions', type=int, default=None, help='Panel budget (default: 4000).')
    common.add_argument('--oscillation-splitting', type=int, default=None, help='Panels per oscillation period (>= 4).')
    common.add_argument('--format', default=None, choices=['csv', 'json'], help='Output format (default: csv).')
    common.add_argument('--output', default=None, help='Output file (default: <out-dir>/<command>.<format>).')
    common.add_argument(
        '--out-dir',
        default=None,
        help='Output directory (defaults to $GREENCUT_OUT_DIR, else the current directory).',
    )
    common.add_argument('--debug', action='store_true', help='Enable verbose debug logging.')
    return common


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """
    Parse CLI args.

    Every subcommand takes the model and output flags; values not given on
    the command line come from --config, then from the built-in defaults.
    """
    parser = argparse.ArgumentParser(
        prog='greencut',
        description='Decay of a discrete level coupled to a continuum band (Fano-Anderson model).',
    )
    sub = parser.add_subparsers(dest='command', required=True)
    common = _common_parser()

    p = sub.add_parser('survival', parents=[common], help='Survival amplitude g(t) and p(t).')
    p.add_argument('--method', default=None, choices=[m.value for m in SeriesMethod])
    p.add_argument('--fgr-tolerance', type=float, default=None, help='Relative deviation defining the FGR window.')
    _add_oracle_flags(p)

    p = sub.add_parser('poles', parents=[common], help='Pole report (JSON).')
    p.add_argument('--sweep', type=parse_floats, default=None, help='Comma-separated delta0 values for trajectories.')
    p.add_argument('--audit', action='store_const', const=True, default=None, help='Include the threshold audit.')
    _add_oracle_flags(p)

    p = sub.add_parser('sigma', parents=[common], help='Self-energy on a grid of frequencies.')
    p.add_argument('--energies', type=parse_floats, default=None, help='Comma-separated real parts.')
    p.add_argument('--imag', type=float, default=None, help='Imaginary part added to every frequency.')
    p.add_argument('--sheet', type=int, default=None, help='Riemann sheet (default: 0).')
    p.add_argument('--side', default=None, choices=['above', 'below'], help='Lip of the cut for real in-band points.')

    p = sub.add_parser('spectral', parents=[common], help='Spectral density A(w) and bound-state weights.')
    p.add_argument('--energies', type=parse_floats, default=None, help='Comma-separated frequencies.')

    p = sub.add_parser('compare', parents=[common], help='p(t) from several methods with pairwise deviations.')
    p.add_argument('--methods', type=parse_methods, default=None, help='Comma-separated subset of cut,resonance,oracle,fgr.')
    p.add_argument('--window', type=parse_floats, default=None, help='t_lo,t_hi restricting the reported deviations.')
    _add_oracle_flags(p)

    p = sub.add_parser('oracle', parents=[common], help='Exact evolution of a finite discretization.')
    _add_oracle_flags(p)

    p = sub.add_parser('tail', parents=[common], help='Long-time power-law exponent of the cut contribution.')
    p.add_argument('--window', type=parse_floats, default=None, help='t_lo,t_hi in absolute units.')
    p.add_argument('--method', default=None, choices=[m.value for m in SeriesMethod])
    _add_oracle_flags(p)

    return parser.parse_args(argv)


def _add_oracle_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--oracle-n', type=int, default=None, help='Number of band levels (default: 2000).')
    parser.add_argument('--scheme', default=None, choices=[s.value for s in DiscretizationScheme])


def _configure_logging(debug: bool) -> logging.Logger:
    """
    Configure logging for CLI execution.

    - INFO by default, DEBUG with --debug
    - Logs to stderr (so stdout remains the report output)
    """
    logger = logging.getLogger(LOGGER_NAME)

    if logger.handlers:
        logger.setLevel(logging.DEBUG if debug else logging.INFO)
        return logger

    level = logging.DEBUG if debug else logging.INFO
    logger.setLevel(level)

    handler = logging.StreamHandler(stream=sys.stderr)
    handler.setLevel(level)
    formatter = logging.Formatter('[%(levelname)s] %(message)s')
    handler.setFormatter(formatter)

    logger.addHandler(handler)
    logger.propagate = False
    return logger


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < --config file < flags."""
    base = RunConfig.from_file(Path(args.config).expanduser()) if args.config else RunConfig()
    overrides = {k: v for k, v in vars(args).items() if k not in ('command', 'config', 'debug')}
    return base.updated(overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI entrypoint.

    Returns:
        Process exit code (0 success, 2 user/validation/numerical error).
    """
    args = parse_args(argv)
    logger = _configure_logging(debug=args.debug)

    logger.debug('Args parsed: %s', args)

    try:
        cfg = build_config(args)
        threads = resolve_threads()
        logger.debug('Effective config:\n%s', cfg.to_text())
        return COMMANDS[args.command](cfg, threads, logger)
    except (GreencutError, OSError) as exc:
        logger.error('%s', exc)
        if args.debug:
            logger.exception('Failure in %s', args.command)
        print(f'Error: {exc}', file=sys.stderr)
        return 2


def _output_path(cfg: RunConfig, command: str, suffix: str) -> Path:
    if cfg.output:
        return Path(cfg.output).expanduser().resolve()
    return resolve_out_dir(cfg.out_dir) / f'{command}.{suffix}'


def _times(cfg: RunConfig, model: BandModel, method: SeriesMethod) -> np.ndarray:
    if cfg.tmax_abs is not None:
        t_max = cfg.tmax_abs
    else:
        t_max = cfg.tmax_tau * fgr_time(model, cfg.eps)
    return time_grid(t_max, cfg.points, include_zero=method is not SeriesMethod.RESONANCE_EXPANSION)


def _try_tau(model: BandModel, eps: float) -> Optional[float]:
    try:
        return fgr_time(model, eps)
    except DomainError:
        return None


def _cmd_survival(cfg: RunConfig, threads: int, logger: logging.Logger) -> int:
    model = cfg.band_model()
    method = SeriesMethod(cfg.method)
    times = _times(cfg, model, method)
    logger.info('Model: %s, eps=%g, method=%s, %d times up to %g', model.kind.value, cfg.eps, method.value, times.size, times[-1])

    series = compute_series(
        method,
        model,
        cfg.eps,
        times,
        cfg.quadrature(),
        oracle_size=cfg.oracle_n,
        scheme=DiscretizationScheme(cfg.scheme),
        workers=threads,
    )

    out_path = _output_path(cfg, 'survival', cfg.format)
    summary: Dict[str, object] = {}
    tau = _try_tau(model, cfg.eps)
    if tau is not None:
        summary['tau'] = tau
        if method is not SeriesMethod.FGR:
            window = fgr_valid_window(series, tau, cfg.fgr_tolerance)
            summary['max_fgr_deviation'] = float(np.max(fgr_deviation(series, tau)))
            summary['fgr_window_tau'] = window / tau
            summary['fgr_regime_absent'] = window < tau

    if cfg.format == 'csv':
        write_series_csv(series, out_path)
    else:
        data = series_to_dict(series, describe_model(model), cfg.eps)
        data['summary'] = summary
        write_json(data, out_path)

    _print_survival_summary(model, cfg, series.poles, summary, series.warnings)
    print(f'Wrote: {out_path}')
    return 0


def _print_survival_summary(model: BandModel, cfg: RunConfig, poles, summary: Dict[str, object], notes) -> None:
    print(f'Model: {model.kind.value}  delta0={model.strength:g}  eps={cfg.eps:g}')
    if 'tau' in summary:
        print(f'tau: {summary["tau"]:.6g}')
    print(f'Poles: {len(poles)}')
    for pole in poles:
        weight = '-' if pole.weight is None else f'{pole.weight.real:.6g}'
        print(f'{pole.kind.value:>16}  sheet={pole.sheet}  E={pole.energy.real:.10g}{pole.energy.imag:+.10g}i  w={weight}')
    beat = bound_state_beat(poles)
    if beat is not None:
        print(f'Bound-state beat |E1-E2|: {beat:.6g}')
    if 'max_fgr_deviation' in summary:
        print(f'Max deviation from FGR: {summary["max_fgr_deviation"]:.4g}')
        print(f'FGR-valid window: {summary["fgr_window_tau"]:.3g} tau (tolerance {cfg.fgr_tolerance:g})')
        if summary['fgr_regime_absent']:
            print('FGR regime absent')
    for note in notes:
        print(f'Warning: {note}', file=sys.stderr)


def _cmd_poles(cfg: RunConfig, threads: int, logger: logging.Logger) -> int:
    model = cfg.band_model()
    poles = all_poles(model, cfg.eps, workers=threads)
    report: Dict[str, object] = {
        'model': describe_model(model),
        'eps': cfg.eps,
        'poles': [p.as_dict() for p in poles],
        'bound_state_weight_sum': bound_state_weight_sum(poles),
    }
    notes: List[str] = []

    if model.kind is ModelKind.SEMICIRCLE:
        report['closed_form'] = _closed_form_report(model.strength, cfg.eps, notes)

    if cfg.sweep:
        trajectories = []
        for delta0 in cfg.sweep:
            swept = cfg.updated({'delta0': delta0}).band_model()
            entry: Dict[str, object] = {'delta0': delta0, 'poles': [p.as_dict() for p in all_poles(swept, cfg.eps, workers=threads)]}
            if swept.kind is ModelKind.SEMICIRCLE:
                entry['closed_form'] = _closed_form_report(delta0, cfg.eps, notes)
            trajectories.append(entry)
        report['sweep'] = trajectories

    if cfg.audit:
        logger.info('Running threshold audit over eps=%s', AUDIT_EPS)
        report['threshold_audit'] = threshold_audit(AUDIT_EPS, oracle_size=cfg.oracle_n)

    report['notes'] = notes
    out_path = _output_path(cfg, 'poles', 'json')
    write_json(report, out_path)

    for pole in report['poles']:
        print(f'{pole["kind"]:>16}  sheet={pole["sheet"]}  E={pole["re_energy"]:.10g}{pole["im_energy"]:+.10g}i')
    for note in dict.fromkeys(notes):
        print(f'Note: {note}')
    print(f'Wrote: {out_path}')
    return 0


def _closed_form_report(delta0: float, eps: float, notes: List[str]) -> Dict[str, object]:
    try:
        roots = semicircle_pole_closed_form(delta0, eps)
    except DegenerateQuadraticError as exc:
        notes.append(f'delta0={delta0:g}: degenerate quadratic, one root moved to infinity')
        linear = exc.linear_root
        return {
            'degenerate': True,
            'linear_root': linear,
            'poles': [p.as_dict() for p in closed_form_poles(delta0, eps)],
        }
    return {
        'degenerate': False,
        'roots': [{'re': r.real, 'im': r.imag} for r in roots],
        'poles': [p.as_dict() for p in closed_form_poles(delta0, eps)],
    }


def _frequency_grid(cfg: RunConfig, model: BandModel, inside_only: bool) -> np.ndarray:
    if cfg.energies:
        return np.asarray(cfg.energies, dtype=float)
    if inside_only:
        return np.linspace(model.band_bottom, model.band_top, cfg.points + 2)[1:-1]
    pad = 0.5 * model.width
    return np.linspace(model.band_bottom - pad, model.band_top + pad, cfg.points)


def _cmd_sigma(cfg: RunConfig, threads: int, logger: logging.Logger) -> int:
    model = cfg.band_model()
    side = Side(cfg.side)
    rows = []
    for re in _frequency_grid(cfg, model, inside_only=False):
        w = complex(re, cfg.imag)
        if min(abs(w - model.band_bottom), abs(w - model.band_top)) < 2.0 * GUARD_RADIUS:
            logger.warning('Skipping w=%s at a branch point', w)
            continue
        sample = sample_self_energy(model, SheetPoint(w, cfg.sheet), side)
        rows.append((w.real, w.imag, sample.value.real, sample.value.imag, sample.derivative.real, sample.derivative.imag))

    header = ('re_w', 'im_w', 're_sigma', 'im_sigma', 're_dsigma', 'im_dsigma')
    out_path = _output_path(cfg, 'sigma', cfg.format)
    columns = [np.array(c) for c in zip(*rows)] if rows else [np.array([]) for _ in header]
    if cfg.format == 'csv':
        write_columns_csv(header, columns, out_path)
    else:
        write_json({'model': describe_model(model), 'sheet': cfg.sheet, 'side': side.value, **{h: c.tolist() for h, c in zip(header, columns)}}, out_path)
    print(f'Points: {len(rows)}  sheet={cfg.sheet}')
    print(f'Wrote: {out_path}')
    return 0


def _cmd_spectral(cfg: RunConfig, threads: int, logger: logging.Logger) -> int:
    model = cfg.band_model()
    grid = _frequency_grid(cfg, model, inside_only=True)
    lo, hi = grid - model.band_bottom, model.band_top - grid
    inside = (lo >= GUARD_RADIUS) & (hi >= GUARD_RADIUS)
    values = np.zeros(grid.shape)
    if np.any(inside):
        values[inside] = spectral_continuum(model, cfg.eps, lo[inside], hi[inside])
    deltas = spectral_density(model, cfg.eps, float(grid[0])).deltas

    continuum_weight = float(np.trapezoid(values, grid)) if grid.size > 1 else 0.0
    out_path = _output_path(cfg, 'spectral', cfg.format)
    if cfg.format == 'csv':
        write_columns_csv(('w', 'A'), (grid, values), out_path)
    else:
        write_json(
            {
                'model': describe_model(model),
                'eps': cfg.eps,
                'w': grid.tolist(),
                'A': values.tolist(),
                'deltas': [{'energy': e, 'weight': w} for e, w in deltas],
            },
            out_path,
        )
    for energy, weight in deltas:
        print(f'delta at E={energy:.10g}  weight={weight:.6g}')
    print(f'Continuum weight (grid estimate): {continuum_weight:.6g}')
    print(f'Wrote: {out_path}')
    return 0


def _cmd_compare(cfg: RunConfig, threads: int, logger: logging.Logger) -> int:
    model = cfg.band_model()
    methods = [SeriesMethod(m) for m in cfg.methods]
    grid_method = SeriesMethod.RESONANCE_EXPANSION if SeriesMethod.RESONANCE_EXPANSION in methods else SeriesMethod.CUT_INTEGRAL
    times = _times(cfg, model, grid_method)
    comparison = compare_methods(
        model,
        cfg.eps,
        methods,
        times,
        cfg.quadrature(),
        oracle_size=cfg.oracle_n,
        scheme=DiscretizationScheme(cfg.scheme),
        workers=threads,
        window=cfg.window,
    )

    out_path = _output_path(cfg, 'compare', cfg.format)
    if cfg.format == 'csv':
        write_columns_csv(comparison.header(), comparison.columns(), out_path)
    else:
        write_json(
            {
                'model': describe_model(model),
                'eps': cfg.eps,
                't': comparison.times.tolist(),
                'p': {m.value: s.p.tolist() for m, s in comparison.series.items()},
                'max_deviation': {f'{a.value}-{b.value}': d for (a, b), d in comparison.deviations.items()},
                'window': None if cfg.window is None else list(cfg.window),
                'warnings': list(comparison.warnings),
            },
            out_path,
        )
    for (a, b), dev in comparison.deviations.items():
        print(f'max |p_{a.value} - p_{b.value}|: {dev:.4g}')
    for note in comparison.warnings:
        print(f'Warning: {note}', file=sys.stderr)
    print(f'Wrote: {out_path}')
    return 0


def _cmd_oracle(cfg: RunConfig, threads: int, logger: logging.Logger) -> int:
    model = cfg.band_model()
    dm = build_discrete_model(model, cfg.eps, cfg.oracle_n, DiscretizationScheme(cfg.scheme))
    times = _times(cfg, model, SeriesMethod.ORACLE)
    series = evolve_survival(dm, times, workers=threads)
    bound = discrete_bound_states(dm)

    out_path = _output_path(cfg, 'oracle', cfg.format)
    if cfg.format == 'csv':
        write_series_csv(series, out_path)
    else:
        data = series_to_dict(series, describe_model(model), cfg.eps)
        data['bound_states'] = [{'energy': e, 'overlap': o} for e, o in bound]
        data['recurrence_horizon'] = recurrence_horizon(dm)
        write_json(data, out_path)

    print(f'N={dm.size}  scheme={dm.scheme.value}  recurrence horizon={recurrence_horizon(dm):.6g}')
    for energy, overlap in bound:
        print(f'bound state E={energy:.10g}  overlap={overlap:.6g}')
    for note in series.warnings:
        print(f'Warning: {note}', file=sys.stderr)
    print(f'Wrote: {out_path}')
    return 0


def _cmd_tail(cfg: RunConfig, threads: int, logger: logging.Logger) -> int:
    model = cfg.band_model()
    method = SeriesMethod(cfg.method)
    if cfg.window is None:
        raise DomainError('tail needs --window t_lo,t_hi')
    t_lo, t_hi = cfg.window
    # at least 8 samples per period of the fastest edge beat
    points = max(cfg.points, math.ceil(8.0 * (t_hi - t_lo) * model.width / (2.0 * np.pi)))
    start = max(t_lo - 0.05 * (t_hi - t_lo), 0.5 * t_lo)
    times = np.linspace(start, t_hi, points)
    series = compute_series(
        method,
        model,
        cfg.eps,
        times,
        cfg.quadrature(),
        oracle_size=cfg.oracle_n,
        scheme=DiscretizationScheme(cfg.scheme),
        workers=threads,
    )
    alpha = tail_exponent(series, (t_lo, t_hi))

    out_path = _output_path(cfg, 'tail', 'json')
    write_json({'model': describe_model(model), 'eps': cfg.eps, 'method': method.value, 'window': [t_lo, t_hi], 'alpha': alpha}, out_path)
    print(f'Tail exponent alpha: {alpha:.4f}  (envelope ~ t^-alpha over [{t_lo:g}, {t_hi:g}])')
    print(f'Wrote: {out_path}')
    return 0


COMMANDS: Dict[str, Callable[[RunConfig, int, logging.Logger], int]] = {
    'survival': _cmd_survival,
    'poles': _cmd_poles,
    'sigma': _cmd_sigma,
    'spectral': _cmd_spectral,
    'compare': _cmd_compare,
    'oracle': _cmd_oracle,
    'tail': _cmd_tail,
}


if __name__ == '__main__':
    raise SystemExit(main())
