"""
Run configuration.

Sources, lowest to highest precedence: built-in defaults, a flat key=value
file, command-line flags. ``RunConfig.to_text()`` writes the same key=value
format back, so file -> parse -> serialize -> parse is a fixed point.
"""

from __future__ import annotations

import dataclasses
import os

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

from .band import build_model
from .errors import ConfigError
from .io_utils import read_key_value_file
from .models import BandModel, DiscretizationScheme, ModelKind, QuadratureConfig, SeriesMethod

THREADS_ENV = 'GREENCUT_THREADS'
OUT_DIR_ENV = 'GREENCUT_OUT_DIR'

FORMATS = ('csv', 'json')


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f'not a boolean: {text!r}')


def parse_methods(text: str) -> Tuple[str, ...]:
    return tuple(m.strip() for m in text.split(',') if m.strip())


def parse_floats(text: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in text.split(',') if v.strip())


@dataclass(frozen=True)
class RunConfig:
    model: str = ModelKind.FLAT_BAND.value
    delta0: float = 0.02
    eps: float = -0.4
    table: Optional[str] = None
    beta_bottom: float = 0.5
    beta_top: float = 0.5
    method: str = SeriesMethod.CUT_INTEGRAL.value
    methods: Tuple[str, ...] = (SeriesMethod.CUT_INTEGRAL.value, SeriesMethod.FGR.value)
    tmax_tau: float = 20.0
    tmax_abs: Optional[float] = None
    points: int = 600
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 4000
    oscillation_splitting: int = 4
    oracle_n: int = 2000
    scheme: str = DiscretizationScheme.UNIFORM_LEVELS.value
    fgr_tolerance: float = 0.2
    window: Optional[Tuple[float, ...]] = None
    energies: Optional[Tuple[float, ...]] = None
    sweep: Optional[Tuple[float, ...]] = None
    imag: float = 0.0
    side: str = 'above'
    sheet: int = 0
    format: str = 'csv'
    output: Optional[str] = None
    out_dir: Optional[str] = None
    audit: bool = False

    def __post_init__(self) -> None:
        try:
            ModelKind(self.model)
        except ValueError as exc:
            raise ConfigError(f'unknown model {self.model!r}') from exc
        for name in (self.method, *self.methods):
            try:
                SeriesMethod(name)
            except ValueError as exc:
                raise ConfigError(f'unknown method {name!r}') from exc
        try:
            DiscretizationScheme(self.scheme)
        except ValueError as exc:
            raise ConfigError(f'unknown discretization scheme {self.scheme!r}') from exc
        if self.format not in FORMATS:
            raise ConfigError(f'format must be one of {", ".join(FORMATS)}, got {self.format!r}')
        if self.points < 2:
            raise ConfigError('points must be >= 2')
        if self.tmax_tau <= 0.0 or (self.tmax_abs is not None and self.tmax_abs <= 0.0):
            raise ConfigError('time span must be positive')
        if self.window is not None and len(self.window) != 2:
            raise ConfigError('window takes two values: t_lo,t_hi')
        if not self.delta0 > 0.0:
            raise ConfigError('delta0 must be positive')
        if self.side not in ('above', 'below'):
            raise ConfigError(f'side must be above or below, got {self.side!r}')
        if self.oracle_n < 16:
            raise ConfigError('oracle_n must be >= 16')

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> RunConfig:
        """Build a config from string values (as read from a file)."""
        return cls().updated(parse_values(values))

    @classmethod
    def from_file(cls, path: Path) -> RunConfig:
        return cls.from_mapping(read_key_value_file(path))

    def updated(self, overrides: Mapping[str, Any]) -> RunConfig:
        """Copy with typed overrides; ``None`` entries are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(changes) - set(_PARSERS)
        if unknown:
            raise ConfigError(f'unknown config keys: {", ".join(sorted(unknown))}')
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in sorted(dataclasses.fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f'{f.name}={_format_value(value)}')
        return '\n'.join(lines) + '\n'

    def band_model(self) -> BandModel:
        return build_model(
            self.model,
            self.delta0,
            beta_bottom=self.beta_bottom,
            beta_top=self.beta_top,
            table=Path(self.table) if self.table else None,
        )

    def quadrature(self) -> QuadratureConfig:
        try:
            return QuadratureConfig(
                abs_tol=self.abs_tol,
                rel_tol=self.rel_tol,
                max_subdivisions=self.max_subdivisions,
                oscillation_splitting=self.oscillation_splitting,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, tuple):
        return ','.join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_PARSERS: Dict[str, Callable[[str], Any]] = {
    'model': str,
    'delta0': float,
    'eps': float,
    'table': str,
    'beta_bottom': float,
    'beta_top': float,
    'method': str,
    'methods': parse_methods,
    'tmax_tau': float,
    'tmax_abs': float,
    'points': int,
    'abs_tol': float,
    'rel_tol': float,
    'max_subdivisions': int,
    'oscillation_splitting': int,
    'oracle_n': int,
    'scheme': str,
    'fgr_tolerance': float,
    'window': parse_floats,
    'energies': parse_floats,
    'sweep': parse_floats,
    'imag': float,
    'side': str,
    'sheet': int,
    'format': str,
    'output': str,
    'out_dir': str,
    'audit': _parse_bool,
}


def parse_values(values: Mapping[str, str]) -> Dict[str, Any]:
    """
    Convert string values to field types.

    Raises:
        ConfigError: On an unknown key or a value of the wrong type.
    """
    parsed: Dict[str, Any] = {}
    for key, raw in values.items():
        parser = _PARSERS.get(key)
        if parser is None:
            raise ConfigError(f'unknown config key {key!r}')
        try:
            parsed[key] = parser(raw)
        except ValueError as exc:
            raise ConfigError(f'{key}: {exc}') from exc
    return parsed


def resolve_threads(environ: Optional[Mapping[str, str]] = None) -> int:
    """
    Worker threads from $GREENCUT_THREADS (default 1).

    Raises:
        ConfigError: If the variable is set to anything but a positive integer.
    """
    env = os.environ if environ is None else environ
    raw = env.get(THREADS_ENV, '').strip()
    if not raw:
        return 1
    try:
        threads = int(raw)
    except ValueError as exc:
        raise ConfigError(f'{THREADS_ENV} must be a positive integer, got {raw!r}') from exc
    if threads < 1:
        raise ConfigError(f'{THREADS_ENV} must be a positive integer, got {raw!r}')
    return threads


def resolve_out_dir(cli_value: Optional[str], environ: Optional[Mapping[str, str]] = None) -> Path:
    """--out-dir, then $GREENCUT_OUT_DIR, then the current directory."""
    env = os.environ if environ is None else environ
    chosen = cli_value or env.get(OUT_DIR_ENV, '')
    if not chosen:
        return Path.cwd().resolve()
    return Path(chosen).expanduser().resolve()
