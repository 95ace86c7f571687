from __future__ import annotations

import csv
import io

from typing import TYPE_CHECKING, Dict, List, Sequence, Tuple

from .errors import ConfigError, InvalidModelError

if TYPE_CHECKING:
    from pathlib import Path


def read_text_best_effort(path: Path) -> str:
    """
    Read a small text input (config file or table) as UTF-8, falling back to Latin-1.

    Raises:
        OSError: If the file cannot be read.
    """
    try:
        return path.read_text(encoding='utf-8')
    except UnicodeDecodeError:
        return path.read_text(encoding='latin-1')


def parse_key_values(text: str) -> Dict[str, str]:
    """
    Parse flat ``key=value`` text.

    Blank lines and lines starting with ``#`` are skipped; keys are
    normalized to lowercase with ``-`` mapped to ``_``.

    Raises:
        ConfigError: On a line without ``=`` or a repeated key.
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError(f'line {lineno}: expected key=value, got {line!r}')
        key, _, value = line.partition('=')
        key = key.strip().lower().replace('-', '_')
        if not key:
            raise ConfigError(f'line {lineno}: empty key')
        if key in values:
            raise ConfigError(f'line {lineno}: duplicate key {key!r}')
        values[key] = value.strip()
    return values


def read_key_value_file(path: Path) -> Dict[str, str]:
    return parse_key_values(read_text_best_effort(path))


def read_table_csv(path: Path, columns: Sequence[str]) -> List[Tuple[float, float]]:
    """
    Read a two-column numeric CSV whose header matches ``columns``.

    Raises:
        InvalidModelError: On a wrong header or a non-numeric row.
        OSError: If the file cannot be read.
    """
    reader = csv.reader(io.StringIO(read_text_best_effort(path)))
    header = [h.strip() for h in next(reader, [])]
    if header != list(columns):
        raise InvalidModelError(f'{path.name}: expected header {",".join(columns)!r}, got {",".join(header)!r}')

    rows: List[Tuple[float, float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise InvalidModelError(f'{path.name}:{lineno}: expected 2 columns, got {len(row)}')
        try:
            rows.append((float(row[0]), float(row[1])))
        except ValueError as exc:
            raise InvalidModelError(f'{path.name}:{lineno}: {exc}') from exc
    return rows
