from __future__ import annotations

import csv
import json

from typing import TYPE_CHECKING, Any, Dict, Mapping, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from pathlib import Path

    from .models import SurvivalSeries

SERIES_HEADER = ('t', 're_g', 'im_g', 'p')


def format_float(value: float) -> str:
    return format(float(value), '.17g')


def write_series_csv(series: SurvivalSeries, out_path: Path) -> None:
    """
    Write a survival series as CSV with header ``t,re_g,im_g,p``.

    Values use 17 significant digits and LF line endings.
    """
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(SERIES_HEADER)
        for t, g, p in zip(series.times, series.g, series.p):
            writer.writerow([format_float(t), format_float(g.real), format_float(g.imag), format_float(p)])


def series_to_dict(series: SurvivalSeries, model: Optional[Mapping[str, Any]] = None, eps: Optional[float] = None) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        'method': series.method.value,
        't': [float(v) for v in series.times],
        're_g': [float(v) for v in series.g.real],
        'im_g': [float(v) for v in series.g.imag],
        'p': [float(v) for v in series.p],
        'poles': [p.as_dict() for p in series.poles],
        'warnings': list(series.warnings),
    }
    if model is not None:
        out['model'] = dict(model)
    if eps is not None:
        out['eps'] = eps
    return out


def write_json(data: Any, out_path: Path) -> None:
    """Write JSON with sorted keys, two-space indent and a trailing newline."""
    out_path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(data, indent=2, sort_keys=True, default=_json_default)
    out_path.write_text(text + '\n', encoding='utf-8', newline='\n')


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    raise TypeError(f'cannot serialize {type(value).__name__}')


def write_series_json(series: SurvivalSeries, out_path: Path, model: Optional[Mapping[str, Any]] = None, eps: Optional[float] = None) -> None:
    write_json(series_to_dict(series, model, eps), out_path)


def write_columns_csv(header: Sequence[str], columns: Sequence[np.ndarray], out_path: Path) -> None:
    """Write aligned numeric columns (e.g. t and p per method) as CSV."""
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([format_float(v) for v in row])
