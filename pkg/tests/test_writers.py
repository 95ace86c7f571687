from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from greencut.models import Pole, PoleKind, SeriesMethod, SurvivalSeries
from greencut.writers import format_float, write_columns_csv, write_series_csv, write_series_json


def _series() -> SurvivalSeries:
    return SurvivalSeries(
        times=np.array([0.0, 0.5]),
        g=np.array([1.0 + 0.0j, 0.1 - 0.2j]),
        method=SeriesMethod.CUT_INTEGRAL,
        poles=(Pole(energy=complex(1.0127, 0.0), sheet=0, weight=complex(0.06, 0.0), kind=PoleKind.BOUND_STATE),),
    )


def test_format_float_uses_17_significant_digits() -> None:
    assert format_float(0.1) == '0.10000000000000001'
    assert format_float(1.0) == '1'


def test_write_series_csv_has_header_and_lf_endings(tmp_path) -> None:
    out_path = tmp_path / 'out' / 'survival.csv'

    write_series_csv(_series(), out_path)

    raw = out_path.read_bytes()
    assert b'\r\n' not in raw
    with out_path.open('r', encoding='utf-8', newline='') as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ['t', 're_g', 'im_g', 'p']
    assert rows[1] == ['0', '1', '0', '1']
    assert float(rows[2][3]) == pytest.approx(0.05)


def test_write_series_json_includes_model_and_poles(tmp_path) -> None:
    out_path = tmp_path / 'survival.json'

    write_series_json(_series(), out_path, model={'kind': 'flat', 'delta0': 0.2}, eps=0.0)

    data = json.loads(out_path.read_text(encoding='utf-8'))
    assert data['method'] == 'cut'
    assert data['model']['kind'] == 'flat'
    assert data['poles'][0]['kind'] == 'bound_state'
    assert data['t'] == [0.0, 0.5]


def test_write_columns_csv_aligns_columns(tmp_path) -> None:
    out_path = tmp_path / 'compare.csv'

    write_columns_csv(('t', 'p_cut', 'p_fgr'), (np.array([0.0, 1.0]), np.array([1.0, 0.5]), np.array([1.0, 0.25])), out_path)

    with out_path.open('r', encoding='utf-8', newline='') as handle:
        rows = list(csv.reader(handle))
    assert rows == [['t', 'p_cut', 'p_fgr'], ['0', '1', '1'], ['1', '0.5', '0.25']]
