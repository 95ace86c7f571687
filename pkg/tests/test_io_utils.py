from __future__ import annotations

import pytest

from greencut.errors import ConfigError, InvalidModelError
from greencut.io_utils import parse_key_values, read_table_csv, read_text_best_effort


def test_read_text_best_effort_reads_utf8(tmp_path) -> None:
    p = tmp_path / 'run.cfg'
    p.write_text('# Δ₀ sweep\nmodel=flat\n', encoding='utf-8')

    assert read_text_best_effort(p) == '# Δ₀ sweep\nmodel=flat\n'


def test_read_text_best_effort_falls_back_to_latin1(tmp_path) -> None:
    p = tmp_path / 'latin1.cfg'
    p.write_bytes('# café\n'.encode('latin-1'))

    assert read_text_best_effort(p) == '# café\n'


def test_read_text_best_effort_raises_for_missing_file(tmp_path) -> None:
    p = tmp_path / 'missing.cfg'
    with pytest.raises(OSError):
        _ = read_text_best_effort(p)


def test_parse_key_values_skips_comments_and_normalizes_keys() -> None:
    text = '# comment\n\nDelta0 = 0.2\ntmax-tau=20\n'

    assert parse_key_values(text) == {'delta0': '0.2', 'tmax_tau': '20'}


def test_parse_key_values_rejects_line_without_equals() -> None:
    with pytest.raises(ConfigError, match='line 1'):
        parse_key_values('model flat\n')


def test_parse_key_values_rejects_duplicates() -> None:
    with pytest.raises(ConfigError, match='duplicate'):
        parse_key_values('eps=0\neps=1\n')


def test_read_table_csv_reads_rows(tmp_path) -> None:
    p = tmp_path / 'delta.csv'
    p.write_text('E,delta\n-1,0\n0,0.5\n\n1,0\n', encoding='utf-8')

    assert read_table_csv(p, columns=('E', 'delta')) == [(-1.0, 0.0), (0.0, 0.5), (1.0, 0.0)]


def test_read_table_csv_rejects_wrong_header(tmp_path) -> None:
    p = tmp_path / 'delta.csv'
    p.write_text('energy,value\n0,1\n', encoding='utf-8')

    with pytest.raises(InvalidModelError, match='header'):
        read_table_csv(p, columns=('E', 'delta'))


def test_read_table_csv_rejects_non_numeric(tmp_path) -> None:
    p = tmp_path / 'delta.csv'
    p.write_text('E,delta\n0,abc\n', encoding='utf-8')

    with pytest.raises(InvalidModelError, match=':2:'):
        read_table_csv(p, columns=('E', 'delta'))
