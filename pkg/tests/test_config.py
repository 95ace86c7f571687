from __future__ import annotations

from pathlib import Path

import pytest

from greencut.config import RunConfig, parse_values, resolve_out_dir, resolve_threads
from greencut.errors import ConfigError
from greencut.models import ModelKind


def test_defaults_are_valid() -> None:
    cfg = RunConfig()

    assert cfg.band_model().kind is ModelKind.FLAT_BAND
    assert cfg.quadrature().oscillation_splitting == 4


def test_file_values_are_typed(tmp_path: Path) -> None:
    path = tmp_path / 'run.cfg'
    path.write_text('# comment\nmodel = semicircle\ndelta0 = 0.3\nmethods = cut,oracle\nwindow=200,800\naudit=yes\n', encoding='utf-8')

    cfg = RunConfig.from_file(path)

    assert cfg.model == 'semicircle'
    assert cfg.delta0 == 0.3
    assert cfg.methods == ('cut', 'oracle')
    assert cfg.window == (200.0, 800.0)
    assert cfg.audit is True


def test_serialization_is_a_fixed_point(tmp_path: Path) -> None:
    cfg = RunConfig(model='power', delta0=0.2, beta_bottom=1.0, beta_top=2.0, window=(40.0, 200.0), tmax_abs=300.0)
    path = tmp_path / 'round.cfg'
    path.write_text(cfg.to_text(), encoding='utf-8')

    again = RunConfig.from_file(path)

    assert again == cfg
    assert again.to_text() == cfg.to_text()


def test_overrides_skip_none() -> None:
    cfg = RunConfig().updated({'delta0': 0.5, 'eps': None})

    assert cfg.delta0 == 0.5
    assert cfg.eps == RunConfig().eps


@pytest.mark.parametrize(
    'values',
    [
        {'model': 'lorentzian'},
        {'method': 'magic'},
        {'delta0': '-1'},
        {'points': '1'},
        {'oracle_n': '8'},
        {'window': '1,2,3'},
        {'format': 'xml'},
        {'oscillation_splitting': '2'},
    ],
)
def test_invalid_values_raise(values) -> None:
    with pytest.raises(ConfigError):
        RunConfig.from_mapping(values).quadrature()


def test_unknown_and_malformed_keys() -> None:
    with pytest.raises(ConfigError):
        parse_values({'colour': 'blue'})
    with pytest.raises(ConfigError):
        parse_values({'points': 'many'})
    with pytest.raises(ConfigError):
        RunConfig().updated({'colour': 'blue'})


def test_resolve_threads() -> None:
    assert resolve_threads({}) == 1
    assert resolve_threads({'GREENCUT_THREADS': '4'}) == 4
    for bad in ('0', '-2', 'two'):
        with pytest.raises(ConfigError):
            resolve_threads({'GREENCUT_THREADS': bad})


def test_resolve_out_dir(tmp_path: Path) -> None:
    assert resolve_out_dir(None, {'GREENCUT_OUT_DIR': str(tmp_path)}) == tmp_path.resolve()
    assert resolve_out_dir(str(tmp_path / 'cli'), {'GREENCUT_OUT_DIR': str(tmp_path)}) == (tmp_path / 'cli').resolve()
    assert resolve_out_dir(None, {}) == Path.cwd().resolve()
