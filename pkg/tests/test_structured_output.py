import json
import logging

import pandas as pd
import pytest
from mpmath import mpf

from lambertprime.structured_output import emit_log, emit_result, emit_rows, get_logger, set_log_level


@pytest.fixture(autouse=True)
def info_level():
    set_log_level('INFO')
    yield
    set_log_level('INFO')


def test_log_records_are_json_on_stderr(capsys):
    get_logger('lambertprime.test').info("Sieving", limit=10**6, value=mpf('0.5'))
    captured = capsys.readouterr()
    assert captured.out == ''
    record = json.loads(captured.err)
    assert record['type'] == 'log'
    assert record['data']['severity_text'] == 'INFO'
    assert record['data']['resource']['service.name'] == 'lambertprime'
    assert record['data']['attributes']['limit'] == 10**6
    assert record['data']['attributes']['value'] == '0.5'


def test_level_filter(capsys):
    set_log_level('WARNING')
    emit_log("hidden", logging.INFO)
    emit_log("shown", logging.WARNING)
    lines = capsys.readouterr().err.splitlines()
    assert [json.loads(line)['data']['body'] for line in lines] == ['shown']


def test_unknown_level():
    with pytest.raises(ValueError):
        set_log_level('LOUD')


def test_error_carries_traceback(capsys):
    try:
        raise ArithmeticError("boom")
    except ArithmeticError:
        get_logger('lambertprime.test').error("failed", exc_info=True)
    record = json.loads(capsys.readouterr().err)
    assert 'ArithmeticError: boom' in record['data']['attributes']['exception.traceback']


@pytest.mark.parametrize("fmt, expected", [
    ('tsv', "n\tvalue\n10\t2.5\n"),
    ('csv', "n,value\n10,2.5\n"),
    ('json-lines', '{"n": "10", "value": "2.5"}\n'),
])
def test_emit_rows(fmt, expected, capsys):
    emit_rows(pd.DataFrame([{'n': '10', 'value': '2.5'}]), fmt)
    assert capsys.readouterr().out == expected


def test_emit_rows_unknown_format():
    with pytest.raises(ValueError):
        emit_rows(pd.DataFrame([{'n': 1}]), 'xml')


def test_emit_result(capsys):
    emit_result('fit', {'a': mpf('0.25'), 'points': 3})
    assert json.loads(capsys.readouterr().out) == {'type': 'fit', 'data': {'a': '0.25', 'points': 3}}
