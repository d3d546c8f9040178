import math

import pytest

from lambertprime.base import import_estimator, parallel_map, resolve_jobs
from lambertprime.scan_estimators import scan_all_estimators


def test_scan_lists_every_estimator():
    estimators = scan_all_estimators()
    names = [e['name'] for e in estimators]
    assert len(names) == 9
    assert names[0] == 'dusart_pi'
    by_name = {e['name']: e for e in estimators}
    assert by_name['plouffe_g']['needs_pi'] is True
    assert by_name['gram_pi']['truth'] == 'pi_n'
    assert by_name['base_w_pn']['label'] == 'Base W Pn'
    assert 'include_unit' in by_name['gram_inverse_pn']['params_schema']['properties']


def test_import_by_id_or_dotted_name():
    assert import_estimator('cipolla_pn') is import_estimator('estimators.cipolla_pn')


def test_import_unknown():
    with pytest.raises(ValueError):
        import_estimator('estimators.nope')


def test_resolve_jobs():
    assert resolve_jobs(None) == 1
    assert resolve_jobs(0) == 1
    assert resolve_jobs(3) == 3
    assert resolve_jobs(-1) >= 1


def test_parallel_map_keeps_order():
    items = list(range(30))
    assert parallel_map(math.factorial, items, n_jobs=2) == [math.factorial(i) for i in items]


def test_parallel_map_reports_progress():
    seen = []
    parallel_map(abs, [-1, -2, -3], on_result=seen.append)
    assert seen == [1, 2, 3]
