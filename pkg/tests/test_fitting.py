from decimal import Decimal

import numpy as np
import pytest
from mpmath import mp, mpf
from pydantic import ValidationError

from conftest import synthetic_table
from lambertprime.errors import BracketError, DegenerateFitError, DomainError, TuningError
from lambertprime.estimators.base_w_pn import base_w_pn
from lambertprime.fitting import (SliceMetric, SliceTuneParams, evaluate_gaps, fit_diagnostics, fit_model,
                                  lls_fit, slice_tune, solve_correction_point, tune_slices)
from lambertprime.plouffe_model import CorrectionForm, LogCurve, load_model, write_model
from lambertprime.prime_oracle import PrimeRow, PrimeTable, TableSource, build_sample_table
from lambertprime.reference import PI_POWERS_OF_TEN, P_POWERS_OF_TEN


class TestCorrectionPoint:
    def test_difference_form(self):
        x = solve_correction_point(10**14, P_POWERS_OF_TEN[14], PI_POWERS_OF_TEN[14])
        assert mpf('0.9') < x < mpf('1.0')
        with mp.workdps(60):
            closed = (P_POWERS_OF_TEN[14] - PI_POWERS_OF_TEN[14]) / base_w_pn(10**14, 50)
            assert abs(x - closed) < mpf('1e-25')

    def test_small_n(self):
        x = solve_correction_point(10**6, P_POWERS_OF_TEN[6], PI_POWERS_OF_TEN[6])
        assert mpf('0.98') < x < mpf('1.0')

    def test_sum_form(self):
        x = solve_correction_point(10**14, P_POWERS_OF_TEN[14], PI_POWERS_OF_TEN[14], CorrectionForm.SUM)
        assert mpf('1.0') < x < mpf('1.0001')

    def test_outside_bracket(self):
        with pytest.raises(BracketError):
            solve_correction_point(10**6, 2 * P_POWERS_OF_TEN[6], PI_POWERS_OF_TEN[6])

    def test_domain(self):
        with pytest.raises(DomainError):
            solve_correction_point(7, 17, 4)
        with pytest.raises(DomainError):
            solve_correction_point(10**6, 100, 78498)
        with pytest.raises(DomainError):
            solve_correction_point(10**6, P_POWERS_OF_TEN[6], 0)


class TestLeastSquares:
    def test_exact_recovery(self):
        with mp.workdps(60):
            points = [(10**k, mpf('0.97') + mpf('1e-6') * mp.log(10**k)) for k in range(2, 13)]
        fit = lls_fit(points)
        with mp.workdps(60):
            assert abs(fit['a'] - mpf('0.97')) < mpf('1e-25')
            assert abs(fit['b'] - mpf('1e-6')) < mpf('1e-25')
            assert abs(fit['r2'] - 1) < mpf('1e-20')
        assert fit['point_count'] == 11

    def test_two_points(self):
        fit = lls_fit([(100, '0.99'), (1000, '0.995')])
        assert abs(fit['r2'] - 1) < mpf('1e-25')

    def test_noisy_points(self):
        rng = np.random.default_rng(0)
        ns = np.unique(np.logspace(2, 12, 1000).astype(np.int64))
        points = []
        for n, noise in zip(ns, rng.uniform(-1e-9, 1e-9, size=len(ns))):
            with mp.workdps(40):
                points.append((int(n), 1 - mpf('1e-7') * mp.log(int(n)) + mpf(float(noise))))
        fit = lls_fit(points)
        assert fit['r2'] > mpf('0.99')
        assert abs(fit['b'] + mpf('1e-7')) < mpf('1e-8')
        assert abs(fit['a'] - 1) < mpf('1e-8')

    def test_order_does_not_matter(self):
        points = [(n, f"0.99{n % 7}") for n in range(10, 200, 13)]
        assert lls_fit(points) == lls_fit(points[::-1])

    def test_degenerate(self):
        with pytest.raises(DegenerateFitError):
            lls_fit([(100, '0.99')])
        with pytest.raises(DegenerateFitError):
            lls_fit([(100, '0.99'), (100, '0.98')])
        with pytest.raises(DomainError):
            lls_fit([(1, '0.99'), (100, '0.98')])

    def test_diagnostics_agree(self):
        with mp.workdps(40):
            points = [(10**k, mpf('0.97') + mpf('1e-3') * mp.log(10**k)) for k in range(2, 8)]
        diagnostics = fit_diagnostics(points)
        assert diagnostics['a'] == pytest.approx(0.97, rel=1e-9)
        assert diagnostics['b'] == pytest.approx(1e-3, rel=1e-6)
        assert diagnostics['r2'] == pytest.approx(1.0)


class TestSliceTuning:
    def test_recovers_a_known_exponent(self):
        table = synthetic_table('0.99', '0', s='0.999', k=50)
        slices, reports = tune_slices(table, LogCurve(a='0.99', b='0'), '0.999', 10**5, 100)
        tuned = [report for report in reports if not report['flagged']]
        assert len(tuned) == 4
        assert all(report['k'] == 50 for report in tuned)
        assert all(report['mean_gap_after'] <= 0.5 for report in tuned)
        assert slices.flagged == tuple(range(1, 11))
        assert all(k == 0 for k in slices.exponents[:10])
        assert slices.range_max == 14 * 10**5 - 1

    def test_optimal_curve_keeps_zero(self):
        table = synthetic_table('0.99', '0')
        slices = slice_tune(table, LogCurve(a='0.99', b='0'), '0.999', 10**5, 100)
        assert set(slices.exponents) == {0}

    def test_tuned_never_worse(self, sieved_table):
        _, reports = tune_slices(sieved_table, LogCurve(a='0.98', b='0'), '0.999', 10**4, 50,
                                 metric=SliceMetric.MAX)
        for report in reports:
            if not report['flagged']:
                assert report['mean_gap_after'] <= report['mean_gap_before']

    def test_worse_slice_is_an_error(self, monkeypatch):
        monkeypatch.setattr('lambertprime.fitting._tune_slice', lambda task: (1, 1.0, 2.0))
        with pytest.raises(TuningError, match='slice 11'):
            tune_slices(synthetic_table('0.99', '0', count=10), LogCurve(a='0.99', b='0'), '0.999', 10**5, 10)

    def test_needs_columns(self):
        table = build_sample_table(100, 10, 5)
        with pytest.raises(DomainError):
            slice_tune(table, LogCurve(a='0.99', b='0'), '0.999', 100, 10)

    def test_params(self):
        with pytest.raises(ValidationError):
            SliceTuneParams(s='1')
        with pytest.raises(ValidationError):
            SliceTuneParams(s=0.999)
        with pytest.raises(ValidationError):
            SliceTuneParams(k_bound=0)

    def test_progress(self):
        seen = []
        tune_slices(synthetic_table('0.99', '0', count=10), LogCurve(a='0.99', b='0'), '0.999', 10**5, 10,
                    progress_callback=seen.append)
        assert seen and seen[-1]['percentage'] == 100.0


class TestGaps:
    def test_exact_callable(self, sieved_table):
        stats = evaluate_gaps(lambda row: row.p_n, sieved_table)
        assert stats['max_gap'] == 0 and stats['count'] == len(sieved_table)

    def test_base_w_overshoots_by_about_pi(self, sieved_table):
        stats = evaluate_gaps('base_w_pn', sieved_table)
        assert stats['min_gap'] <= stats['mean_gap'] <= stats['max_gap']
        last = sieved_table.rows[-1]
        assert stats['max_gap'] < 2 * last.pi_n

    def test_pi_estimators_read_pi(self):
        table = build_sample_table(10**4, 10**4, 5)
        stats = evaluate_gaps('gram_pi', table)
        assert stats['max_gap'] < 20

    def test_missing_truth(self):
        table = build_sample_table(10**4, 10**4, 5)
        with pytest.raises(DomainError):
            evaluate_gaps('base_w_pn', table)

    def test_missing_pi(self):
        table = PrimeTable(rows=(PrimeRow(10**6, None, P_POWERS_OF_TEN[6]),), source=TableSource.LOADED)
        with pytest.raises(DomainError):
            evaluate_gaps('plouffe_g', table)

    def test_domain_error_names_n(self):
        table = PrimeTable(rows=(PrimeRow(5, 3, 11), PrimeRow(10, 4, 29)), source=TableSource.LOADED)
        with pytest.raises(DomainError, match='n=5'):
            evaluate_gaps('base_w_pn', table)

    def test_workers_agree(self, sieved_table):
        assert evaluate_gaps('cipolla_pn', sieved_table, n_jobs=2) == evaluate_gaps('cipolla_pn', sieved_table)

    def test_gram_inverse_beats_base_w(self):
        rows = tuple(PrimeRow(10**k, PI_POWERS_OF_TEN[k], P_POWERS_OF_TEN[k]) for k in range(6, 10))
        table = PrimeTable(rows=rows, source=TableSource.LOADED)
        gram = evaluate_gaps('gram_inverse_pn', table)
        base = evaluate_gaps('base_w_pn', table)
        assert gram['mean_gap'] < base['mean_gap']


class TestFitModel:
    def test_recovers_curve(self):
        table = synthetic_table('0.98', '0.001')
        model, report = fit_model(table, name='synthetic', s='0.999', slice_width=10**5, k_bound=10)
        assert report['fit']['r2'] > mpf('1') - mpf('1e-6')
        assert abs(model.curve.a - Decimal('0.98')) < Decimal('1e-4')
        assert abs(model.curve.b - Decimal('0.001')) < Decimal('1e-5')
        assert set(model.slices.exponents) == {0}
        assert model.form is CorrectionForm.DIFFERENCE
        assert model.valid_range == (10**6, 14 * 10**5 - 1)
        assert report['gaps_tuned']['mean_gap'] <= report['gaps_curve']['mean_gap'] + mpf('1e-20')
        assert report['improvement'] > 1

    def test_model_file_round_trip(self, tmp_path):
        model, _ = fit_model(synthetic_table('0.98', '0.001', count=12), s='0.999', slice_width=10**5, k_bound=5)
        path = tmp_path / 'fitted.model'
        write_model(model, path)
        assert load_model(path) == model.model_copy(update={'slices': model.slices.model_copy(update={'flagged': ()})})

    def test_one_row_is_degenerate(self):
        table = PrimeTable(rows=(PrimeRow(10**6, PI_POWERS_OF_TEN[6], P_POWERS_OF_TEN[6]),),
                           source=TableSource.LOADED)
        with pytest.raises(DegenerateFitError):
            fit_model(table)

    def test_needs_both_columns(self):
        with pytest.raises(DomainError):
            fit_model(build_sample_table(10**4, 10**3, 5))

    @pytest.mark.slow
    def test_sieved_pipeline(self):
        table = build_sample_table(10**6, 10**5, 490, with_primes=True)
        model, report = fit_model(table, s='0.9999999999', slice_width=10**6, k_bound=1000, n_jobs=2)
        with mp.workdps(40):
            points = [solve_correction_point(row.n, row.p_n, row.pi_n) for row in table if row.n >= 10**4]
            assert all(mpf('0.9') < x < mpf('1.0') for x in points)
        assert report['fit']['r2'] > mpf('0.9')
        assert report['gaps_tuned']['mean_gap'] <= report['gaps_curve']['mean_gap']
        assert report['gaps_tuned']['mean_gap'] < report['gaps_base']['mean_gap']
        assert len(model.slices.exponents) == 50
