import pytest
from mpmath import mp, mpf
from pydantic import ValidationError

from lambertprime.config import SHIPPED_MODELS
from lambertprime.errors import DomainError, ModelRangeError, TableParseError
from lambertprime.estimators.base_w_pn import base_w_pn
from lambertprime.plouffe_model import (CorrectionForm, CorrectionModel, LogCurve, SliceCorrection,
                                        corrected_pn, derive_slice_width, exponent_checksum, f_poly_pn,
                                        format_model, g_small_pn, invert_pi, load_model, parse_model,
                                        shipped_model, write_model)
from lambertprime.reference import F_TABLE, PI_POWERS_OF_TEN, P_POWERS_OF_TEN, VALUE_TABLE_ROWS


def small_model(exponents=(0, 1, -1), form='difference') -> CorrectionModel:
    return CorrectionModel(
        name='small',
        curve=LogCurve(a='0.99', b='0.0001', n_range=(8, 2999)),
        slices=SliceCorrection(s='0.999', exponents=exponents, range_max=2999, slice_width=1000),
        valid_range=(8, 2999),
        form=form,
    )


class TestGEstimator:
    def test_value_at_1e14(self):
        value = corrected_pn(10**14, PI_POWERS_OF_TEN[14])
        with mp.workdps(40):
            assert abs(value - 3475385752465280) <= 2

    @pytest.mark.parametrize("row", VALUE_TABLE_ROWS, ids=lambda row: f"row{row.row}")
    def test_value_table(self, row):
        value = corrected_pn(row.n, row.pi_n)
        with mp.workdps(40):
            assert abs(value - row.g_value) <= 2

    def test_worked_example(self):
        value = corrected_pn(1327460000000000, 39285023244530)
        with mp.workdps(40):
            expected = mpf('49668015014179465.522289485977202')
            assert abs(value - expected) < mpf('1e-11') * expected

    def test_unit_curve_is_the_bare_w_term(self):
        model = CorrectionModel(name='unit', curve=LogCurve(a='1', b='0'), valid_range=(8, 10**30))
        with mp.workdps(40):
            assert abs(corrected_pn(10**12, PI_POWERS_OF_TEN[12], model, 32)
                       - (base_w_pn(10**12, 32) - PI_POWERS_OF_TEN[12])) < mpf('1e-10')

    def test_range_and_domain(self):
        with pytest.raises(ModelRangeError):
            corrected_pn(10**17, PI_POWERS_OF_TEN[17])
        with pytest.raises(DomainError):
            corrected_pn(10**14, None)
        with pytest.raises(DomainError):
            corrected_pn(10**14, 0)

    def test_correction_stays_near_one(self):
        model = shipped_model('g_large')
        slices = model.slices
        with mp.workdps(50):
            for index in range(0, len(slices.exponents), 7):
                n = max(index * slices.slice_width + slices.slice_width // 2, 8)
                if n > slices.range_max:
                    break
                assert mpf('0.99') < model.factor(n, 40) < mpf('1.01'), n


class TestFEstimator:
    @pytest.mark.parametrize("entry", F_TABLE, ids=lambda entry: f"1e{entry.exponent}")
    def test_matches_published_column(self, entry):
        value = f_poly_pn(10**entry.exponent, PI_POWERS_OF_TEN[entry.exponent])
        with mp.workdps(60):
            assert abs(value - mpf(entry.f_value)) <= mpf('0.01')

    def test_rounds_to_the_prime(self):
        for entry in F_TABLE:
            value = f_poly_pn(10**entry.exponent, PI_POWERS_OF_TEN[entry.exponent])
            with mp.workdps(60):
                assert abs(value - P_POWERS_OF_TEN[entry.exponent]) < mpf('0.5')

    def test_range(self):
        with pytest.raises(ModelRangeError):
            f_poly_pn(10**15, PI_POWERS_OF_TEN[15])
        with pytest.raises(ModelRangeError):
            f_poly_pn(10**25, 1)
        with pytest.raises(DomainError):
            f_poly_pn(10**16, 0)


class TestSmallG:
    def test_values(self):
        assert abs(g_small_pn(10**6) - P_POWERS_OF_TEN[6]) < 1000
        assert abs(g_small_pn(500000) - 7368787) < 250

    def test_range(self):
        with pytest.raises(DomainError):
            g_small_pn(7)
        with pytest.raises(ModelRangeError):
            g_small_pn(1010000)


class TestInvertPi:
    def test_values(self):
        assert abs(invert_pi(10**6) - PI_POWERS_OF_TEN[6]) < 100
        assert abs(invert_pi(10**9) - PI_POWERS_OF_TEN[9]) < 2000

    def test_range(self):
        with pytest.raises(ModelRangeError):
            invert_pi(99)
        with pytest.raises(ModelRangeError):
            invert_pi(shipped_model('f_inversion').valid_range[1] + 1)

    def test_round_trip_with_g(self):
        p = corrected_pn(10**8, PI_POWERS_OF_TEN[8])
        assert abs(invert_pi(int(p)) - 10**8) < mpf('1e-4') * 10**8

    def test_round_trip_with_small_g(self):
        assert abs(invert_pi(g_small_pn(10**6)) - 10**6) < mpf('2.5e-4') * 10**6


class TestShippedModels:
    @pytest.mark.parametrize("name", SHIPPED_MODELS)
    def test_slice_lookup_is_total(self, name):
        slices = shipped_model(name).slices
        w = slices.slice_width
        for n in (1, w - 1, w, w + 1, 2 * w, slices.range_max):
            assert 1 <= slices.slice_index(n) <= len(slices.exponents)
        with pytest.raises(ModelRangeError):
            slices.slice_index(slices.range_max + 1)
        with pytest.raises(ModelRangeError):
            slices.slice_index(0)

    def test_forms(self):
        assert shipped_model('g_large').form is CorrectionForm.SUM
        assert shipped_model('g_small').form is CorrectionForm.W0
        assert shipped_model('f_inversion').form is CorrectionForm.W0
        assert len(shipped_model('g_small').slices.exponents) == 101

    def test_unknown(self):
        with pytest.raises(ValueError):
            shipped_model('g_huge')


class TestModelFormat:
    def test_round_trip(self, tmp_path):
        model = small_model()
        path = tmp_path / 'small.model'
        write_model(model, path)
        loaded = load_model(path)
        assert loaded == model

    def test_shipped_round_trip(self):
        model = shipped_model('g_small')
        assert parse_model(format_model(model)) == model

    def test_flagged_slices_are_noted(self):
        model = small_model()
        flagged = model.model_copy(update={'slices': model.slices.model_copy(update={'flagged': (2,)})})
        assert format_model(flagged).startswith('# empty slices: 2\n')

    def test_checksum_mismatch(self):
        text = format_model(small_model()).replace('\n0 1 -1', '\n0 1 -2')
        with pytest.raises(TableParseError, match='sha256') as info:
            parse_model(text)
        assert info.value.line == 1

    def test_bad_exponent_line(self):
        text = "# a comment\nmodel m s=0.999 slice_width=1000 range_max=2999 a=0.99 b=0\n0 1\nx 2\n"
        with pytest.raises(TableParseError) as info:
            parse_model(text, source='m.model')
        assert info.value.line == 4
        assert 'm.model' in str(info.value)

    def test_missing_header_key(self):
        with pytest.raises(TableParseError, match='range_max'):
            parse_model("model m s=0.999 a=0.99 b=0\n0 1 2\n")

    def test_short_table(self):
        # range_max reaches slice 4 but only 3 exponents are given
        with pytest.raises(TableParseError):
            parse_model("model m s=0.999 slice_width=1000 range_max=3000 a=0.99 b=0\n0 1 2\n")

    def test_derived_slice_width(self):
        assert derive_slice_width(1009999, 101) == 10000
        assert derive_slice_width(13349999999999999, 1335) == 10**13
        model = parse_model("model m s=0.999 range_max=2999 a=0.99 b=0\n0 1 2\n")
        assert model.slices.slice_width == 1000

    def test_checksum_is_stable(self):
        assert exponent_checksum((0, 1, -1)) == exponent_checksum([0, 1, -1])
        assert exponent_checksum((0, 1, -1)) != exponent_checksum((0, -1, 1))


class TestValueObjects:
    def test_curve_must_stay_near_one(self):
        with pytest.raises(ValidationError):
            LogCurve(a='2', b='0', n_range=(8, 100))

    def test_curve_rejects_floats(self):
        with pytest.raises(ValidationError):
            LogCurve(a=0.99, b='0')

    def test_slice_base(self):
        with pytest.raises(ValidationError):
            SliceCorrection(s='1.5', exponents=(0,), range_max=10, slice_width=100)

    def test_valid_range_inside_slices(self):
        with pytest.raises(ValidationError):
            CorrectionModel(name='m', curve=LogCurve(a='1', b='0'),
                            slices=SliceCorrection(s='0.999', exponents=(0, 0), range_max=1999, slice_width=1000),
                            valid_range=(8, 5000))

    def test_difference_form(self):
        model = small_model(exponents=(0, 0, 0))
        with mp.workdps(50):
            expected = base_w_pn(2000, 40) * (mpf('0.99') + mpf('0.0001') * mp.log(2000)) + 303
            assert abs(corrected_pn(2000, 303, model, 40) - expected) < mpf('1e-30')
