from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp, mpf
from pydantic import ValidationError

from lambertprime.errors import BudgetExhausted, DomainError, PrecisionError
from lambertprime.geoprime import (AnnealConfig, GeoConstant, GeoStatus, geo_search, geo_search_chains,
                                   geo_streak, is_prime, nearest_int, shortest_decimal)

STREAK_SEVEN = (3, 7, 17, 43, 109, 277, 709)


class TestPrimitives:
    def test_nearest_int(self):
        assert nearest_int('2.5') == 3
        assert nearest_int('-2.5') == -3
        assert nearest_int('709.4999') == 709
        assert nearest_int(Fraction(7, 2)) == 4
        assert nearest_int(Decimal('0.49')) == 0

    def test_nearest_int_mpf(self):
        with mp.workdps(30):
            assert nearest_int(mpf('41.3')) == 41
            with pytest.raises(PrecisionError):
                nearest_int(mpf(10) ** 40 + mpf('0.5'))

    def test_rejects_floats(self):
        with pytest.raises(TypeError):
            nearest_int(2.5)

    @pytest.mark.parametrize("m, expected", [
        (0, False), (1, False), (2, True), (3, True), (4, False), (41, True),
        (561, False), (999983, True), (3317044064679887385961981, False), (2**127 - 1, True),
    ])
    def test_is_prime(self, m, expected):
        assert is_prime(m) is expected

    def test_shortest_decimal(self):
        with mp.workdps(30):
            assert shortest_decimal(mpf('2.41'), mpf('2.59'), 10) == Decimal('2.5')
            assert shortest_decimal(mpf('2.55305'), mpf('2.55395'), 10) == Decimal('2.5531')
            with pytest.raises(PrecisionError):
                shortest_decimal(mpf('2.5123456789012'), mpf('2.5123456789012') + mpf('1e-20'), 5)


class TestStreak:
    def test_known_constant(self):
        result = geo_streak('2.553854696', 1, 20)
        assert result.streak_len == 7
        assert result.values == STREAK_SEVEN
        assert result.status is GeoStatus.VERIFIED
        assert result.c == Decimal('2.553854696')

    def test_small_constants(self):
        assert geo_streak('1.5', 1, 3).values == (2, 2, 3)
        assert geo_streak('1.5', 1, 10).streak_len == 4
        assert geo_streak('1.01', 1, 10).streak_len == 0

    def test_start_offset(self):
        result = geo_streak('2.553854696', 3, 20)
        assert result.values == STREAK_SEVEN[2:]

    def test_truncated_constant_is_certified_only_for_a_prefix(self):
        result = geo_streak('2027.1671684764912194343956', 1, 120)
        assert 6 <= result.certified_len <= 7
        assert result.streak_len >= result.certified_len

    def test_mpf_constant(self):
        with mp.workdps(40):
            assert geo_streak(mpf('2.553854696'), 1, 20).streak_len == 7

    def test_mpf_needs_digits(self):
        with mp.workdps(16):
            with pytest.raises(PrecisionError):
                geo_streak(mpf('2.553854696'), 1, 40, prec=16)

    def test_domain(self):
        with pytest.raises(DomainError):
            geo_streak('1', 1, 10)
        with pytest.raises(DomainError):
            geo_streak('0.5', 1, 10)
        with pytest.raises(DomainError):
            geo_streak('2', 5, 4)

    def test_value_object(self):
        with pytest.raises(ValidationError):
            GeoConstant(c=Decimal('2'), start_n=1, streak_len=2, values=(2,))
        with pytest.raises(ValidationError):
            GeoConstant(c=Decimal('3'), start_n=1, streak_len=0, interval=(Decimal('1'), Decimal('2')))


class TestSearch:
    def test_finds_seven_terms(self):
        result = geo_search('2', '3', 7, AnnealConfig(rng_seed=42))
        assert result.streak_len == 7
        lo, hi = result.interval
        assert lo <= result.c <= hi
        assert lo <= Decimal('2.553854696') <= hi
        assert geo_streak(result.c, 1, 7).streak_len == 7

    def test_interval_is_sound(self):
        result = geo_search('2', '3', 7, AnnealConfig(rng_seed=42))
        lo, hi = result.interval
        rng = np.random.default_rng(1)
        for u in rng.uniform(0.1, 0.9, size=5):
            inner = lo + (hi - lo) * Decimal(str(round(u, 6)))
            assert geo_streak(inner, 1, 7).values == result.values

    def test_deterministic(self):
        cfg = AnnealConfig(rng_seed=3)
        assert geo_search('2', '3', 5, cfg) == geo_search('2', '3', 5, cfg)

    def test_single_term(self):
        result = geo_search('2', '3', 1)
        assert result.streak_len == 1
        assert is_prime(nearest_int(result.c))

    def test_exhausted(self):
        with pytest.raises(BudgetExhausted) as info:
            geo_search('2', '3', 40, AnnealConfig(steps_per_digit=1))
        best = info.value.best
        assert best is None or best.streak_len < 40

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            geo_search('3', '2', 5)
        with pytest.raises(DomainError):
            geo_search('1', '2', 5)

    def test_schedule_validation(self):
        with pytest.raises(ValidationError):
            AnnealConfig(cooling_rate=1.0)
        with pytest.raises(ValidationError):
            AnnealConfig(initial_temperature=0)

    def test_chains(self):
        result = geo_search_chains('2', '3', 6, AnnealConfig(rng_seed=5), chains=3, n_jobs=2)
        assert result.streak_len == 6

    @pytest.mark.slow
    def test_long_streak(self):
        result = geo_search('500', '600', 20, AnnealConfig(rng_seed=11))
        assert result.streak_len == 20
        assert geo_streak(result.c, 1, 20).streak_len == 20
