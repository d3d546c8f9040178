import pytest
from mpmath import mp, mpf

from lambertprime.estimators.base_w_pn import base_w_pn
from lambertprime.precision_core import round_half_away
from lambertprime.prime_oracle import PrimeRow, PrimeTable, TableSource, build_sample_table


@pytest.fixture(scope="session")
def sieved_table() -> PrimeTable:
    """Exact pi(n) and p(n) at n = 10^4, 1.1 * 10^4, ..., 9.9 * 10^4."""
    return build_sample_table(10**4, 10**3, 90, with_primes=True)


def synthetic_table(a: str, b: str, s: str = '1', k: int = 0, count: int = 40,
                    start: int = 10**6, step: int = 10**4) -> PrimeTable:
    """
    Rows whose p(n) is B(n) (a + b ln n) s^k + pi(n), rounded, with pi(n) = n // 20.

    That is the difference form with a known curve and exponent.
    """
    rows = []
    with mp.workdps(50):
        for i in range(count):
            n = start + i * step
            pi_n = n // 20
            factor = (mpf(a) + mpf(b) * mp.log(n)) * mpf(s) ** k
            rows.append(PrimeRow(n, pi_n, round_half_away(base_w_pn(n, 50) * factor + pi_n)))
    return PrimeTable(rows=tuple(rows), source=TableSource.LOADED)


@pytest.fixture
def table_file(tmp_path):
    """Write table text to a temporary file and return its path."""
    def write(text: str, name: str = "table.txt"):
        path = tmp_path / name
        path.write_text(text, encoding="ascii")
        return path
    return write
