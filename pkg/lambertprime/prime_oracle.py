"""
Ground truth at desk scale.

An odd-only segmented sieve of Eratosthenes gives pi(n) and the n-th prime up
to SIEVE_CAPACITY; published prime tables can be loaded instead. Table files
hold lines of 2 or 3 whitespace-separated integers, ``k p_k`` or
``n pi_n p_n`` with ``-`` for an absent field. ``#`` starts a comment and
blank lines are ignored.
"""
import math
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Any, Iterable, Iterator, NamedTuple, Optional

import numpy as np
import pandas as pd

from .config import SEGMENT_ODD_COUNT, SIEVE_CAPACITY
from .errors import DomainError, ResourceError, TableInvariantError, TableParseError
from .structured_output import get_logger

logger = get_logger(__name__)


class TableSource(StrEnum):
    SIEVED = "sieved"
    LOADED = "loaded"


class PrimeRow(NamedTuple):
    n: int
    pi_n: Optional[int]
    p_n: Optional[int]


@dataclass(frozen=True, slots=True)
class PrimeTable:
    """
    Immutable rows (n, pi(n), p(n)) ordered by n.

    Invariants: n strictly increasing, pi(n) non-decreasing, p(n) strictly
    increasing where present, pi(n) <= n and p(n) > n.
    """

    rows: tuple[PrimeRow, ...]
    source: TableSource
    params: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        validate_rows(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[PrimeRow]:
        return iter(self.rows)

    def has_column(self, column: str) -> bool:
        return all(getattr(row, column) is not None for row in self.rows)

    def pi_of(self, n: int) -> int:
        """pi(n) for a row of this table."""
        for row in self.rows:
            if row.n == n and row.pi_n is not None:
                return row.pi_n
        raise DomainError(f"table has no pi(n) for n={n}")

    def to_frame(self) -> pd.DataFrame:
        # values beyond int64 stay Python ints
        return pd.DataFrame(
            {
                'n': [row.n for row in self.rows],
                'pi_n': [row.pi_n for row in self.rows],
                'p_n': [row.p_n for row in self.rows],
            },
            dtype=object,
        )


def validate_rows(rows: Iterable[PrimeRow]) -> None:
    """
    Raises:
        TableInvariantError: On the first row breaking a table invariant
    """
    previous: Optional[PrimeRow] = None
    last_pi: Optional[int] = None
    last_p: Optional[int] = None
    for index, row in enumerate(rows, start=1):
        if row.n < 1:
            raise TableInvariantError(f"row {index}: n must be positive, got {row.n}")
        if previous is not None and row.n <= previous.n:
            raise TableInvariantError(f"row {index}: n={row.n} does not increase after n={previous.n}")
        if row.pi_n is not None:
            if row.pi_n < 0 or row.pi_n > row.n:
                raise TableInvariantError(f"row {index}: pi(n)={row.pi_n} is inconsistent with n={row.n}")
            if last_pi is not None and row.pi_n < last_pi:
                raise TableInvariantError(f"row {index}: pi(n)={row.pi_n} decreases after {last_pi}")
            last_pi = row.pi_n
        if row.p_n is not None:
            if row.p_n <= row.n:
                raise TableInvariantError(f"row {index}: p(n)={row.p_n} must exceed n={row.n}")
            if last_p is not None and row.p_n <= last_p:
                raise TableInvariantError(f"row {index}: p(n)={row.p_n} does not increase after {last_p}")
            last_p = row.p_n
        previous = row


# ---------------------------------------------------------------------------
# Sieve
# ---------------------------------------------------------------------------

def naive_sieve(limit: int) -> np.ndarray:
    """All primes <= limit by a plain sieve of Eratosthenes."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p:limit + 1:p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _check_capacity(limit: int, capacity: int) -> None:
    if limit > capacity:
        raise ResourceError(f"sieving to {limit} exceeds the capacity {capacity}")


def iter_prime_segments(limit: int, segment_odd_count: int = SEGMENT_ODD_COUNT,
                        capacity: int = SIEVE_CAPACITY) -> Iterator[tuple[int, int, np.ndarray]]:
    """
    Stream the primes <= limit segment by segment.

    Yields:
        (low, high, primes): the sorted primes in [low, high)
    """
    _check_capacity(limit, capacity)
    if limit < 2:
        return
    yield 2, 3, np.array([2], dtype=np.int64)

    base = naive_sieve(math.isqrt(limit) + 1)
    odd_base = base[1:]
    span = 2 * segment_odd_count
    low = 3
    while low <= limit:
        high = min(low + span, limit + 1)  # exclusive
        odd_count = (high - low + 1) // 2
        mask = np.ones(odd_count, dtype=bool)
        for p in odd_base:
            p = int(p)
            p2 = p * p
            if p2 >= high:
                break
            start = max(p2, ((low + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start >= high:
                continue
            mask[(start - low) // 2::p] = False
        yield low, high, low + 2 * np.flatnonzero(mask).astype(np.int64)
        low = high if high % 2 == 1 else high + 1


def sieve_pi(n: int, capacity: int = SIEVE_CAPACITY) -> int:
    """
    Exact pi(n) by segmented sieve.

    Raises:
        DomainError: For n < 2
        ResourceError: Above the sieve capacity
    """
    if n < 2:
        raise DomainError(f"sieve_pi requires n >= 2, got {n}")
    return sum(len(primes) for _, _, primes in iter_prime_segments(n, capacity=capacity))


def nth_prime_bound(k: int) -> int:
    """Upper bound for p(k): k (ln k + ln ln k) for k >= 6."""
    if k < 6:
        return 13
    return int(k * (math.log(k) + math.log(math.log(k)))) + 1


def nth_prime(k: int, capacity: int = SIEVE_CAPACITY) -> int:
    """
    Exact k-th prime.

    Raises:
        DomainError: For k < 1
        ResourceError: When p(k) may exceed the sieve capacity
    """
    if k < 1:
        raise DomainError(f"nth_prime requires k >= 1, got {k}")
    seen = 0
    for _, _, primes in iter_prime_segments(nth_prime_bound(k), capacity=capacity):
        if seen + len(primes) >= k:
            return int(primes[k - seen - 1])
        seen += len(primes)
    raise ResourceError(f"p({k}) not found below {nth_prime_bound(k)}")


def build_sample_table(start: int, step: int, count: int, with_primes: bool = False,
                       capacity: int = SIEVE_CAPACITY) -> PrimeTable:
    """
    Rows at n = start + i*step with exact pi(n), and p(n) when ``with_primes``.

    A single streaming pass over the sieve fills every row.

    Raises:
        DomainError: For start < 2, step < 1 or count < 1
        ResourceError: When the sieve would exceed its capacity
    """
    if start < 2 or step < 1 or count < 1:
        raise DomainError(f"build_sample_table needs start >= 2, step >= 1, count >= 1; got {start}, {step}, {count}")
    targets = [start + i * step for i in range(count)]
    limit = targets[-1]
    if with_primes:
        limit = max(limit, nth_prime_bound(targets[-1]))
    _check_capacity(limit, capacity)
    logger.info("Building sample table", start=start, step=step, count=count, limit=limit)

    pis: list[int] = []
    primes_at: list[int] = []
    seen = 0
    pi_cursor = 0
    p_cursor = 0
    for low, high, primes in iter_prime_segments(limit, capacity=capacity):
        while pi_cursor < count and targets[pi_cursor] < high:
            pis.append(seen + int(np.searchsorted(primes, targets[pi_cursor], side='right')))
            pi_cursor += 1
        if with_primes:
            while p_cursor < count and targets[p_cursor] <= seen + len(primes):
                primes_at.append(int(primes[targets[p_cursor] - seen - 1]))
                p_cursor += 1
        seen += len(primes)
        if pi_cursor == count and (not with_primes or p_cursor == count):
            break

    rows = tuple(
        PrimeRow(n, pis[i], primes_at[i] if with_primes else None)
        for i, n in enumerate(targets)
    )
    params = (('start', str(start)), ('step', str(step)), ('count', str(count)),
              ('with_primes', str(with_primes).lower()))
    return PrimeTable(rows=rows, source=TableSource.SIEVED, params=params)


# ---------------------------------------------------------------------------
# Table files
# ---------------------------------------------------------------------------

def _field(token: str, lineno: int, source: str) -> Optional[int]:
    if token == '-':
        return None
    try:
        value = int(token)
    except ValueError:
        raise TableParseError(lineno, f"'{token}' is not an integer", source) from None
    if value < 0:
        raise TableParseError(lineno, f"negative value {value}", source)
    return value


def parse_table(lines: Iterable[str], source: str = '<input>') -> PrimeTable:
    """
    Parse table lines.

    Raises:
        TableParseError: On the first malformed line, with its number
        TableInvariantError: If the rows break an ordering invariant
    """
    rows: list[PrimeRow] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) == 2:
            n, p_n = (_field(t, lineno, source) for t in tokens)
            pi_n = None
        elif len(tokens) == 3:
            n, pi_n, p_n = (_field(t, lineno, source) for t in tokens)
        else:
            raise TableParseError(lineno, f"expected 2 or 3 integers, got {len(tokens)} fields", source)
        if n is None:
            raise TableParseError(lineno, "the first column is required", source)
        rows.append(PrimeRow(n, pi_n, p_n))
    table = PrimeTable(rows=tuple(rows), source=TableSource.LOADED)
    logger.debug("Parsed table", source=source, rows=len(rows))
    return table


def load_table(path: str | Path) -> PrimeTable:
    """Load a prime table file; see the module docstring for the grammar."""
    path = Path(path)
    with path.open(encoding='ascii') as handle:
        return parse_table(handle, source=str(path))


def format_table(table: PrimeTable, extra: Optional[dict[str, Any]] = None) -> str:
    params = dict(table.params)
    if extra:
        params.update({k: str(v) for k, v in extra.items()})
    header = f"# lambertprime table source={table.source}"
    if params:
        header += ' ' + ' '.join(f"{k}={v}" for k, v in params.items())
    lines = [header, "# n pi_n p_n"]

    def cell(value: Optional[int]) -> str:
        return '-' if value is None else str(value)

    lines.extend(f"{row.n} {cell(row.pi_n)} {cell(row.p_n)}" for row in table.rows)
    return '\n'.join(lines) + '\n'


def write_table(table: PrimeTable, path: str | Path, extra: Optional[dict[str, Any]] = None) -> None:
    """Write the 3-column form with a '#' header naming source and parameters."""
    Path(path).write_text(format_table(table, extra), encoding='ascii')
