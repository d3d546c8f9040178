"""
Constants c whose nearest-integer powers {c^n} are prime for a run of n.

Verification works on exact rationals (gmpy2.mpq) whenever c is given as a
decimal string, Decimal, Fraction or int, so a printed constant is tested for
exactly the digits it has. mpf input is accepted under a precision guard.

The search narrows an interval of constants that share a prime prefix: the
set of c with {c^n} = q is [(q - 1/2)^(1/n), (q + 1/2)^(1/n)), so every prime
q reachable from the current interval opens a sub-interval for the next term.
Dead ends backtrack; when the search stagnates an annealing step proposes a
jump back by d levels, accepted with probability exp(-d / T).
"""
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import StrEnum
from fractions import Fraction
from typing import Callable, Optional

import gmpy2
import mpmath
import numpy as np
from mpmath import mp, mpf
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .base import parallel_map
from .config import GUARD_DIGITS, MR_DETERMINISTIC_BOUND, MR_WITNESSES
from .errors import BudgetExhausted, DomainError, PrecisionError, ResourceError
from .estimators.base import ProgressInfo
from .precision_core import Number, round_half_away
from .structured_output import get_logger

logger = get_logger(__name__)

# widest integer range scanned for prime candidates at one level
MAX_CANDIDATE_SPAN = 10**6


class GeoStatus(StrEnum):
    VERIFIED = "verified"
    PROBABLE = "probable"


class GeoConstant(BaseModel):
    """A constant c and the run of primes {c^n} for n = start_n, start_n + 1, ..."""

    model_config = ConfigDict(frozen=True)

    c: Decimal
    start_n: int = Field(ge=1)
    streak_len: int = Field(ge=0)
    values: tuple[int, ...] = ()
    interval: Optional[tuple[Decimal, Decimal]] = None
    # leading terms that hold over the whole uncertainty interval of a printed decimal
    certified_len: Optional[int] = None
    status: GeoStatus = GeoStatus.VERIFIED

    @model_validator(mode='after')
    def check_streak(self) -> 'GeoConstant':
        if len(self.values) != self.streak_len:
            raise ValueError(f"{len(self.values)} values recorded for a streak of {self.streak_len}")
        if self.interval is not None:
            lo, hi = self.interval
            if not lo <= self.c <= hi:
                raise ValueError(f"c={self.c} lies outside its interval [{lo}, {hi}]")
        return self

    def summary_line(self) -> str:
        return f"c={self.c} start_n={self.start_n} streak={self.streak_len} status={self.status}"


class AnnealConfig(BaseModel):
    """Search schedule for geo_search."""

    initial_temperature: float = Field(default=2.0, gt=0)
    cooling_rate: float = Field(default=0.95, gt=0, lt=1)
    steps_per_digit: int = Field(default=2000, ge=1)
    rng_seed: int = 0
    # working digits; derived from the target when unset
    max_digits: Optional[int] = Field(default=None, ge=1)


# ---------------------------------------------------------------------------
# Exact arithmetic
# ---------------------------------------------------------------------------

def _rational(x: Number) -> tuple[gmpy2.mpq, Optional[int]]:
    """Exact value of x and, for decimal input, its number of decimals."""
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"{type(x).__name__} is not accepted; pass a decimal string")
    if isinstance(x, int):
        return gmpy2.mpq(x), 0
    if isinstance(x, Fraction):
        return gmpy2.mpq(x.numerator, x.denominator), None
    if isinstance(x, gmpy2.mpq):
        return x, None
    if isinstance(x, mpf):
        man, exp = (int(v) for v in x.man_exp)
        return (gmpy2.mpq(man * 2**exp) if exp >= 0 else gmpy2.mpq(man, 2**-exp)), None
    if isinstance(x, str):
        try:
            x = Decimal(x.strip())
        except InvalidOperation:
            raise DomainError(f"'{x}' is not a decimal number") from None
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise DomainError(f"'{x}' is not a finite decimal number")
        numerator, denominator = x.as_integer_ratio()
        return gmpy2.mpq(numerator, denominator), max(0, -x.as_tuple().exponent)
    raise TypeError(f"Cannot read {type(x).__name__} as an exact constant")


def _round_rational(q: gmpy2.mpq) -> int:
    # floor(q + 1/2), mirrored for negatives
    if q < 0:
        return -_round_rational(-q)
    return int((2 * q.numerator + q.denominator) // (2 * q.denominator))


def nearest_int(x: Number) -> int:
    """
    Nearest integer, halves rounded away from zero.

    Exact for int, decimal strings, Decimal and Fraction. For mpf the
    fractional part must be resolvable at the current precision.

    Raises:
        PrecisionError: If an mpf lies within one ulp of a half-integer
    """
    if isinstance(x, mpf):
        ulp = mpf(2) ** (mpmath.mag(x) - mp.prec)
        if ulp >= mpf(1) / 4 or abs(x - mpmath.floor(x) - mpf(1) / 2) <= ulp:
            raise PrecisionError(f"nearest integer of {mpmath.nstr(x, 15)} is not decided at {mp.dps} digits")
        return round_half_away(x)
    return _round_rational(_rational(x)[0])


def is_prime(m: int) -> bool:
    """
    Primality of m >= 0.

    Deterministic below 3317044064679887385961981 (strong pseudoprime tests
    to the first 13 prime bases); a BPSW probable-prime test above it.
    """
    if m < 2:
        return False
    for a in MR_WITNESSES:
        if m % a == 0:
            return m == a
    if m < MR_DETERMINISTIC_BOUND:
        return all(gmpy2.is_strong_prp(m, a) for a in MR_WITNESSES)
    return bool(gmpy2.is_bpsw_prp(m))


def _status(values) -> GeoStatus:
    if any(v >= MR_DETERMINISTIC_BOUND for v in values):
        return GeoStatus.PROBABLE
    return GeoStatus.VERIFIED


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def _certified_len(q: gmpy2.mpq, decimals: int, start_n: int, max_n: int) -> int:
    """Terms whose nearest integer is the same for a truncated or rounded reading."""
    ulp = gmpy2.mpq(1, 10**decimals)
    lo, hi = q - ulp / 2, q + ulp
    lo_power, hi_power = lo ** start_n, hi ** start_n
    count = 0
    for _ in range(start_n, max_n + 1):
        if _round_rational(lo_power) != _round_rational(hi_power):
            break
        count += 1
        lo_power *= lo
        hi_power *= hi
    return count


def geo_streak(c: Number, start_n: int = 1, max_n: int = 100, prec: Optional[int] = None) -> GeoConstant:
    """
    Longest run of prime {c^n} for n = start_n .. max_n.

    Args:
        c: The constant, c > 1; decimal strings are read exactly
        start_n: First exponent
        max_n: Last exponent tested
        prec: Digits of an mpf c, the current mpmath precision by default

    Returns:
        GeoConstant with the prime values; ``certified_len`` is set for decimal input

    Raises:
        DomainError: For c <= 1 or max_n < start_n
        PrecisionError: For an mpf c with fewer than ceil(max_n log10 c) + 10 digits
    """
    if start_n < 1 or max_n < start_n:
        raise DomainError(f"geo_streak needs 1 <= start_n <= max_n, got {start_n}, {max_n}")
    values: list[int] = []
    if isinstance(c, mpf):
        prec = prec or mp.dps
        if c <= 1:
            raise DomainError(f"geo_streak requires c > 1, got {c}")
        needed = math.ceil(max_n * float(mpmath.log10(c))) + GUARD_DIGITS
        if prec < needed:
            raise PrecisionError(f"c^{max_n} needs {needed} digits, c carries {prec}")
        with mp.workdps(prec):
            power = c ** start_n
            for _ in range(start_n, max_n + 1):
                value = nearest_int(power)
                if not is_prime(value):
                    break
                values.append(value)
                power *= c
        constant = Decimal(mpmath.nstr(c, prec, strip_zeros=True, min_fixed=-10**9, max_fixed=10**9))
        certified = None
    else:
        q, decimals = _rational(c)
        if q <= 1:
            raise DomainError(f"geo_streak requires c > 1, got {c}")
        power = q ** start_n
        for _ in range(start_n, max_n + 1):
            value = _round_rational(power)
            if not is_prime(value):
                break
            values.append(value)
            power *= q
        constant = Decimal(str(c).strip()) if isinstance(c, (str, Decimal, int)) else Decimal(q.numerator) / Decimal(q.denominator)
        certified = _certified_len(q, decimals, start_n, max_n) if decimals is not None else None

    logger.debug("geo_streak", c=str(constant), start_n=start_n, streak=len(values))
    return GeoConstant(c=constant, start_n=start_n, streak_len=len(values), values=tuple(values),
                       certified_len=certified, status=_status(values))


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

@dataclass
class _Frame:
    lo: mpf
    hi: mpf
    options: list = field(default_factory=list)
    cursor: int = 0


def _candidates(lo: mpf, hi: mpf, n: int, rng: np.random.Generator) -> list[tuple[int, mpf, mpf]]:
    """Prime values q of {c^n} for c in [lo, hi), with their sub-intervals, in proposal order."""
    first, last = round_half_away(lo**n), round_half_away(hi**n)
    if last - first > MAX_CANDIDATE_SPAN:
        raise ResourceError(f"{last - first} candidate values for term {n}; narrow the search interval")
    options = []
    q = gmpy2.next_prime(max(first - 1, 1))
    while q <= last:
        q_int = int(q)
        sub_lo = max(lo, (mpf(2 * q_int - 1) / 2) ** (mpf(1) / n))
        sub_hi = min(hi, (mpf(2 * q_int + 1) / 2) ** (mpf(1) / n))
        if sub_lo < sub_hi:
            options.append((q_int, sub_lo, sub_hi))
        q = gmpy2.next_prime(q)
    return [options[i] for i in rng.permutation(len(options))]


def shortest_decimal(lo: mpf, hi: mpf, max_digits: int) -> Decimal:
    """The decimal with fewest digits after the point inside [lo, hi]."""
    for digits in range(max_digits + 1):
        scale = mpf(10) ** digits
        k = mpmath.ceil(lo * scale)
        if k <= hi * scale:
            return Decimal(f"{int(k)}E-{digits}")
    raise PrecisionError(f"no decimal with <= {max_digits} digits inside the interval")


def _settle(frame: _Frame, start_n: int, max_n: int, work: int) -> GeoConstant:
    width = frame.hi - frame.lo
    c = shortest_decimal(frame.lo + width / 4, frame.hi - width / 4, work)
    verified = geo_streak(c, start_n, max_n)

    def bound(x: mpf) -> Decimal:
        return Decimal(mpmath.nstr(x, work, min_fixed=-10**9, max_fixed=10**9))

    return verified.model_copy(update={'interval': (min(bound(frame.lo), c), max(bound(frame.hi), c))})


def geo_search(lo: Number, hi: Number, target_len: int, cfg: Optional[AnnealConfig] = None,
               start_n: int = 1,
               progress_callback: Optional[Callable[[ProgressInfo], None]] = None) -> GeoConstant:
    """
    Search [lo, hi] for a constant with target_len consecutive prime {c^n}.

    The trajectory depends only on ``cfg.rng_seed``. The step budget is
    ``steps_per_digit * target_len``; an annealing jump is proposed after
    ``steps_per_digit`` steps without a deeper prefix. The returned constant
    is the shortest decimal in the middle half of the final interval and is
    re-verified by geo_streak.

    Raises:
        DomainError: Unless 1 < lo < hi and target_len >= 1
        BudgetExhausted: When the budget runs out or the interval holds no
            such constant; ``best`` holds the longest verified prefix found
    """
    cfg = cfg or AnnealConfig()
    lo_q, hi_q = _rational(lo)[0], _rational(hi)[0]
    if not 1 < lo_q < hi_q:
        raise DomainError(f"geo_search requires 1 < lo < hi, got {lo}, {hi}")
    if target_len < 1:
        raise DomainError(f"target_len must be >= 1, got {target_len}")
    max_n = start_n + target_len - 1
    needed = math.ceil(max_n * math.log10(float(hi_q))) + 2 * GUARD_DIGITS
    if cfg.max_digits is not None and cfg.max_digits < needed:
        raise PrecisionError(f"term {max_n} needs {needed} digits, max_digits is {cfg.max_digits}")
    work = cfg.max_digits or needed

    rng = np.random.default_rng(cfg.rng_seed)
    budget = cfg.steps_per_digit * target_len
    temperature = cfg.initial_temperature
    logger.info("Starting geo search", lo=str(lo), hi=str(hi), target=target_len, seed=cfg.rng_seed, digits=work)

    with mp.workdps(work):
        root = _Frame(mpf(lo_q.numerator) / lo_q.denominator, mpf(hi_q.numerator) / hi_q.denominator)
        root.options = _candidates(root.lo, root.hi, start_n, rng)
        path = [root]
        best_frame, best_depth = root, 0
        stagnation = 0
        for step in range(budget):
            depth = len(path) - 1
            if depth >= target_len:
                result = _settle(path[-1], start_n, max_n, work)
                if result.streak_len >= target_len:
                    logger.info("Geo search reached target", steps=step, c=str(result.c))
                    return result
                # interval edges are numerically unsound; drop the branch
                path.pop()
                continue

            frame = path[-1]
            if frame.cursor < len(frame.options):
                _, sub_lo, sub_hi = frame.options[frame.cursor]
                frame.cursor += 1
                child = _Frame(sub_lo, sub_hi)
                if depth + 1 < target_len:
                    child.options = _candidates(sub_lo, sub_hi, start_n + depth + 1, rng)
                path.append(child)
                if depth + 1 > best_depth:
                    best_frame, best_depth = child, depth + 1
                    stagnation = 0
                    if progress_callback:
                        progress_callback({
                            'percentage': 100.0 * best_depth / target_len,
                            'round': step + 1,
                            'total_rounds': budget,
                            'metrics': {'best_streak': best_depth},
                            'params': {'temperature': temperature},
                        })
                    continue
            elif depth == 0:
                logger.info("Geo search exhausted the interval", steps=step)
                break
            else:
                path.pop()

            stagnation += 1
            if stagnation >= cfg.steps_per_digit and len(path) > 1:
                drop = int(rng.integers(1, len(path)))
                if rng.random() < math.exp(-drop / temperature):
                    del path[len(path) - drop:]
                temperature *= cfg.cooling_rate
                stagnation = 0

        best = _settle(best_frame, start_n, max_n, work) if best_depth > 0 else None
    raise BudgetExhausted(
        f"no constant with {target_len} prime terms found within {budget} steps "
        f"(best streak {best.streak_len if best else 0})",
        best,
    )


def _run_chain(task: tuple) -> GeoConstant | None:
    lo, hi, target_len, cfg, start_n = task
    try:
        return geo_search(lo, hi, target_len, cfg, start_n)
    except BudgetExhausted as e:
        return e.best


def geo_search_chains(lo: Number, hi: Number, target_len: int, cfg: Optional[AnnealConfig] = None,
                      chains: int = 1, start_n: int = 1, n_jobs: Optional[int] = None) -> GeoConstant:
    """
    Independent searches with seeds rng_seed, rng_seed + 1, ...; the longest
    streak wins, ties going to the lower seed.

    Raises:
        BudgetExhausted: If no chain reaches target_len
    """
    cfg = cfg or AnnealConfig()
    tasks = [(str(lo), str(hi), target_len, cfg.model_copy(update={'rng_seed': cfg.rng_seed + i}), start_n)
             for i in range(chains)]
    results = parallel_map(_run_chain, tasks, n_jobs)
    best: Optional[GeoConstant] = None
    for result in results:
        if result is not None and (best is None or result.streak_len > best.streak_len):
            best = result
    if best is None or best.streak_len < target_len:
        raise BudgetExhausted(f"none of {chains} chains reached {target_len} prime terms", best)
    return best
