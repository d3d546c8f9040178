"""
High-precision kernel.

All real arithmetic goes through mpmath. An HPReal is an ``mpmath.mpf``; its
precision contract is the ``prec`` argument (significant decimal digits) that
every public operation takes. Work happens at ``prec + GUARD_DIGITS`` and
results are rounded to ``prec`` digits on return.
"""
from decimal import Decimal, InvalidOperation
from enum import StrEnum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, TypeAlias

import mpmath
from mpmath import mp, mpf

from .config import DEFAULT_PRECISION, GUARD_DIGITS, MIN_PRECISION
from .errors import BracketError, DomainError

HPReal: TypeAlias = mpf

Number: TypeAlias = int | str | Decimal | Fraction | mpf

# Halley converges cubically; this only guards against a stuck iteration
MAX_HALLEY_STEPS = 200


class WBranch(StrEnum):
    """Real branches of the Lambert W function."""

    PRINCIPAL = "principal"
    MINUS_ONE = "minus_one"


def check_precision(prec: int) -> int:
    if prec < MIN_PRECISION:
        raise DomainError(f"precision must be >= {MIN_PRECISION} digits, got {prec}")
    return prec


def to_hpreal(value: Number, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    Convert an exact input to an HPReal at ``prec`` digits.

    Floats are refused: a binary float has already been rounded once, and
    the CLI promises decimal strings are read exactly.

    Args:
        value: int, decimal string, Decimal, Fraction, mpf or an mpmath
            constant such as mp.e
        prec: Significant decimal digits

    Returns:
        The value as mpmath.mpf

    Raises:
        TypeError: For floats and unsupported types
        DomainError: For strings that are not plain decimal numbers
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"{type(value).__name__} is not accepted as HPReal input; pass a decimal string")
    with mp.workdps(prec):
        if isinstance(value, mpf) or hasattr(value, "_mpf_"):
            # mpmath constants evaluate lazily at the working precision
            return +mpf(value)
        if isinstance(value, int):
            return mpf(value)
        if isinstance(value, Fraction):
            return mpf(value.numerator) / value.denominator
        if isinstance(value, str):
            try:
                value = Decimal(value.strip())
            except InvalidOperation:
                raise DomainError(f"'{value}' is not a decimal number") from None
        if isinstance(value, Decimal):
            if not value.is_finite():
                raise DomainError(f"'{value}' is not a finite decimal number")
            return mpf(str(value))
    raise TypeError(f"Cannot convert {type(value).__name__} to HPReal")


def format_fixed(x: HPReal, prec: int = DEFAULT_PRECISION) -> str:
    """Fixed-point rendering with ``prec`` significant digits, never scientific."""
    with mp.workdps(prec + GUARD_DIGITS):
        return mpmath.nstr(mpf(x), prec, strip_zeros=False, min_fixed=-10**9, max_fixed=10**9)


def round_half_away(x: HPReal) -> int:
    """Nearest integer, halves rounded away from zero."""
    if x < 0:
        return -int(mpmath.floor(-x + mpf(1) / 2))
    return int(mpmath.floor(x + mpf(1) / 2))


def _w_seed(branch: WBranch, x: HPReal) -> HPReal:
    near_branch_point = x < mpf(-1) / 4
    if near_branch_point:
        # series of W around -1/e in p = +-sqrt(2(ex + 1))
        p = mpmath.sqrt(2 * (mp.e * x + 1))
        if branch is WBranch.MINUS_ONE:
            p = -p
        return -1 + p - p**2 / 3 + mpf(11) / 72 * p**3
    if branch is WBranch.MINUS_ONE:
        l1 = mpmath.log(-x)
        l2 = mpmath.log(-l1)
        return l1 - l2 + l2 / l1
    if x > 3:
        l1 = mpmath.log(x)
        l2 = mpmath.log(l1)
        return l1 - l2 + l2 / l1
    return mpmath.log(1 + x)


def _halley(w: HPReal, x: HPReal, work: int) -> HPReal:
    eps = mpf(10) ** (2 - work)
    for _ in range(MAX_HALLEY_STEPS):
        ew = mpmath.exp(w)
        f = w * ew - x
        wp1 = w + 1
        if wp1 == 0:
            break
        step = f / (ew * wp1 - (w + 2) * f / (2 * wp1))
        w -= step
        if abs(step) <= eps * (1 + abs(w)):
            break
    return w


def lambert_w(branch: WBranch | str, x: Number, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    Real Lambert W on branch 0 or -1.

    The root of w*exp(w) = x is found by Halley iteration from a
    branch-appropriate seed at prec + GUARD_DIGITS digits.

    Args:
        branch: WBranch.PRINCIPAL (W0, w >= -1) or WBranch.MINUS_ONE (W-1, w <= -1)
        x: Argument; W0 needs x >= -1/e, W-1 needs -1/e <= x < 0
        prec: Significant decimal digits of the result

    Returns:
        w with |w*e^w - x| <= 10^(2-prec) * max(|x|, 10^-prec)

    Raises:
        DomainError: If x lies outside the branch's domain
    """
    branch = WBranch(branch)
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        x = to_hpreal(x, work)
        branch_point = -mpmath.exp(-1)
        if x < branch_point:
            # one ulp at the caller's precision is forgiven
            if branch_point - x > mpf(10) ** (1 - prec) * abs(branch_point):
                raise DomainError(f"lambert_w({branch}) requires x >= -1/e, got {mpmath.nstr(x, 20)}")
            x = branch_point
        if branch is WBranch.MINUS_ONE and x >= 0:
            raise DomainError(f"lambert_w(minus_one) requires -1/e <= x < 0, got {mpmath.nstr(x, 20)}")

        if x == 0:
            w = mpf(0)
        elif x == branch_point:
            w = mpf(-1)
        else:
            w = _halley(_w_seed(branch, x), x, work)
            if branch is WBranch.MINUS_ONE and w > -1:
                w = mpf(-1)
            elif branch is WBranch.PRINCIPAL and w < -1:
                w = mpf(-1)
    with mp.workdps(prec):
        return +w


def lambert_w_series(x: Number, num_terms: int, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    Truncated asymptotic expansion of W0(x) in L1 = ln x and L2 = ln ln x.

    The six terms are
    L1 - L2 + L2/L1 + L2(L2-2)/(2L1^2) + L2(6-9L2+2L2^2)/(6L1^3)
    + L2(-12+36L2-22L2^2+3L2^3)/(12L1^4).
    """
    if not 1 <= num_terms <= 6:
        raise DomainError(f"num_terms must be in 1..6, got {num_terms}")
    check_precision(prec)
    with mp.workdps(prec + GUARD_DIGITS):
        x = to_hpreal(x, prec + GUARD_DIGITS)
        if x <= mp.e:
            raise DomainError(f"lambert_w_series requires x > e, got {mpmath.nstr(x, 20)}")
        l1 = mpmath.log(x)
        l2 = mpmath.log(l1)
        terms = [
            l1,
            -l2,
            l2 / l1,
            l2 * (l2 - 2) / (2 * l1**2),
            l2 * (6 - 9 * l2 + 2 * l2**2) / (6 * l1**3),
            l2 * (-12 + 36 * l2 - 22 * l2**2 + 3 * l2**3) / (12 * l1**4),
        ]
        total = mpmath.fsum(terms[:num_terms])
    with mp.workdps(prec):
        return +total


def li(x: Number, prec: int = DEFAULT_PRECISION) -> HPReal:
    """Logarithmic integral, principal value for x > 1."""
    check_precision(prec)
    with mp.workdps(prec + GUARD_DIGITS):
        x = to_hpreal(x, prec + GUARD_DIGITS)
        if x < 0:
            raise DomainError(f"li requires x >= 0, got {mpmath.nstr(x, 20)}")
        if x == 1:
            raise DomainError("li diverges at x = 1")
        value = mpmath.li(x)
    with mp.workdps(prec):
        return +value


@lru_cache(maxsize=4096)
def zeta_int(k: int, prec: int = DEFAULT_PRECISION) -> HPReal:
    """Riemann zeta at an integer k >= 2. Cached per (k, prec)."""
    if k < 2:
        raise DomainError(f"zeta_int requires k >= 2, got {k}")
    check_precision(prec)
    with mp.workdps(prec + GUARD_DIGITS):
        value = mpmath.zeta(k)
    with mp.workdps(prec):
        return +value


def bisect_root(f: Callable[[HPReal], HPReal], lo: HPReal, hi: HPReal,
                rel_tol: HPReal, max_steps: int = 2000, secant: bool = True) -> HPReal:
    """
    Bracketed bisection, optionally polished by one secant step.

    Must be called inside the caller's mp.workdps block.

    Raises:
        BracketError: If f(lo) and f(hi) have the same sign
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(
            f"no sign change in [{mpmath.nstr(lo, 15)}, {mpmath.nstr(hi, 15)}]"
        )
    for _ in range(max_steps):
        if hi - lo <= rel_tol * max(abs(lo), abs(hi)):
            break
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    if secant and f_hi != f_lo:
        x = lo - f_lo * (hi - lo) / (f_hi - f_lo)
        if lo <= x <= hi:
            return x
    return (lo + hi) / 2
