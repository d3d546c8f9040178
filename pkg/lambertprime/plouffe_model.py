"""
Corrected Lambert W estimators.

A correction model multiplies the base term B(n) = |-n W-1(-e/n)| by a
logarithmic curve c(n) = a + b ln n and a per-slice factor s^k, where k is
read from an exponent table indexed by lk = floor(n / slice_width) + 1.
How the corrected term turns into p(n) depends on the model's form:

    sum         p(n) = B c s^k - pi(n)          (large-n G model)
    difference  p(n) = B c s^k + pi(n)
    w0          p(n) = B - c s^k n / W0(n)      (small-n g and pi inversion models)

Three models ship in ``lambertprime/data``: ``g_large``, ``g_small`` and
``f_inversion``. The F estimator for 1e16..1e24 replaces the slice table
with two degree-8 polynomials in log10 n.
"""
import hashlib
from decimal import Decimal, InvalidOperation
from enum import StrEnum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

import mpmath
from mpmath import mp, mpf
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import DEFAULT_G_MODEL, DEFAULT_PRECISION, F_POLY_RANGE, GUARD_DIGITS, SHIPPED_MODELS
from .errors import BracketError, DomainError, ModelRangeError, TableParseError
from .estimators.base_w_pn import BASE_W_MIN_N, base_w_term
from .precision_core import HPReal, WBranch, bisect_root, check_precision, lambert_w, round_half_away
from .structured_output import get_logger

logger = get_logger(__name__)

MAX_EXPONENT = 10**6
EXPONENTS_PER_LINE = 20


class CorrectionForm(StrEnum):
    """How the corrected base term relates to p(n)."""

    SUM = "sum"
    DIFFERENCE = "difference"
    W0 = "w0"


def _decimal(value) -> Decimal:
    if isinstance(value, float):
        raise ValueError("floats are not accepted; pass a decimal string")
    return Decimal(str(value))


class LogCurve(BaseModel):
    """c(n) = a + b ln n over a declared n-range."""

    model_config = ConfigDict(frozen=True)

    a: Decimal
    b: Decimal
    n_range: Optional[tuple[int, int]] = None

    coerce_coefficients = field_validator('a', 'b', mode='before')(_decimal)

    @model_validator(mode='after')
    def check_curve_range(self) -> 'LogCurve':
        if self.n_range is not None:
            lo, hi = self.n_range
            if not 1 <= lo <= hi:
                raise ValueError(f"curve n-range must satisfy 1 <= lo <= hi, got {self.n_range}")
            # a + b ln n is monotone, so the endpoints bound it
            for n in (lo, hi):
                value = self.at(n, DEFAULT_PRECISION)
                if not mpf('0.5') < value < mpf('1.5'):
                    raise ValueError(f"curve value {mpmath.nstr(value, 12)} at n={n} is outside (0.5, 1.5)")
        return self

    def at(self, n: int | HPReal, work: int) -> HPReal:
        """a + b ln n at ``work`` digits."""
        with mp.workdps(work):
            return mpf(str(self.a)) + mpf(str(self.b)) * mpmath.log(n)


class SliceCorrection(BaseModel):
    """Per-slice integer exponents for the s^k factor."""

    model_config = ConfigDict(frozen=True)

    s: Decimal
    exponents: tuple[int, ...]
    range_max: int
    slice_width: int = Field(ge=1)
    # slices that received no data when the table was tuned
    flagged: tuple[int, ...] = ()

    coerce_base = field_validator('s', mode='before')(_decimal)

    @model_validator(mode='after')
    def check_table(self) -> 'SliceCorrection':
        if not (0 < self.s <= 1):
            raise ValueError(f"s must satisfy 0 < s <= 1, got {self.s}")
        if not self.exponents:
            raise ValueError("exponent table is empty")
        worst = max(abs(k) for k in self.exponents)
        if worst > MAX_EXPONENT:
            raise ValueError(f"exponent {worst} exceeds {MAX_EXPONENT} in magnitude")
        if self.range_max < 1:
            raise ValueError(f"range_max must be >= 1, got {self.range_max}")
        last = self.range_max // self.slice_width + 1
        if last > len(self.exponents):
            raise ValueError(
                f"range_max={self.range_max} reaches slice {last} but the table has "
                f"{len(self.exponents)} entries"
            )
        return self

    def slice_index(self, n: int) -> int:
        """1-based lk = floor(n / slice_width) + 1."""
        if not 1 <= n <= self.range_max:
            raise ModelRangeError(f"n={n} is outside the slice table range [1, {self.range_max}]")
        return n // self.slice_width + 1

    def exponent(self, n: int) -> int:
        return self.exponents[self.slice_index(n) - 1]

    def factor(self, n: int, work: int) -> HPReal:
        """s^k for n's slice."""
        with mp.workdps(work):
            return mpf(str(self.s)) ** self.exponent(n)

    def checksum(self) -> str:
        return exponent_checksum(self.exponents)


class PolyCorrection(BaseModel):
    """cn(n) = pola(z) + polb(z) ln n with z = log10 n; coefficients from degree 8 down to 0."""

    model_config = ConfigDict(frozen=True)

    pola: tuple[Decimal, ...] = Field(min_length=9, max_length=9)
    polb: tuple[Decimal, ...] = Field(min_length=9, max_length=9)

    def at(self, n: int, work: int) -> HPReal:
        with mp.workdps(work):
            z = mpmath.log10(n)
            a = mpmath.polyval([mpf(str(c)) for c in self.pola], z)
            b = mpmath.polyval([mpf(str(c)) for c in self.polb], z)
            return a + b * mpmath.log(n)


class CorrectionModel(BaseModel):
    """A fitted curve, its optional slice table and the range it is valid on."""

    model_config = ConfigDict(frozen=True)

    name: str
    curve: LogCurve
    slices: Optional[SliceCorrection] = None
    valid_range: tuple[int, int]
    form: CorrectionForm = CorrectionForm.SUM

    @model_validator(mode='after')
    def check_cover(self) -> 'CorrectionModel':
        lo, hi = self.valid_range
        if not 1 <= lo <= hi:
            raise ValueError(f"valid_range must satisfy 1 <= lo <= hi, got {self.valid_range}")
        if self.slices is not None and self.slices.range_max < hi:
            raise ValueError(
                f"slice table ends at {self.slices.range_max}, below the valid range end {hi}"
            )
        return self

    def check_range(self, n: int) -> None:
        lo, hi = self.valid_range
        if not lo <= n <= hi:
            raise ModelRangeError(f"n={n} is outside model '{self.name}' valid range [{lo}, {hi}]")

    def factor(self, n: int | HPReal, work: int, index_n: Optional[int] = None) -> HPReal:
        """
        c(n) s^k at ``work`` digits.

        Args:
            n: Point where the curve is evaluated
            work: Working digits
            index_n: Integer used to pick the slice, n itself when omitted
        """
        with mp.workdps(work):
            value = self.curve.at(n, work)
            if self.slices is not None:
                value *= self.slices.factor(n if index_n is None else index_n, work)
            return value


# Polynomial correction for 1e16 <= n <= 1e24
F_POLY = PolyCorrection(
    pola=(
        '.1803178829775386802559072260225588343254e-12',
        '-.3206852936427839673078154416271278702381e-10',
        '.2521168696363102117361245200766645862014e-8',
        '-.1148245660104216214093938301036666192296e-6',
        '.3329760033724798728321163791428487967963e-5',
        '-.6343395542494949120689514623217102223176e-4',
        '.7851801857533638277814251770195187519581e-3',
        '-.5912431390595954878523745751806703967872e-2',
        '.2187329700777127284427407021768653056673e-1',
    ),
    polb=(
        '.8949926057969637729777538473173261408730e-12',
        '-.1611795950806416304161491053953385128968e-9',
        '.1287542319981049792998526211011490785070e-7',
        '-.5988056104228871471776180438025688273194e-6',
        '.1786915791025107343702497983252030617773e-4',
        '-.3548565854556946509095877029495597659212e-3',
        '.4690427023808579602996344427037051784331e-2',
        '-.3980636249963806490254767914782205838276e-1',
        '.1969974737812788247127674632264178712585',
    ),
)


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------

REQUIRED_KEYS = ('s', 'slice_width', 'range_max', 'a', 'b')
OPTIONAL_KEYS = ('form', 'range_min', 'curve_min', 'sha256')


def exponent_checksum(exponents) -> str:
    """sha256 of the exponents joined by single spaces."""
    return hashlib.sha256(' '.join(str(k) for k in exponents).encode('ascii')).hexdigest()


def derive_slice_width(range_max: int, table_length: int) -> int:
    """
    range_max / table_length, snapped to a power of ten when within 1%.

    Only used for headers that omit slice_width.
    """
    raw = max(1, -(-range_max // table_length))
    power = 10 ** (len(str(raw)) - 1)
    for candidate in (power, power * 10):
        if abs(raw - candidate) <= candidate // 100:
            return candidate
    return raw


def parse_model(text: str, source: str = '<string>') -> CorrectionModel:
    """
    Parse the plain-text model format.

    The first non-comment line is the header
    ``model <name> s=<decimal> slice_width=<int> range_max=<int> a=<decimal> b=<decimal>``
    with optional ``form=``, ``range_min=``, ``curve_min=`` and ``sha256=`` keys;
    the remaining lines hold whitespace-separated integer exponents. Decimals
    are read exactly.

    Raises:
        TableParseError: On the first malformed line, with its line number
    """
    header: Optional[dict[str, str]] = None
    name = ''
    header_line = 0
    exponents: list[int] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if header is None:
            fields = line.split()
            if fields[0] != 'model' or len(fields) < 2:
                raise TableParseError(lineno, "expected header 'model <name> key=value ...'", source)
            name = fields[1]
            header = {}
            for item in fields[2:]:
                key, sep, value = item.partition('=')
                if not sep or key not in REQUIRED_KEYS + OPTIONAL_KEYS:
                    raise TableParseError(lineno, f"unknown header field '{item}'", source)
                header[key] = value
            missing = [key for key in REQUIRED_KEYS if key not in header and key != 'slice_width']
            if missing:
                raise TableParseError(lineno, f"header is missing {', '.join(missing)}", source)
            header_line = lineno
            continue
        for token in line.split():
            try:
                exponents.append(int(token))
            except ValueError:
                raise TableParseError(lineno, f"'{token}' is not an integer exponent", source) from None

    if header is None:
        raise TableParseError(0, "no model header found", source)
    if not exponents:
        raise TableParseError(header_line, "model has no exponents", source)

    def integer(key: str, default: Optional[int] = None) -> int:
        if key not in header:
            return default
        try:
            return int(header[key])
        except ValueError:
            raise TableParseError(header_line, f"{key}={header[key]} is not an integer", source) from None

    for key in ('s', 'a', 'b'):
        try:
            Decimal(header[key])
        except InvalidOperation:
            raise TableParseError(header_line, f"{key}={header[key]} is not a decimal", source) from None

    expected = header.get('sha256')
    if expected is not None and expected != exponent_checksum(exponents):
        raise TableParseError(header_line, "exponent table does not match its sha256 checksum", source)

    range_max = integer('range_max')
    slice_width = integer('slice_width') or derive_slice_width(range_max, len(exponents))
    range_min = integer('range_min', 1)
    curve_min = integer('curve_min', max(range_min, BASE_W_MIN_N))
    try:
        form = CorrectionForm(header.get('form', CorrectionForm.SUM))
    except ValueError:
        raise TableParseError(header_line, f"unknown form '{header['form']}'", source) from None

    try:
        return CorrectionModel(
            name=name,
            curve=LogCurve(a=header['a'], b=header['b'], n_range=(curve_min, range_max)),
            slices=SliceCorrection(s=header['s'], exponents=tuple(exponents),
                                   range_max=range_max, slice_width=slice_width),
            valid_range=(range_min, range_max),
            form=form,
        )
    except ValueError as e:
        raise TableParseError(header_line, str(e), source) from None


def format_model(model: CorrectionModel) -> str:
    """Render a model with slices in the plain-text format."""
    if model.slices is None:
        raise ValueError(f"model '{model.name}' has no slice table to write")
    slices = model.slices
    lo, _ = model.valid_range
    header = (
        f"model {model.name} s={slices.s} slice_width={slices.slice_width} "
        f"range_max={slices.range_max} a={model.curve.a} b={model.curve.b} "
        f"form={model.form} range_min={lo}"
    )
    if model.curve.n_range is not None:
        header += f" curve_min={model.curve.n_range[0]}"
    header += f" sha256={slices.checksum()}"
    lines = [header]
    if slices.flagged:
        lines.insert(0, "# empty slices: " + ' '.join(str(i) for i in slices.flagged))
    for start in range(0, len(slices.exponents), EXPONENTS_PER_LINE):
        lines.append(' '.join(str(k) for k in slices.exponents[start:start + EXPONENTS_PER_LINE]))
    return '\n'.join(lines) + '\n'


def load_model(path: str | Path) -> CorrectionModel:
    path = Path(path)
    return parse_model(path.read_text(encoding='ascii'), source=str(path))


def write_model(model: CorrectionModel, path: str | Path) -> None:
    Path(path).write_text(format_model(model), encoding='ascii')


@lru_cache(maxsize=None)
def shipped_model(name: str) -> CorrectionModel:
    """Load one of the models bundled in lambertprime/data."""
    if name not in SHIPPED_MODELS:
        raise ValueError(f"Unknown shipped model '{name}'. Available: {SHIPPED_MODELS}")
    text = resources.files('lambertprime.data').joinpath(f'{name}.model').read_text(encoding='ascii')
    return parse_model(text, source=f'lambertprime/data/{name}.model')


def resolve_model(name_or_path: str | Path) -> CorrectionModel:
    """A shipped model name or a path to a model file."""
    if str(name_or_path) in SHIPPED_MODELS:
        return shipped_model(str(name_or_path))
    return load_model(name_or_path)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def _corrected_value(n: int, pi_n: Optional[int], model: CorrectionModel, work: int) -> HPReal:
    with mp.workdps(work):
        base = base_w_term(mpf(n), work)
        factor = model.factor(n, work)
        if model.form is CorrectionForm.SUM:
            return base * factor - pi_n
        if model.form is CorrectionForm.DIFFERENCE:
            return base * factor + pi_n
        return base - factor * n / lambert_w(WBranch.PRINCIPAL, n, work)


def corrected_pn(n: int, pi_n: Optional[int], model: Optional[CorrectionModel] = None,
                 prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    p(n) from a correction model.

    For the default ``sum`` form this is |-n W-1(-e/n)| (a + b ln n) s^ll[lk] - pi(n).

    Args:
        n: Index of the prime
        pi_n: pi(n); required by the sum and difference forms
        model: Correction model, the shipped large-n G model by default
        prec: Significant decimal digits

    Raises:
        ModelRangeError: When n is outside the model's valid range
        DomainError: For n < 8 or a missing/non-positive pi_n
    """
    model = model or shipped_model(DEFAULT_G_MODEL)
    check_precision(prec)
    model.check_range(n)
    if n < BASE_W_MIN_N:
        raise DomainError(f"corrected_pn requires n >= {BASE_W_MIN_N} (W-1 domain), got {n}")
    if model.form is not CorrectionForm.W0 and (pi_n is None or pi_n <= 0):
        raise DomainError(f"model '{model.name}' needs pi(n) > 0, got {pi_n}")
    value = _corrected_value(n, pi_n, model, prec + GUARD_DIGITS)
    with mp.workdps(prec):
        return +value


def f_poly_pn(n: int, pi_n: int, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    -cn(n) n W-1(-e/n) - pi(n) with the shipped polynomial correction.

    Raises:
        ModelRangeError: Outside 1e16 <= n <= 1e24
        DomainError: For pi_n <= 0
    """
    lo, hi = F_POLY_RANGE
    if not lo <= n <= hi:
        raise ModelRangeError(f"f_poly_pn is fitted on [1e16, 1e24], got n={n}")
    if pi_n is None or pi_n <= 0:
        raise DomainError(f"f_poly_pn needs pi(n) > 0, got {pi_n}")
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        value = F_POLY.at(n, work) * base_w_term(mpf(n), work) - pi_n
    with mp.workdps(prec):
        return +value


def g_small_pn(n: int, prec: int = DEFAULT_PRECISION) -> int:
    """
    The n-th prime for n <= 1009999 without pi(n).

    round(|-n W-1(-e/n)| - c(n) 0.999^ll[lk] n / W0(n)) with the shipped
    101-slice table. Accuracy is only claimed for n >= 1e4, and it is coarse:
    the gap to the true prime grows from single digits at 1e4 to about 1100
    in magnitude near 1e6 (-851 at 1e6, +180 at 5e5).

    Raises:
        ModelRangeError: Outside [1, 1009999]
        DomainError: For n < 8
    """
    model = shipped_model('g_small')
    return round_half_away(corrected_pn(n, None, model, prec))


def invert_pi(k: int, model: Optional[CorrectionModel] = None, prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    pi(k) by solving |-n W-1(-e/n)| - c(n) s^ll[lk] n / W0(n) = k for n.

    The slice is picked from k, the curve is evaluated at n. The root is
    bracketed in [H/8, H] with H = 2k / ln k, the lower end raised to 8 so
    the W-1 term stays defined.

    Raises:
        ModelRangeError: For k outside the model's valid range
        BracketError: If the bracket holds no root
    """
    model = model or shipped_model('f_inversion')
    check_precision(prec)
    model.check_range(k)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        high = 2 * mpf(k) / mpmath.log(k)
        low = max(high / 8, mpf(BASE_W_MIN_N))
        if low >= high:
            raise BracketError(f"invert_pi bracket [{mpmath.nstr(low, 10)}, {mpmath.nstr(high, 10)}] is empty for k={k}")
        exponent_factor = model.slices.factor(k, work) if model.slices is not None else mpf(1)

        def residual(n: HPReal) -> HPReal:
            factor = model.curve.at(n, work) * exponent_factor
            return base_w_term(n, work) - factor * n / lambert_w(WBranch.PRINCIPAL, n, work) - k

        root = bisect_root(residual, low, high, rel_tol=mpf(10) ** (-prec - 2))
    logger.debug("invert_pi solved", k=k, root=mpmath.nstr(root, 20))
    with mp.workdps(prec):
        return +root
