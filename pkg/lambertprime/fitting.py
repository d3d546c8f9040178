"""
Model-construction pipeline.

1. Solve a correction point x(n) for every table row.
2. Fit x(n) ~ a + b ln n by least squares.
3. Tune one integer exponent k per slice so that c(n) s^k minimises the
   slice's gap to the true p(n).
4. Compare estimators against the table by gap statistics.

Slices and rows are independent, so steps 3 and 4 may fan out over worker
processes (mpmath keeps its precision in a process-global context). Results
are reduced in input order and do not depend on scheduling.
"""
from decimal import Decimal
from enum import StrEnum
from typing import Callable, Dict, Optional, Sequence, TypedDict

import mpmath
import numpy as np
import statsmodels.api as sm
from mpmath import mp, mpf
from pydantic import BaseModel, Field, field_validator

from .base import import_estimator, parallel_map
from .config import DEFAULT_PRECISION, GUARD_DIGITS
from .errors import BracketError, DegenerateFitError, DomainError, ModelRangeError, PrecisionError, TuningError
from .estimators.base import ProgressInfo
from .estimators.base_w_pn import BASE_W_MIN_N, base_w_term
from .plouffe_model import CorrectionForm, CorrectionModel, LogCurve, SliceCorrection
from .precision_core import HPReal, Number, WBranch, bisect_root, check_precision, format_fixed, lambert_w, to_hpreal
from .prime_oracle import PrimeRow, PrimeTable
from .structured_output import get_logger

logger = get_logger(__name__)

CORRECTION_BRACKET = ('0.8', '1.1')
# cells per vectorised block in the exponent scan
SCAN_BLOCK = 4_000_000


class FitResult(TypedDict):
    """Least-squares fit of y against ln n."""

    a: HPReal
    b: HPReal
    r2: HPReal
    point_count: int


class GapStats(TypedDict):
    """Absolute differences between an estimator and the truth column."""

    min_gap: HPReal
    max_gap: HPReal
    mean_gap: HPReal
    count: int


class SliceReport(TypedDict):
    slice_index: int
    k: int
    rows: int
    mean_gap_before: float
    mean_gap_after: float
    flagged: bool


class SliceMetric(StrEnum):
    MEAN = "mean"
    MAX = "max"


class SliceTuneParams(BaseModel):
    """Parameters for slice tuning."""
    s: Decimal = Decimal('0.9999999999')
    slice_width: int = Field(default=10**7, ge=1)
    k_bound: int = Field(default=1000, ge=1)
    metric: SliceMetric = SliceMetric.MEAN

    @field_validator('s', mode='before')
    @classmethod
    def exact_s(cls, value):
        if isinstance(value, float):
            raise ValueError("floats are not accepted; pass a decimal string")
        return Decimal(str(value))

    @field_validator('s')
    @classmethod
    def open_unit_interval(cls, value: Decimal) -> Decimal:
        if not 0 < value < 1:
            raise ValueError(f"s must satisfy 0 < s < 1, got {value}")
        return value


# ---------------------------------------------------------------------------
# Correction points and least squares
# ---------------------------------------------------------------------------

def linear_terms(n: int, p_n: int, pi_n: Optional[int], form: CorrectionForm, work: int) -> tuple[HPReal, HPReal]:
    """
    (A, T) such that the correction x at n solves A x = T.

        sum         A = B,          T = p + pi
        difference  A = B,          T = p - pi
        w0          A = n / W0(n),  T = B - p
    """
    with mp.workdps(work):
        base = base_w_term(mpf(n), work)
        if form is CorrectionForm.SUM:
            return base, mpf(p_n + pi_n)
        if form is CorrectionForm.DIFFERENCE:
            return base, mpf(p_n - pi_n)
        return n / lambert_w(WBranch.PRINCIPAL, n, work), base - p_n


def solve_correction_point(n: int, p_n: int, pi_n: int,
                           form: CorrectionForm = CorrectionForm.DIFFERENCE,
                           prec: int = DEFAULT_PRECISION) -> HPReal:
    """
    Correction factor x at n by bisection, cross-checked against the closed form.

    The default form solves |-n W-1(-e/n)| x = p(n) - pi(n).

    Args:
        n: Index, n >= 8
        p_n: The n-th prime
        pi_n: pi(n), 0 < pi_n < p_n
        form: Sign convention of the model being fitted
        prec: Significant decimal digits

    Returns:
        x in [0.8, 1.1]

    Raises:
        DomainError: On inconsistent inputs
        BracketError: If the root lies outside [0.8, 1.1]
        PrecisionError: If bisection and closed form disagree beyond prec - 5 digits
    """
    if n < BASE_W_MIN_N:
        raise DomainError(f"solve_correction_point requires n >= {BASE_W_MIN_N}, got {n}")
    if not p_n > pi_n > 0:
        raise DomainError(f"solve_correction_point requires p_n > pi_n > 0, got p_n={p_n}, pi_n={pi_n}")
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        slope, target = linear_terms(n, p_n, pi_n, form, work)
        lo, hi = (mpf(v) for v in CORRECTION_BRACKET)
        try:
            bisected = bisect_root(lambda x: slope * x - target, lo, hi,
                                   rel_tol=mpf(10) ** (-work), secant=False)
        except BracketError:
            raise BracketError(
                f"correction point at n={n} is {mpmath.nstr(target / slope, 12)}, "
                f"outside [{lo}, {hi}]; inputs look inconsistent"
            ) from None
        closed = target / slope
        if abs(bisected - closed) > mpf(10) ** (5 - prec) * abs(closed):
            raise PrecisionError(f"bisection and closed form disagree at n={n}")
    with mp.workdps(prec):
        return +closed


def lls_fit(points: Sequence[tuple[int, Number]], prec: int = DEFAULT_PRECISION) -> FitResult:
    """
    Unweighted least squares of y against ln n.

    b = (N sum(y ln n) - sum(y) sum(ln n)) / (N sum(ln n)^2 - (sum ln n)^2)
    a = (sum(y) - b sum(ln n)) / N

    evaluated in centred form, with r^2 the squared sample correlation.
    Points are sorted first, so the result does not depend on their order.

    Raises:
        DegenerateFitError: Fewer than 2 points or a single distinct n
        DomainError: For n < 2
    """
    if len(points) < 2:
        raise DegenerateFitError(f"lls_fit needs at least 2 points, got {len(points)}")
    if any(n < 2 for n, _ in points):
        raise DomainError("lls_fit requires every n >= 2")
    if len({n for n, _ in points}) < 2:
        raise DegenerateFitError("all abscissae ln n are equal")
    check_precision(prec)
    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        pairs = sorted((n, to_hpreal(y, work)) for n, y in points)
        xs = [mpmath.log(n) for n, _ in pairs]
        ys = [y for _, y in pairs]
        count = len(pairs)
        x_mean = mpmath.fsum(xs) / count
        y_mean = mpmath.fsum(ys) / count
        sxx = mpmath.fsum((x - x_mean) ** 2 for x in xs)
        syy = mpmath.fsum((y - y_mean) ** 2 for y in ys)
        sxy = mpmath.fsum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
        b = sxy / sxx
        a = y_mean - b * x_mean
        r2 = mpf(1) if syy == 0 else min(mpf(1), max(mpf(0), sxy**2 / (sxx * syy)))
    with mp.workdps(prec):
        return {'a': +a, 'b': +b, 'r2': +r2, 'point_count': count}


def fit_diagnostics(points: Sequence[tuple[int, Number]]) -> Dict[str, float]:
    """Float OLS diagnostics (standard errors, r^2) next to the exact fit."""
    x = np.array([float(mpmath.log(n)) for n, _ in points])
    y = np.array([float(to_hpreal(v)) for _, v in points])
    result = sm.OLS(y, sm.add_constant(x)).fit()
    return {
        'a': float(result.params[0]),
        'b': float(result.params[1]),
        'a_stderr': float(result.bse[0]),
        'b_stderr': float(result.bse[1]),
        'r2': float(result.rsquared),
    }


# ---------------------------------------------------------------------------
# Slice tuning
# ---------------------------------------------------------------------------

def _row_terms(task: tuple) -> tuple[float, float]:
    """(A c(n), A c(n) - T) as floats for one row."""
    n, p_n, pi_n, form, a, b, work = task
    curve = LogCurve(a=a, b=b)
    with mp.workdps(work):
        slope, target = linear_terms(n, p_n, pi_n, CorrectionForm(form), work)
        scaled = slope * curve.at(n, work)
        return float(scaled), float(scaled - target)


def _candidate_exponents(k_bound: int) -> np.ndarray:
    # 0, -1, 1, -2, 2, ...: argmin's first hit is the smallest |k|, negative first
    ks = np.zeros(2 * k_bound + 1, dtype=np.int64)
    ks[1::2] = -np.arange(1, k_bound + 1)
    ks[2::2] = np.arange(1, k_bound + 1)
    return ks


def _tune_slice(task: tuple) -> tuple[int, float, float]:
    """Best exponent for one slice: (k, objective at 0, objective at k)."""
    scaled, residual, log_s, k_bound, metric = task
    scaled = np.asarray(scaled)
    residual = np.asarray(residual)
    ks = _candidate_exponents(k_bound)
    block = max(1, SCAN_BLOCK // max(1, len(scaled)))
    best_k, best = 0, np.inf
    before = None
    for start in range(0, len(ks), block):
        chunk = ks[start:start + block]
        # A c s^k - T = (A c - T) + A c (s^k - 1)
        gaps = np.abs(residual[:, None] + scaled[:, None] * np.expm1(chunk[None, :] * log_s))
        objective = gaps.mean(axis=0) if metric == SliceMetric.MEAN else gaps.max(axis=0)
        if before is None:
            before = float(objective[0])
        index = int(np.argmin(objective))
        if objective[index] < best:
            best_k, best = int(chunk[index]), float(objective[index])
    return best_k, before, best


def tune_slices(table: PrimeTable, curve: LogCurve, s: Number, slice_width: int, k_bound: int,
                metric: SliceMetric | str = SliceMetric.MEAN,
                form: CorrectionForm = CorrectionForm.DIFFERENCE,
                prec: int = DEFAULT_PRECISION, n_jobs: Optional[int] = None,
                progress_callback: Optional[Callable[[ProgressInfo], None]] = None,
                ) -> tuple[SliceCorrection, list[SliceReport]]:
    """
    Tune one exponent per slice of width ``slice_width`` and report the gains.

    For every slice j (rows with floor(n / slice_width) = j) the integer
    k in [-k_bound, k_bound] minimising the mean (or max) |estimate - p(n)|
    is chosen by a full scan; ties go to the smaller |k|, then to negative k.
    Slices without rows get k = 0 and are flagged.

    Returns:
        (SliceCorrection covering [1, (last slice + 1) * slice_width - 1], per-slice reports)

    Raises:
        TuningError: If a tuned slice ends up worse than the untuned curve
    """
    params = SliceTuneParams(s=s, slice_width=slice_width, k_bound=k_bound, metric=metric)
    if len(table) == 0:
        raise DomainError("slice tuning needs a non-empty table")
    rows = [row for row in table if row.n >= BASE_W_MIN_N]
    needs_pi = form is not CorrectionForm.W0
    if not rows or not all(row.p_n is not None and (row.pi_n is not None or not needs_pi) for row in rows):
        raise DomainError("slice tuning needs p(n) on every row with n >= 8, and pi(n) unless the form is w0")
    check_precision(prec)
    work = prec + GUARD_DIGITS

    terms = parallel_map(
        _row_terms,
        [(row.n, row.p_n, row.pi_n, str(form), curve.a, curve.b, work) for row in rows],
        n_jobs,
    )
    with mp.workdps(work):
        log_s = float(mpmath.log(mpf(str(params.s))))

    slice_count = rows[-1].n // params.slice_width + 1
    members: list[list[int]] = [[] for _ in range(slice_count)]
    for index, row in enumerate(rows):
        members[row.n // params.slice_width].append(index)

    tasks = []
    for indexes in members:
        if indexes:
            tasks.append(([terms[i][0] for i in indexes], [terms[i][1] for i in indexes],
                          log_s, params.k_bound, params.metric))
    results = iter(parallel_map(_tune_slice, tasks, n_jobs))

    exponents: list[int] = []
    flagged: list[int] = []
    reports: list[SliceReport] = []
    for j, indexes in enumerate(members):
        if not indexes:
            exponents.append(0)
            flagged.append(j + 1)
            reports.append({'slice_index': j + 1, 'k': 0, 'rows': 0,
                            'mean_gap_before': float('nan'), 'mean_gap_after': float('nan'),
                            'flagged': True})
            continue
        k, before, after = next(results)
        if after > before:
            raise TuningError(f"slice {j + 1}: tuned gap {after} exceeds untuned gap {before}")
        exponents.append(k)
        reports.append({'slice_index': j + 1, 'k': k, 'rows': len(indexes),
                        'mean_gap_before': before, 'mean_gap_after': after, 'flagged': False})
        if progress_callback:
            progress_callback({
                'percentage': 100.0 * (j + 1) / slice_count,
                'round': j + 1,
                'total_rounds': slice_count,
                'metrics': {'gap_before': before, 'gap_after': after},
                'params': {'k': k},
            })

    if flagged:
        logger.warning("Slices without table rows were set to k=0", slices=flagged)
    correction = SliceCorrection(
        s=params.s,
        exponents=tuple(exponents),
        range_max=slice_count * params.slice_width - 1,
        slice_width=params.slice_width,
        flagged=tuple(flagged),
    )
    return correction, reports


def slice_tune(table: PrimeTable, curve: LogCurve, s: Number, slice_width: int, k_bound: int,
               **kwargs) -> SliceCorrection:
    """Exponent table only; see tune_slices."""
    return tune_slices(table, curve, s, slice_width, k_bound, **kwargs)[0]


# ---------------------------------------------------------------------------
# Gap statistics
# ---------------------------------------------------------------------------

def _row_estimate(task: tuple) -> HPReal:
    estimator, params_dump, model, n, pi_n, prec = task
    Model = import_estimator(estimator)
    params = Model.params_class()(**params_dump) if params_dump is not None else None
    try:
        return Model.evaluate(n, params, pi_n=pi_n, model=model, prec=prec)
    except (DomainError, ModelRangeError) as e:
        raise type(e)(f"{estimator} at n={n}: {e}") from e


def evaluate_gaps(estimator: str | Callable[[PrimeRow], Number], table: PrimeTable,
                  model: Optional[CorrectionModel] = None, params: Optional[BaseModel] = None,
                  prec: int = DEFAULT_PRECISION, n_jobs: Optional[int] = None,
                  truth: str = 'p_n',
                  progress_callback: Optional[Callable[[ProgressInfo], None]] = None) -> GapStats:
    """
    Min, max and mean |estimate - truth| over the table.

    Args:
        estimator: Estimator id, or a callable mapping a row to a value
        table: Rows holding the truth column the estimator predicts
        model: Correction model override for the plouffe_g estimator
        params: Estimator parameter model
        prec: Significant decimal digits
        n_jobs: Worker processes, -1 for all CPUs
        truth: Truth column for a callable estimator; ids carry their own
        progress_callback: Receives a ProgressInfo as rows complete

    Raises:
        DomainError: If a row lacks the truth column, or an estimator domain
            error naming the offending n
    """
    if len(table) == 0:
        raise DomainError("evaluate_gaps needs a non-empty table")
    check_precision(prec)
    name = getattr(estimator, '__name__', 'callable') if callable(estimator) else str(estimator)
    if not callable(estimator):
        Model = import_estimator(estimator)
        truth = Model.truth
        if Model.requires_pi(params, model) and not table.has_column('pi_n'):
            raise DomainError(f"{estimator} needs pi(n) on every row")
    if not table.has_column(truth):
        raise DomainError(f"{name} predicts {truth}, which the table does not hold on every row")

    step = max(1, len(table) // 20)

    def report(done: int) -> None:
        if progress_callback and (done % step == 0 or done == len(table)):
            progress_callback({
                'percentage': 100.0 * done / len(table),
                'round': done,
                'total_rounds': len(table),
                'metrics': {},
                'params': {'estimator': name},
            })

    if callable(estimator):
        values = []
        for row in table:
            values.append(to_hpreal(estimator(row), prec + GUARD_DIGITS))
            report(len(values))
    else:
        dump = params.model_dump(exclude_none=True) if params is not None else None
        tasks = [(str(estimator), dump, model, row.n, row.pi_n, prec) for row in table]
        values = parallel_map(_row_estimate, tasks, n_jobs, on_result=report)
    truths = [getattr(row, truth) for row in table]

    work = prec + GUARD_DIGITS
    with mp.workdps(work):
        gaps = [abs(value - t) for value, t in zip(values, truths)]
        mean = mpmath.fsum(gaps) / len(gaps)
    with mp.workdps(prec):
        return {'min_gap': +min(gaps), 'max_gap': +max(gaps), 'mean_gap': +mean, 'count': len(gaps)}


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

class FitReport(TypedDict):
    """Everything fit_model measured on its way to a model."""

    fit: FitResult
    diagnostics: Dict[str, float]
    slices: list[SliceReport]
    gaps_base: GapStats
    gaps_curve: GapStats
    gaps_tuned: GapStats
    improvement: float


def fit_model(table: PrimeTable, name: str = 'fitted', s: Number = '0.9999999999',
              slice_width: int = 10**7, k_bound: int = 1000,
              metric: SliceMetric | str = SliceMetric.MEAN,
              form: CorrectionForm = CorrectionForm.DIFFERENCE,
              prec: int = DEFAULT_PRECISION, n_jobs: Optional[int] = None,
              progress_callback: Optional[Callable[[ProgressInfo], None]] = None,
              ) -> tuple[CorrectionModel, FitReport]:
    """
    Build a correction model from a table with pi(n) and p(n).

    Steps: correction points, least-squares curve, slice tuning, then gap
    statistics for the bare W term, the curve alone and the tuned model.

    Args:
        table: Rows with both columns; rows below n = 8 are skipped
        name: Name recorded in the model
        s: Slice base, 0 < s < 1
        slice_width: Width of every slice
        k_bound: Exponents are searched in [-k_bound, k_bound]
        metric: 'mean' or 'max' gap per slice
        form: Sign convention of the fitted model
        prec: Significant decimal digits
        n_jobs: Worker processes, -1 for all CPUs
        progress_callback: Receives a ProgressInfo per tuned slice

    Returns:
        (model, report)

    Raises:
        DomainError: If the table lacks p(n), or pi(n) for a non-w0 form
        DegenerateFitError: Fewer than two usable rows
    """
    rows = [row for row in table if row.n >= BASE_W_MIN_N]
    if not all(row.p_n is not None and row.pi_n is not None for row in rows):
        raise DomainError("fit_model needs pi(n) and p(n) on every row with n >= 8")
    logger.info("Solving correction points", rows=len(rows), form=str(form))
    points = [(row.n, solve_correction_point(row.n, row.p_n, row.pi_n, form, prec)) for row in rows]
    fit = lls_fit(points, prec)
    diagnostics = fit_diagnostics(points) if len(points) > 2 else {}
    logger.info("Fitted curve", a=format_fixed(fit['a'], prec), b=format_fixed(fit['b'], prec),
                r2=mpmath.nstr(fit['r2'], 12))

    lo = rows[0].n
    curve = LogCurve(a=format_fixed(fit['a'], prec), b=format_fixed(fit['b'], prec))
    slices, slice_reports = tune_slices(
        PrimeTable(rows=tuple(rows), source=table.source), curve, s, slice_width, k_bound,
        metric=metric, form=form, prec=prec, n_jobs=n_jobs, progress_callback=progress_callback,
    )
    curve = LogCurve(a=curve.a, b=curve.b, n_range=(lo, slices.range_max))
    untuned = CorrectionModel(name=f'{name}-curve', curve=curve, valid_range=(lo, slices.range_max), form=form)
    model = CorrectionModel(name=name, curve=curve, slices=slices, valid_range=(lo, slices.range_max), form=form)

    sample = PrimeTable(rows=tuple(rows), source=table.source)
    gaps_base = evaluate_gaps('base_w_pn', sample, prec=prec, n_jobs=n_jobs)
    gaps_curve = evaluate_gaps('plouffe_g', sample, model=untuned, prec=prec, n_jobs=n_jobs)
    gaps_tuned = evaluate_gaps('plouffe_g', sample, model=model, prec=prec, n_jobs=n_jobs)
    improvement = float(gaps_base['mean_gap'] / gaps_tuned['mean_gap']) if gaps_tuned['mean_gap'] else float('inf')
    logger.info("Model built", name=name, slices=len(slices.exponents),
                mean_gap=mpmath.nstr(gaps_tuned['mean_gap'], 10), improvement=improvement)
    report: FitReport = {
        'fit': fit,
        'diagnostics': diagnostics,
        'slices': slice_reports,
        'gaps_base': gaps_base,
        'gaps_curve': gaps_curve,
        'gaps_tuned': gaps_tuned,
        'improvement': improvement,
    }
    return model, report
